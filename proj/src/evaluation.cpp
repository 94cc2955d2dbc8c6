// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "specklesim/error.hpp"

namespace specklesim {
namespace {

std::string fmt(const std::optional<double>& v, const char* missing) {
  if (!v) return missing;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

bool counts_for_metrics(const CorrelationCurves& curves, std::size_t t) {
  if (curves.mode() == ReferenceMode::es) return t != curves.reference_frame();
  return t != 0;
}

double curve_mae(const CorrelationCurves& real, const CorrelationCurves& sim) {
  if (!real.same_shape(sim)) throw Error(ErrorKind::metric, "curve_mae", "curve shapes differ");
  if (real.mode() != sim.mode() || real.reference_frame() != sim.reference_frame()) {
    throw Error(ErrorKind::metric, "curve_mae", "curves use different reference modes");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < real.frames(); ++t) {
    if (!counts_for_metrics(real, t)) continue;
    for (std::size_t i = 0; i < real.longitudinal(); ++i) {
      for (std::size_t j = 0; j < real.radial(); ++j) {
        if (!real.valid(t, i, j) || !sim.valid(t, i, j)) continue;
        sum += std::abs(real.value(t, i, j) - sim.value(t, i, j));
        ++n;
      }
    }
  }
  if (n == 0) throw Error(ErrorKind::metric, "curve_mae", "no common valid entries");
  return sum / static_cast<double>(n);
}

double average_correlation(const CorrelationCurves& curves) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < curves.frames(); ++t) {
    if (!counts_for_metrics(curves, t)) continue;
    for (std::size_t i = 0; i < curves.longitudinal(); ++i) {
      for (std::size_t j = 0; j < curves.radial(); ++j) {
        if (!curves.valid(t, i, j)) continue;
        sum += curves.value(t, i, j);
        ++n;
      }
    }
  }
  if (n == 0) throw Error(ErrorKind::metric, "average_correlation", "no valid entries");
  return sum / static_cast<double>(n);
}

std::vector<ReportRow> report(const CorrelationCurves& real_es, const std::optional<CorrelationCurves>& real_f2f,
                              const std::vector<RunCurves>& runs) {
  std::vector<ReportRow> rows;
  ReportRow real{"REAL", std::nullopt, std::nullopt, average_correlation(real_es), std::nullopt};
  if (real_f2f) real.f2f_average = average_correlation(*real_f2f);
  rows.push_back(real);
  for (const auto& run : runs) {
    ReportRow row{run.label, std::nullopt, std::nullopt, average_correlation(run.es), std::nullopt};
    try {
      row.es_mae = curve_mae(real_es, run.es);
    } catch (const Error& e) {
      throw Error(e.kind(), "report", "real ES curves vs " + run.label + ": " + e.what());
    }
    if (run.f2f) {
      row.f2f_average = average_correlation(*run.f2f);
      if (real_f2f) {
        try {
          row.f2f_mae = curve_mae(*real_f2f, *run.f2f);
        } catch (const Error& e) {
          throw Error(e.kind(), "report", "real f2f curves vs " + run.label + ": " + e.what());
        }
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "simulation_type,f2f_average_corr,f2f_mae,es_average_corr,es_mae\n";
  for (const auto& r : rows) {
    out << r.label << ',' << fmt(r.f2f_average, "") << ',' << fmt(r.f2f_mae, "") << ','
        << fmt(r.es_average, "") << ',' << fmt(r.es_mae, "") << '\n';
  }
  return out.str();
}

std::string report_markdown(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "| Simulation type | F2F average corr. | F2F MAE | ES average corr. | ES MAE |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << r.label << " | " << fmt(r.f2f_average, "--") << " | " << fmt(r.f2f_mae, "--") << " | "
        << fmt(r.es_average, "--") << " | " << fmt(r.es_mae, "--") << " |\n";
  }
  return out.str();
}

void write_report(const std::filesystem::path& dir, const std::vector<ReportRow>& rows) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "write_report", "cannot create " + dir.string());
  std::ofstream csv(dir / "report.csv", std::ios::trunc);
  std::ofstream md(dir / "report.md", std::ios::trunc);
  if (!csv || !md) throw Error(ErrorKind::io, "write_report", "cannot write report files in " + dir.string());
  csv << report_csv(rows);
  md << report_markdown(rows);
}

}  // namespace specklesim
