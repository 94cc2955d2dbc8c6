// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "specklesim/correlation.hpp"

namespace specklesim {

// Entries used by the metrics: valid in every given curve set and not the
// reference frame (ES frame in ES mode, t = 0 in frame-to-frame mode).
bool counts_for_metrics(const CorrelationCurves& curves, std::size_t t);

// Mean |real - sim| over common valid entries. Throws a metric error on
// shape or mode mismatch, or when nothing is left to average.
double curve_mae(const CorrelationCurves& real, const CorrelationCurves& sim);

double average_correlation(const CorrelationCurves& curves);

struct ReportRow {
  std::string label;
  std::optional<double> f2f_average;
  std::optional<double> f2f_mae;
  std::optional<double> es_average;
  std::optional<double> es_mae;
};

struct RunCurves {
  std::string label;
  CorrelationCurves es;
  std::optional<CorrelationCurves> f2f;
};

// One row per run in input order, preceded by a REAL row carrying the
// reference averages.
std::vector<ReportRow> report(const CorrelationCurves& real_es, const std::optional<CorrelationCurves>& real_f2f,
                              const std::vector<RunCurves>& runs);

std::string report_csv(const std::vector<ReportRow>& rows);
std::string report_markdown(const std::vector<ReportRow>& rows);
// report.csv and report.md
void write_report(const std::filesystem::path& dir, const std::vector<ReportRow>& rows);

}  // namespace specklesim
