// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "specklesim/error.hpp"

namespace specklesim {
namespace {

constexpr double kFlatTolerance = 1e-10;

struct Buffer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
};

Buffer copy_region(PlaneView plane, std::size_t z0, std::size_t x0, std::size_t rows, std::size_t cols) {
  Buffer b{rows, cols, std::vector<double>(rows * cols)};
  for (std::size_t r = 0; r < rows; ++r) {
    const float* src = plane.data + (z0 + r) * plane.stride + x0;
    std::copy(src, src + cols, b.data.begin() + static_cast<long>(r * cols));
  }
  return b;
}

// Calls emit(dy, dx, ncc) for every placement of `ref` inside `search`.
template <typename Emit>
void scan_ncc(const Buffer& ref, const Buffer& search, Emit&& emit) {
  const std::size_t n = ref.rows * ref.cols;
  double mean = 0.0;
  for (double v : ref.data) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centered(ref.data.size());
  double ref_ss = 0.0, ref_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    centered[k] = ref.data[k] - mean;
    ref_ss += centered[k] * centered[k];
    ref_sq += ref.data[k] * ref.data[k];
  }
  const bool ref_flat = ref_ss <= kFlatTolerance * std::max(ref_sq, 1e-300);

  // Integral images of the search region for patch sums and squared sums.
  const std::size_t sr = search.rows, sc = search.cols;
  std::vector<double> sum((sr + 1) * (sc + 1), 0.0), sq((sr + 1) * (sc + 1), 0.0);
  for (std::size_t r = 0; r < sr; ++r) {
    double row_sum = 0.0, row_sq = 0.0;
    for (std::size_t c = 0; c < sc; ++c) {
      const double v = search.data[r * sc + c];
      row_sum += v;
      row_sq += v * v;
      sum[(r + 1) * (sc + 1) + c + 1] = sum[r * (sc + 1) + c + 1] + row_sum;
      sq[(r + 1) * (sc + 1) + c + 1] = sq[r * (sc + 1) + c + 1] + row_sq;
    }
  }
  auto box = [sc](const std::vector<double>& ii, std::size_t r0, std::size_t c0, std::size_t r1,
                  std::size_t c1) {
    return ii[r1 * (sc + 1) + c1] - ii[r0 * (sc + 1) + c1] - ii[r1 * (sc + 1) + c0] + ii[r0 * (sc + 1) + c0];
  };

  const std::size_t out_rows = sr - ref.rows + 1, out_cols = sc - ref.cols + 1;
  for (std::size_t dy = 0; dy < out_rows; ++dy) {
    for (std::size_t dx = 0; dx < out_cols; ++dx) {
      if (ref_flat) {
        emit(dy, dx, 0.0);
        continue;
      }
      const double s = box(sum, dy, dx, dy + ref.rows, dx + ref.cols);
      const double s2 = box(sq, dy, dx, dy + ref.rows, dx + ref.cols);
      const double patch_ss = s2 - s * s / static_cast<double>(n);
      if (patch_ss <= kFlatTolerance * std::max(s2, 1e-300)) {
        emit(dy, dx, 0.0);
        continue;
      }
      double num = 0.0;
      for (std::size_t a = 0; a < ref.rows; ++a) {
        const double* rrow = centered.data() + a * ref.cols;
        const double* srow = search.data.data() + (dy + a) * sc + dx;
        for (std::size_t b = 0; b < ref.cols; ++b) num += rrow[b] * srow[b];
      }
      emit(dy, dx, std::clamp(num / std::sqrt(ref_ss * patch_ss), -1.0, 1.0));
    }
  }
}

long nearest_index(double coord) { return std::lround(coord); }

}  // namespace

const char* to_string(ReferenceMode mode) {
  return mode == ReferenceMode::es ? "es" : "f2f";
}

void CorrelationParams::validate() const {
  if (window <= 0 || window % 2 == 0) throw Error(ErrorKind::usage, "correlation", "window must be odd");
  if (search_halfwidth < 0) throw Error(ErrorKind::usage, "correlation", "search halfwidth must be >= 0");
  if (min_window <= 0 || min_window > window) {
    throw Error(ErrorKind::usage, "correlation", "min_window must lie in [1, window]");
  }
}

CorrelationCurves::CorrelationCurves(std::size_t frames, std::size_t longitudinal, std::size_t radial,
                                     ReferenceMode mode, std::size_t reference_frame, CorrelationParams params)
    : frames_(frames),
      longitudinal_(longitudinal),
      radial_(radial),
      mode_(mode),
      reference_frame_(reference_frame),
      params_(params),
      values_(frames * longitudinal * radial, 0.0),
      valid_(frames * longitudinal * radial, 0) {}

Image<double> ncc_matrix(PlaneView reference, PlaneView search) {
  if (reference.height == 0 || reference.width == 0 || search.height < reference.height ||
      search.width < reference.width) {
    throw Error(ErrorKind::usage, "ncc_matrix", "search region must be at least as large as the reference");
  }
  const Buffer ref = copy_region(reference, 0, 0, reference.height, reference.width);
  const Buffer srch = copy_region(search, 0, 0, search.height, search.width);
  Image<double> out(search.height - reference.height + 1, search.width - reference.width + 1);
  scan_ncc(ref, srch, [&](std::size_t dy, std::size_t dx, double v) { out.at(dy, dx) = v; });
  return out;
}

PointCorrelation point_correlation(const VideoTensor& video, std::size_t ref_frame, Point2 ref_point,
                                   std::size_t t, Point2 point, const CorrelationParams& params) {
  const long H = static_cast<long>(video.height());
  const long W = static_cast<long>(video.width());
  const long rz = nearest_index(ref_point.z), rx = nearest_index(ref_point.x);
  const long cz = nearest_index(point.z), cx = nearest_index(point.x);
  if (rz < 0 || rx < 0 || rz >= H || rx >= W) return {};

  const long k = params.window / 2;
  const long hz = std::min({k, rz, H - 1 - rz});
  const long hx = std::min({k, rx, W - 1 - rx});
  if (2 * hz + 1 < params.min_window || 2 * hx + 1 < params.min_window) return {};

  // Offsets keeping the whole cropped window inside the target frame.
  const long s = params.search_halfwidth;
  const long dz_lo = std::max(-s, hz - cz), dz_hi = std::min(s, H - 1 - hz - cz);
  const long dx_lo = std::max(-s, hx - cx), dx_hi = std::min(s, W - 1 - hx - cx);
  if (dz_lo > dz_hi || dx_lo > dx_hi) return {};

  const Buffer ref = copy_region(video.view(ref_frame), static_cast<std::size_t>(rz - hz),
                                 static_cast<std::size_t>(rx - hx), static_cast<std::size_t>(2 * hz + 1),
                                 static_cast<std::size_t>(2 * hx + 1));
  const Buffer search =
      copy_region(video.view(t), static_cast<std::size_t>(cz + dz_lo - hz), static_cast<std::size_t>(cx + dx_lo - hx),
                  static_cast<std::size_t>(dz_hi - dz_lo + 2 * hz + 1),
                  static_cast<std::size_t>(dx_hi - dx_lo + 2 * hx + 1));
  double best = -std::numeric_limits<double>::infinity();
  scan_ncc(ref, search, [&](std::size_t, std::size_t, double v) { best = std::max(best, v); });
  return {best, true};
}

CorrelationCurves measure_curves(const VideoTensor& video, const Mesh& mesh, ReferenceMode mode,
                                 const CorrelationParams& params) {
  params.validate();
  if (video.frames() != mesh.frames()) {
    throw Error(ErrorKind::format, "measure_curves",
                "video has " + std::to_string(video.frames()) + " frames, mesh has " +
                    std::to_string(mesh.frames()));
  }
  const std::size_t es = video.metadata().es_index;
  if (es >= video.frames()) throw Error(ErrorKind::metadata, "measure_curves", "es_index out of range");
  const std::size_t T = mesh.frames(), L = mesh.longitudinal(), R = mesh.radial();
  CorrelationCurves curves(T, L, R, mode, mode == ReferenceMode::es ? es : 0, params);

  const long total = static_cast<long>(T * L * R);
#pragma omp parallel for schedule(dynamic, 8)
  for (long k = 0; k < total; ++k) {
    const std::size_t t = static_cast<std::size_t>(k) / (L * R);
    const std::size_t i = (static_cast<std::size_t>(k) / R) % L;
    const std::size_t j = static_cast<std::size_t>(k) % R;
    if (mode == ReferenceMode::previous_frame && t == 0) {
      curves.set(t, i, j, 1.0, true);
      continue;
    }
    const std::size_t ref_t = mode == ReferenceMode::es ? es : t - 1;
    const auto pc = point_correlation(video, ref_t, mesh.point(ref_t, i, j), t, mesh.point(t, i, j), params);
    curves.set(t, i, j, pc.value, pc.valid);
  }
  return curves;
}

void write_curves_csv(const std::filesystem::path& path, const CorrelationCurves& curves) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "write_curves", "cannot write " + path.string());
  out << "t,i,j,value,valid\n";
  char buf[64];
  for (std::size_t t = 0; t < curves.frames(); ++t) {
    for (std::size_t i = 0; i < curves.longitudinal(); ++i) {
      for (std::size_t j = 0; j < curves.radial(); ++j) {
        std::snprintf(buf, sizeof buf, "%.6g", curves.value(t, i, j));
        out << t << ',' << i << ',' << j << ',' << buf << ',' << (curves.valid(t, i, j) ? 1 : 0) << '\n';
      }
    }
  }
}

CorrelationCurves read_curves_csv(const std::filesystem::path& path, ReferenceMode mode,
                                  std::size_t reference_frame) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "read_curves", "cannot open curves file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,i,j,value,valid", 0) != 0) {
    throw Error(ErrorKind::format, "read_curves", "missing header in " + path.string());
  }
  struct Row {
    std::size_t t, i, j;
    double value;
    bool valid;
  };
  std::vector<Row> rows;
  std::size_t T = 0, L = 0, R = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream ss(line);
    std::string field[5];
    for (auto& f : field) std::getline(ss, f, ',');
    try {
      Row row{std::stoul(field[0]), std::stoul(field[1]), std::stoul(field[2]), std::stod(field[3]),
              std::stoi(field[4]) != 0};
      T = std::max(T, row.t + 1);
      L = std::max(L, row.i + 1);
      R = std::max(R, row.j + 1);
      rows.push_back(row);
    } catch (const std::exception&) {
      throw Error(ErrorKind::format, "read_curves",
                  path.string() + " line " + std::to_string(line_no) + " is malformed");
    }
  }
  if (rows.size() != T * L * R || rows.empty()) {
    throw Error(ErrorKind::format, "read_curves", path.string() + " does not hold a full T x l x r grid");
  }
  CorrelationCurves curves(T, L, R, mode, reference_frame);
  std::vector<std::uint8_t> seen(T * L * R, 0);
  for (const auto& row : rows) {
    const auto idx = curves.index(row.t, row.i, row.j);
    if (seen[idx]) throw Error(ErrorKind::format, "read_curves", path.string() + " has duplicate entries");
    seen[idx] = 1;
    curves.set(row.t, row.i, row.j, row.value, row.valid);
  }
  return curves;
}

}  // namespace specklesim
