// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "specklesim/mesh.hpp"
#include "specklesim/tensor.hpp"

namespace specklesim {

enum class ReferenceMode { es, previous_frame };

const char* to_string(ReferenceMode mode);

struct CorrelationParams {
  int window = 25;            // odd
  int search_halfwidth = 12;  // search side = window + 2 * halfwidth
  int min_window = 9;         // smaller cropped windows are flagged invalid

  void validate() const;
};

// T x l x r correlation values with validity flags.
class CorrelationCurves {
 public:
  CorrelationCurves() = default;
  CorrelationCurves(std::size_t frames, std::size_t longitudinal, std::size_t radial, ReferenceMode mode,
                    std::size_t reference_frame, CorrelationParams params = {});

  std::size_t frames() const noexcept { return frames_; }
  std::size_t longitudinal() const noexcept { return longitudinal_; }
  std::size_t radial() const noexcept { return radial_; }
  std::size_t size() const noexcept { return values_.size(); }
  ReferenceMode mode() const noexcept { return mode_; }
  // es_index in ES mode; 0 (the frame defined as 1) in previous-frame mode.
  std::size_t reference_frame() const noexcept { return reference_frame_; }
  const CorrelationParams& params() const noexcept { return params_; }

  std::size_t index(std::size_t t, std::size_t i, std::size_t j) const {
    return (t * longitudinal_ + i) * radial_ + j;
  }
  double value(std::size_t t, std::size_t i, std::size_t j) const { return values_[index(t, i, j)]; }
  bool valid(std::size_t t, std::size_t i, std::size_t j) const { return valid_[index(t, i, j)] != 0; }
  void set(std::size_t t, std::size_t i, std::size_t j, double value, bool valid) {
    values_[index(t, i, j)] = value;
    valid_[index(t, i, j)] = valid ? 1 : 0;
  }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::uint8_t>& validity() const noexcept { return valid_; }
  std::vector<std::uint8_t>& validity() noexcept { return valid_; }

  bool same_shape(const CorrelationCurves& other) const {
    return frames_ == other.frames_ && longitudinal_ == other.longitudinal_ && radial_ == other.radial_;
  }

 private:
  std::size_t frames_ = 0;
  std::size_t longitudinal_ = 0;
  std::size_t radial_ = 0;
  ReferenceMode mode_ = ReferenceMode::es;
  std::size_t reference_frame_ = 0;
  CorrelationParams params_;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

// Zero-normalized cross-correlation of `reference` against every
// same-sized patch of `search`. Entry (dy, dx) is the patch whose top-left
// corner sits at (dy, dx). Patches or references without variance give 0.
Image<double> ncc_matrix(PlaneView reference, PlaneView search);

struct PointCorrelation {
  double value = 0.0;
  bool valid = false;
};

// Maximum NCC between the window around `ref_point` in `ref_frame` and the
// windows whose centers lie within +/- search_halfwidth of `point` in frame `t`.
// Windows that hit the image edge are cropped symmetrically; below
// min_window the result is invalid.
PointCorrelation point_correlation(const VideoTensor& video, std::size_t ref_frame, Point2 ref_point,
                                   std::size_t t, Point2 point, const CorrelationParams& params = {});

CorrelationCurves measure_curves(const VideoTensor& video, const Mesh& mesh, ReferenceMode mode,
                                 const CorrelationParams& params = {});

// CSV "t,i,j,value,valid", t-major then i then j, 6 significant digits.
void write_curves_csv(const std::filesystem::path& path, const CorrelationCurves& curves);
CorrelationCurves read_curves_csv(const std::filesystem::path& path, ReferenceMode mode,
                                  std::size_t reference_frame);

}  // namespace specklesim
