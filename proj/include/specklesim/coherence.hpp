// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "specklesim/correlation.hpp"
#include "specklesim/mesh.hpp"
#include "specklesim/tensor.hpp"

namespace specklesim {

enum class CoherenceKind { static_map, dynamic_map };

// T x H x W field in [0,1] setting the balance between scatterers that
// follow the myocardium and scatterers that are redrawn every frame.
class CoherenceMap {
 public:
  CoherenceMap() = default;
  CoherenceMap(std::size_t frames, std::size_t height, std::size_t width, CoherenceKind kind)
      : frames_(frames), height_(height), width_(width), kind_(kind), values_(frames * height * width, 0.0f) {}

  std::size_t frames() const noexcept { return frames_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  CoherenceKind kind() const noexcept { return kind_; }

  float& at(std::size_t t, std::size_t z, std::size_t x) { return values_[(t * height_ + z) * width_ + x]; }
  float at(std::size_t t, std::size_t z, std::size_t x) const { return values_[(t * height_ + z) * width_ + x]; }

  // Nearest-pixel lookup; 0 outside the image.
  float sample(std::size_t t, Point2 p) const;

  std::span<const float> values() const noexcept { return values_; }

  // T x H x W tensor for inspection as .t32.
  RawTensor to_raw() const;

 private:
  std::size_t frames_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  CoherenceKind kind_ = CoherenceKind::static_map;
  std::vector<float> values_;
};

inline constexpr double kDefaultFalloffPx = 10.0;

// Pixels outside `mask` take origin * max(0, 1 - d / falloff_px), where d is
// the distance to the nearest mask pixel and origin is that pixel's value in
// `inside`. Mask pixels are copied from `inside`.
Image<float> apply_falloff(const Mask& mask, const Image<float>& inside, double falloff_px);

// p on the frame's mesh mask with a linear ramp to 0 over falloff_px.
CoherenceMap static_map(const Mesh& mesh, double p, double falloff_px, std::size_t height, std::size_t width);

// Mesh-point curve values (clamped to [0,1]) bilinearly interpolated over the
// mask of each frame, with the same falloff starting from the edge values.
CoherenceMap dynamic_map(const CorrelationCurves& curves, const Mesh& mesh, double falloff_px,
                         std::size_t height, std::size_t width);

}  // namespace specklesim
