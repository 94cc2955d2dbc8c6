// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "specklesim/mesh.hpp"
#include "specklesim/tensor.hpp"

namespace specklesim {

enum class PhantomMotion { still, translate, contract };

PhantomMotion parse_motion(std::string_view name);
const char* to_string(PhantomMotion motion);

// Fraction of texture pixels redrawn at each frame step away from ES.
//   none              no redraw
//   const:q           q everywhere
//   ramp:q0:q1        linear in time from q0 (first step) to q1 (last step)
//   spatial:q0:q1     linear along the band, q0 at its start and q1 at its end
struct DecorrelationProfile {
  enum class Shape { constant, ramp, spatial };
  Shape shape = Shape::constant;
  double start = 0.0;
  double end = 0.0;

  static DecorrelationProfile parse(std::string_view text);
  std::string to_string() const;

  // `s` in [0,1] is the longitudinal position. Zero at the ES frame.
  double redraw_fraction(std::size_t t, double s, std::size_t frames, std::size_t es_index) const;
};

// Annular C-shaped band (opening at the bottom) filled with i.i.d. uniform
// texture, surrounded by an independent uniform background.
struct PhantomSpec {
  std::size_t height = 128;
  std::size_t width = 128;
  std::size_t frames = 16;
  std::size_t longitudinal = 36;
  std::size_t radial = 5;
  PhantomMotion motion = PhantomMotion::still;
  DecorrelationProfile profile;
  PixelSpacing spacing{0.3, 0.3};
  std::size_t es_index = 0;
  double fps = 30.0;
  Point2 translation_per_frame{0.5, 0.25};  // px / frame
  double contraction = 0.15;                 // peak relative radius change
  double inner_radius = 0.12;                // fraction of min(H, W)
  double outer_radius = 0.4;
  double half_span_rad = 2.617993877991494;  // 150 deg each side of the top

  void validate() const;
};

struct Phantom {
  VideoTensor video;
  Mesh mesh;
};

Phantom synth_phantom(const PhantomSpec& spec, std::uint64_t seed);

// Rows "t,i,redraw_fraction" sampling the profile at each longitudinal mesh index.
void write_profile_csv(const std::filesystem::path& path, const PhantomSpec& spec);

}  // namespace specklesim
