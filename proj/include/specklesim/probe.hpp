// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "specklesim/mesh.hpp"
#include "specklesim/tensor.hpp"

namespace specklesim {

// Imaging sector. Angles are measured from the depth axis (+z), positive
// towards +x. Apex is in pixels, depths in mm.
struct SectorGeometry {
  Point2 apex;
  double angle_min = -0.785398163397448;  // -45 deg
  double angle_max = 0.785398163397448;
  double depth_min_mm = 0.0;
  double depth_max_mm = 0.0;

  void validate() const;
  bool contains(Point2 p, PixelSpacing spacing) const;
  double area_mm2() const;

  struct Box {
    double x_min, x_max, z_min, z_max;
  };
  Box bounding_box(PixelSpacing spacing) const;

  // Apex at the top center, +/-45 deg, depth reaching the bottom edge.
  static SectorGeometry covering(std::size_t height, std::size_t width, PixelSpacing spacing);
};

struct ProbeConfig {
  double center_frequency_hz = 3.5e6;
  double speed_of_sound = 1540.0;
  double scatterer_density = 5.0;  // per square wavelength
  // Unset means derived from the wavelength: axial = lambda, lateral = 2 lambda.
  std::optional<double> psf_sigma_axial_mm;
  std::optional<double> psf_sigma_lateral_mm;
  double dynamic_range_db = 40.0;
  double gamma = 2.0;

  double wavelength_mm() const { return 1e3 * speed_of_sound / center_frequency_hz; }
  double sigma_axial_mm() const { return psf_sigma_axial_mm.value_or(wavelength_mm()); }
  double sigma_lateral_mm() const { return psf_sigma_lateral_mm.value_or(2.0 * wavelength_mm()); }

  void validate() const;
};

}  // namespace specklesim
