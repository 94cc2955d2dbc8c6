// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specklesim/error.hpp"
#include "specklesim/probe.hpp"

namespace specklesim {

void SectorGeometry::validate() const {
  if (!(angle_min < angle_max)) throw Error(ErrorKind::usage, "sector", "angle_min must be < angle_max");
  if (!(depth_min_mm < depth_max_mm) || depth_min_mm < 0) {
    throw Error(ErrorKind::usage, "sector", "need 0 <= depth_min < depth_max");
  }
  if (angle_max - angle_min > 2 * std::numbers::pi) {
    throw Error(ErrorKind::usage, "sector", "angular span exceeds a full turn");
  }
}

bool SectorGeometry::contains(Point2 p, PixelSpacing spacing) const {
  const double dx = (p.x - apex.x) * spacing.lateral_mm;
  const double dz = (p.z - apex.z) * spacing.axial_mm;
  const double r = std::hypot(dx, dz);
  if (r < depth_min_mm || r > depth_max_mm) return false;
  const double theta = std::atan2(dx, dz);
  return theta >= angle_min && theta <= angle_max;
}

double SectorGeometry::area_mm2() const {
  return 0.5 * (angle_max - angle_min) * (depth_max_mm * depth_max_mm - depth_min_mm * depth_min_mm);
}

SectorGeometry::Box SectorGeometry::bounding_box(PixelSpacing spacing) const {
  // Extremes lie on the two edge rays or where the arcs cross an axis.
  std::vector<double> angles = {angle_min, angle_max};
  for (int k = -4; k <= 4; ++k) {
    const double a = k * std::numbers::pi / 2;
    if (a > angle_min && a < angle_max) angles.push_back(a);
  }
  Box box{apex.x, apex.x, apex.z, apex.z};
  for (double a : angles) {
    for (double r : {depth_min_mm, depth_max_mm}) {
      const double x = apex.x + r * std::sin(a) / spacing.lateral_mm;
      const double z = apex.z + r * std::cos(a) / spacing.axial_mm;
      box.x_min = std::min(box.x_min, x);
      box.x_max = std::max(box.x_max, x);
      box.z_min = std::min(box.z_min, z);
      box.z_max = std::max(box.z_max, z);
    }
  }
  return box;
}

SectorGeometry SectorGeometry::covering(std::size_t height, std::size_t width, PixelSpacing spacing) {
  SectorGeometry s;
  s.apex = {0.5 * static_cast<double>(width - 1), 0.0};
  s.depth_min_mm = 0.0;
  s.depth_max_mm = static_cast<double>(height) * spacing.axial_mm;
  return s;
}

void ProbeConfig::validate() const {
  if (!(center_frequency_hz > 0) || !(speed_of_sound > 0)) {
    throw Error(ErrorKind::usage, "probe", "frequency and speed of sound must be positive");
  }
  if (!(scatterer_density > 0)) throw Error(ErrorKind::usage, "probe", "scatterer density must be positive");
  if (!(sigma_axial_mm() > 0) || !(sigma_lateral_mm() > 0)) {
    throw Error(ErrorKind::usage, "probe", "PSF sigmas must be positive");
  }
  if (!(dynamic_range_db > 0)) throw Error(ErrorKind::usage, "probe", "dynamic range must be positive");
  if (!(gamma > 0)) throw Error(ErrorKind::usage, "probe", "gamma must be positive");
}

}  // namespace specklesim
