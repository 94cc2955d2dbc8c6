// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "specklesim/tensor.hpp"

namespace specklesim {

// Image-plane point in pixel units: x is lateral (column), z is depth (row).
struct Point2 {
  double x = 0.0;
  double z = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.z + b.z}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.z - b.z}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.z}; }
  friend bool operator==(Point2, Point2) = default;
};

double distance(Point2 a, Point2 b);

// Corners in order (u,v) = (0,0), (1,0), (1,1), (0,1).
using Quad = std::array<Point2, 4>;

struct LocalCoord {
  double u = 0.0;
  double v = 0.0;
};

Point2 forward_bilinear(const Quad& cell, LocalCoord uv);

// Newton solve of forward_bilinear(cell, uv) = p starting at (0.5, 0.5).
// No containment check, so points outside the cell give extrapolated
// coordinates. Empty if Newton does not reach 1e-9 px within 20 steps.
std::optional<LocalCoord> solve_bilinear(const Quad& cell, Point2 p);

// As solve_bilinear, but throws a containment error when p is outside the
// cell (beyond a 1e-9 tolerance on u, v) or Newton fails.
LocalCoord inverse_bilinear(const Quad& cell, Point2 p);

double signed_area(const Quad& cell);
double polygon_area(std::span<const Point2> polygon);
bool polygon_contains(std::span<const Point2> polygon, Point2 p);

// T x l x r grid of myocardial points. Index i runs longitudinally, j radially.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::size_t frames, std::size_t longitudinal, std::size_t radial, std::vector<Point2> points);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t longitudinal() const noexcept { return longitudinal_; }
  std::size_t radial() const noexcept { return radial_; }
  std::size_t points_per_frame() const noexcept { return longitudinal_ * radial_; }

  const Point2& point(std::size_t t, std::size_t i, std::size_t j) const {
    return points_[(t * longitudinal_ + i) * radial_ + j];
  }
  std::span<const Point2> points() const noexcept { return points_; }

  // Cells are indexed c = i * (r - 1) + j for i < l - 1, j < r - 1.
  std::size_t cell_count() const noexcept { return (longitudinal_ - 1) * (radial_ - 1); }
  Quad cell(std::size_t t, std::size_t c) const;

  // Perimeter: j = 0 edge, end cap, j = r-1 edge reversed, start cap.
  std::vector<Point2> boundary(std::size_t t) const;

  // Throws a geometry error if any cell at any frame has zero area or an
  // orientation different from the rest of the mesh.
  void validate_cells() const;

  bool cell_degenerate(std::size_t t, std::size_t c) const;

 private:
  std::size_t frames_ = 0;
  std::size_t longitudinal_ = 0;
  std::size_t radial_ = 0;
  std::vector<Point2> points_;
  double orientation_ = 1.0;
};

// Pixels whose centers are strictly inside the frame-t boundary polygon.
// Throws a geometry error if the boundary self-intersects.
Mask mask_from_mesh(const Mesh& mesh, std::size_t t, std::size_t height, std::size_t width);

// Where a point sits in the mesh at a given frame.
struct CellCoord {
  std::size_t cell = 0;
  LocalCoord uv;
};

// Containing cell at frame t, if any.
std::optional<CellCoord> locate_in_mesh(const Mesh& mesh, std::size_t t, Point2 p);

// Containing cell, or else the cell with the nearest centroid and
// extrapolated local coordinates. Used for points in the falloff band just
// outside the myocardium that still need to follow its motion.
CellCoord attach_to_mesh(const Mesh& mesh, std::size_t t, Point2 p);

Point2 position_in_mesh(const Mesh& mesh, std::size_t t, const CellCoord& where);

// JSON {"T","l","r","points": [x,z,...]} with order (t, i, j, [x,z]).
Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const std::filesystem::path& path, const Mesh& mesh);

}  // namespace specklesim
