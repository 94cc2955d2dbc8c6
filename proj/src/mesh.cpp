// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "specklesim/error.hpp"

namespace specklesim {
namespace {

constexpr double kUvTolerance = 1e-9;
constexpr double kResidualTolerance = 1e-10;
constexpr int kMaxNewtonSteps = 20;

double cross(Point2 a, Point2 b) { return a.x * b.z - a.z * b.x; }

// Proper or touching intersection of closed segments ab and cd.
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](Point2 p, Point2 q, Point2 r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.z, q.z) <= r.z &&
           r.z <= std::max(p.z, q.z);
  };
  if (d1 == 0 && on_segment(a, b, c)) return true;
  if (d2 == 0 && on_segment(a, b, d)) return true;
  if (d3 == 0 && on_segment(c, d, a)) return true;
  if (d4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool self_intersects(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 2; b < n; ++b) {
      if (a == 0 && b == n - 1) continue;  // closing edge shares vertex 0
      if (segments_intersect(poly[a], poly[(a + 1) % n], poly[b], poly[(b + 1) % n])) return true;
    }
  }
  return false;
}

}  // namespace

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.z - b.z); }

Point2 forward_bilinear(const Quad& q, LocalCoord uv) {
  const double u = uv.u, v = uv.v;
  const double w0 = (1 - u) * (1 - v), w1 = u * (1 - v), w2 = u * v, w3 = (1 - u) * v;
  return {w0 * q[0].x + w1 * q[1].x + w2 * q[2].x + w3 * q[3].x,
          w0 * q[0].z + w1 * q[1].z + w2 * q[2].z + w3 * q[3].z};
}

std::optional<LocalCoord> solve_bilinear(const Quad& q, Point2 p) {
  // P(u,v) = a + b u + c v + d u v
  const Point2 b = q[1] - q[0];
  const Point2 c = q[3] - q[0];
  const Point2 d = (q[0] - q[1]) + (q[2] - q[3]);
  LocalCoord uv{0.5, 0.5};
  for (int step = 0; step <= kMaxNewtonSteps; ++step) {
    const Point2 r = forward_bilinear(q, uv) - p;
    if (std::hypot(r.x, r.z) < kResidualTolerance) return uv;
    if (step == kMaxNewtonSteps) break;
    const Point2 du = b + uv.v * d;
    const Point2 dv = c + uv.u * d;
    const double det = cross(du, dv);
    if (std::abs(det) < 1e-14) return std::nullopt;
    uv.u -= (r.x * dv.z - r.z * dv.x) / det;
    uv.v -= (du.x * r.z - du.z * r.x) / det;
    if (!std::isfinite(uv.u) || !std::isfinite(uv.v)) return std::nullopt;
  }
  const Point2 r = forward_bilinear(q, uv) - p;
  if (std::hypot(r.x, r.z) < 1e-7) return uv;
  return std::nullopt;
}

LocalCoord inverse_bilinear(const Quad& cell, Point2 p) {
  auto uv = solve_bilinear(cell, p);
  if (!uv) throw Error(ErrorKind::containment, "inverse_bilinear", "Newton iteration did not converge");
  if (uv->u < -kUvTolerance || uv->u > 1 + kUvTolerance || uv->v < -kUvTolerance ||
      uv->v > 1 + kUvTolerance) {
    throw Error(ErrorKind::containment, "inverse_bilinear", "point outside cell");
  }
  return {std::clamp(uv->u, 0.0, 1.0), std::clamp(uv->v, 0.0, 1.0)};
}

double signed_area(const Quad& q) { return polygon_area(q); }

double polygon_area(std::span<const Point2> poly) {
  double s = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) s += cross(poly[k], poly[(k + 1) % poly.size()]);
  return 0.5 * s;
}

bool polygon_contains(std::span<const Point2> poly, Point2 p) {
  bool inside = false;
  for (std::size_t k = 0, m = poly.size() - 1; k < poly.size(); m = k++) {
    const Point2 a = poly[k], b = poly[m];
    if ((a.z > p.z) != (b.z > p.z)) {
      const double x = a.x + (p.z - a.z) * (b.x - a.x) / (b.z - a.z);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

Mesh::Mesh(std::size_t frames, std::size_t longitudinal, std::size_t radial, std::vector<Point2> points)
    : frames_(frames), longitudinal_(longitudinal), radial_(radial), points_(std::move(points)) {
  if (frames_ == 0) throw Error(ErrorKind::geometry, "mesh", "mesh has no frames");
  if (longitudinal_ < 2 || radial_ < 2) {
    throw Error(ErrorKind::geometry, "mesh", "need l >= 2 and r >= 2");
  }
  if (points_.size() != frames_ * longitudinal_ * radial_) {
    throw Error(ErrorKind::format, "mesh",
                "expected " + std::to_string(frames_ * longitudinal_ * radial_) + " points, got " +
                    std::to_string(points_.size()));
  }
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.z)) {
      throw Error(ErrorKind::format, "mesh", "non-finite mesh coordinate");
    }
  }
  double total = 0.0;
  for (std::size_t c = 0; c < cell_count(); ++c) total += signed_area(cell(0, c));
  orientation_ = total < 0 ? -1.0 : 1.0;
}

Quad Mesh::cell(std::size_t t, std::size_t c) const {
  const std::size_t i = c / (radial_ - 1);
  const std::size_t j = c % (radial_ - 1);
  return {point(t, i, j), point(t, i + 1, j), point(t, i + 1, j + 1), point(t, i, j + 1)};
}

bool Mesh::cell_degenerate(std::size_t t, std::size_t c) const {
  return orientation_ * signed_area(cell(t, c)) <= 1e-12;
}

void Mesh::validate_cells() const {
  for (std::size_t t = 0; t < frames_; ++t) {
    for (std::size_t c = 0; c < cell_count(); ++c) {
      if (cell_degenerate(t, c)) {
        throw Error(ErrorKind::geometry, "mesh",
                    "degenerate cell " + std::to_string(c) + " at frame " + std::to_string(t));
      }
    }
  }
}

std::vector<Point2> Mesh::boundary(std::size_t t) const {
  std::vector<Point2> poly;
  poly.reserve(2 * (longitudinal_ + radial_));
  const std::size_t l = longitudinal_, r = radial_;
  for (std::size_t i = 0; i < l; ++i) poly.push_back(point(t, i, 0));
  for (std::size_t j = 1; j < r; ++j) poly.push_back(point(t, l - 1, j));
  for (std::size_t i = l - 1; i-- > 0;) poly.push_back(point(t, i, r - 1));
  for (std::size_t j = r - 1; j-- > 1;) poly.push_back(point(t, 0, j));
  return poly;
}

Mask mask_from_mesh(const Mesh& mesh, std::size_t t, std::size_t height, std::size_t width) {
  if (t >= mesh.frames()) throw Error(ErrorKind::usage, "mask_from_mesh", "frame out of range");
  const auto poly = mesh.boundary(t);
  if (self_intersects(poly)) {
    throw Error(ErrorKind::geometry, "mask_from_mesh",
                "mesh boundary self-intersects at frame " + std::to_string(t));
  }
  Mask mask(height, width, 0);
  std::vector<double> crossings;
  for (std::size_t z = 0; z < height; ++z) {
    const double zc = static_cast<double>(z);
    crossings.clear();
    for (std::size_t k = 0, m = poly.size() - 1; k < poly.size(); m = k++) {
      const Point2 a = poly[k], b = poly[m];
      if ((a.z > zc) != (b.z > zc)) crossings.push_back(a.x + (zc - a.z) * (b.x - a.x) / (b.z - a.z));
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const double lo = crossings[k], hi = crossings[k + 1];
      long x0 = static_cast<long>(std::floor(lo)) + 1;
      if (x0 < 0) x0 = 0;
      for (long x = x0; x < static_cast<long>(width) && static_cast<double>(x) < hi; ++x) {
        if (static_cast<double>(x) > lo) mask.at(z, static_cast<std::size_t>(x)) = 1;
      }
    }
  }
  return mask;
}

std::optional<CellCoord> locate_in_mesh(const Mesh& mesh, std::size_t t, Point2 p) {
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const Quad q = mesh.cell(t, c);
    double xmin = q[0].x, xmax = q[0].x, zmin = q[0].z, zmax = q[0].z;
    for (const auto& v : q) {
      xmin = std::min(xmin, v.x);
      xmax = std::max(xmax, v.x);
      zmin = std::min(zmin, v.z);
      zmax = std::max(zmax, v.z);
    }
    if (p.x < xmin - 1e-9 || p.x > xmax + 1e-9 || p.z < zmin - 1e-9 || p.z > zmax + 1e-9) continue;
    if (mesh.cell_degenerate(t, c)) continue;
    auto uv = solve_bilinear(q, p);
    if (uv && uv->u >= -kUvTolerance && uv->u <= 1 + kUvTolerance && uv->v >= -kUvTolerance &&
        uv->v <= 1 + kUvTolerance) {
      return CellCoord{c, *uv};
    }
  }
  return std::nullopt;
}

CellCoord attach_to_mesh(const Mesh& mesh, std::size_t t, Point2 p) {
  if (auto found = locate_in_mesh(mesh, t, p)) return *found;
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(mesh.cell_count());
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const Quad q = mesh.cell(t, c);
    const Point2 centroid = 0.25 * (q[0] + q[1] + q[2] + q[3]);
    order.emplace_back(distance(centroid, p), c);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [d, c] : order) {
    if (mesh.cell_degenerate(t, c)) continue;
    if (auto uv = solve_bilinear(mesh.cell(t, c), p)) return CellCoord{c, *uv};
  }
  throw Error(ErrorKind::containment, "attach_to_mesh", "no cell can represent the point");
}

Point2 position_in_mesh(const Mesh& mesh, std::size_t t, const CellCoord& where) {
  return forward_bilinear(mesh.cell(t, where.cell), where.uv);
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "load_mesh", "cannot open mesh file " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    const auto frames = j.at("T").get<std::size_t>();
    const auto l = j.at("l").get<std::size_t>();
    const auto r = j.at("r").get<std::size_t>();
    const auto& flat = j.at("points");
    if (!flat.is_array() || flat.size() != 2 * frames * l * r) {
      throw Error(ErrorKind::format, "load_mesh",
                  "points array must hold 2*T*l*r values in " + path.string());
    }
    std::vector<Point2> points(frames * l * r);
    for (std::size_t k = 0; k < points.size(); ++k) {
      points[k] = {flat[2 * k].get<double>(), flat[2 * k + 1].get<double>()};
    }
    return Mesh(frames, l, r, std::move(points));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, "load_mesh", path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.stage() == "load_mesh") throw;
    throw e.relabel("load_mesh");
  }
}

void save_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  nlohmann::json j;
  j["T"] = mesh.frames();
  j["l"] = mesh.longitudinal();
  j["r"] = mesh.radial();
  std::vector<double> flat;
  flat.reserve(2 * mesh.points().size());
  for (const auto& p : mesh.points()) {
    flat.push_back(p.x);
    flat.push_back(p.z);
  }
  j["points"] = std::move(flat);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "save_mesh", "cannot write " + path.string());
  out << j.dump() << '\n';
}

}  // namespace specklesim
