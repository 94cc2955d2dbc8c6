// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specklesim/error.hpp"

namespace specklesim {

float CoherenceMap::sample(std::size_t t, Point2 p) const {
  const long z = std::lround(p.z), x = std::lround(p.x);
  if (z < 0 || x < 0 || z >= static_cast<long>(height_) || x >= static_cast<long>(width_)) return 0.0f;
  return at(t, static_cast<std::size_t>(z), static_cast<std::size_t>(x));
}

RawTensor CoherenceMap::to_raw() const {
  RawTensor raw;
  raw.dims = {static_cast<std::uint32_t>(frames_), static_cast<std::uint32_t>(height_),
              static_cast<std::uint32_t>(width_)};
  raw.data = values_;
  return raw;
}

Image<float> apply_falloff(const Mask& mask, const Image<float>& inside, double falloff_px) {
  const std::size_t H = mask.height(), W = mask.width();
  Image<float> out(H, W, 0.0f);
  for (std::size_t z = 0; z < H; ++z) {
    for (std::size_t x = 0; x < W; ++x) {
      if (mask.at(z, x)) out.at(z, x) = inside.at(z, x);
    }
  }
  if (falloff_px <= 0.0) return out;

  // The nearest mask pixel of any outside pixel is an edge pixel, so stamping
  // a disc around each edge pixel finds it.
  Image<double> best(H, W, std::numeric_limits<double>::infinity());
  const long reach = static_cast<long>(std::ceil(falloff_px));
  for (long z = 0; z < static_cast<long>(H); ++z) {
    for (long x = 0; x < static_cast<long>(W); ++x) {
      if (!mask.at(z, x)) continue;
      const bool edge = !mask.contains(z - 1, x) || !mask.contains(z + 1, x) || !mask.contains(z, x - 1) ||
                        !mask.contains(z, x + 1) || !mask.at(z - 1, x) || !mask.at(z + 1, x) ||
                        !mask.at(z, x - 1) || !mask.at(z, x + 1);
      if (!edge) continue;
      const float origin = inside.at(z, x);
      for (long zz = std::max(0L, z - reach); zz <= std::min<long>(H - 1, z + reach); ++zz) {
        for (long xx = std::max(0L, x - reach); xx <= std::min<long>(W - 1, x + reach); ++xx) {
          if (mask.at(zz, xx)) continue;
          const double d = std::hypot(static_cast<double>(zz - z), static_cast<double>(xx - x));
          if (d >= falloff_px || d >= best.at(zz, xx)) continue;
          best.at(zz, xx) = d;
          out.at(zz, xx) = static_cast<float>(origin * (1.0 - d / falloff_px));
        }
      }
    }
  }
  return out;
}

CoherenceMap static_map(const Mesh& mesh, double p, double falloff_px, std::size_t height, std::size_t width) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::usage, "static_map", "p must lie in [0,1]");
  if (!(falloff_px >= 0.0)) throw Error(ErrorKind::usage, "static_map", "falloff must be >= 0");
  CoherenceMap map(mesh.frames(), height, width, CoherenceKind::static_map);
  const Image<float> inside(height, width, static_cast<float>(p));
  for (std::size_t t = 0; t < mesh.frames(); ++t) {
    const Image<float> frame = apply_falloff(mask_from_mesh(mesh, t, height, width), inside, falloff_px);
    std::copy(frame.data().begin(), frame.data().end(), &map.at(t, 0, 0));
  }
  return map;
}

namespace {

// Curve values for one frame, clamped to [0,1], with invalid entries
// replaced by the nearest valid mesh point in the same frame.
std::vector<double> usable_values(const CorrelationCurves& curves, const Mesh& mesh, std::size_t t) {
  const std::size_t L = curves.longitudinal(), R = curves.radial();
  std::vector<double> v(L * R, 0.0);
  std::vector<std::size_t> valid;
  for (std::size_t k = 0; k < L * R; ++k) {
    if (curves.valid(t, k / R, k % R)) valid.push_back(k);
  }
  for (std::size_t k = 0; k < L * R; ++k) {
    std::size_t src = k;
    if (!curves.valid(t, k / R, k % R)) {
      if (valid.empty()) continue;  // whole frame unusable: stays 0
      double best = std::numeric_limits<double>::infinity();
      for (auto c : valid) {
        const double d = distance(mesh.point(t, c / R, c % R), mesh.point(t, k / R, k % R));
        if (d < best) {
          best = d;
          src = c;
        }
      }
    }
    v[k] = std::clamp(curves.value(t, src / R, src % R), 0.0, 1.0);
  }
  return v;
}

}  // namespace

CoherenceMap dynamic_map(const CorrelationCurves& curves, const Mesh& mesh, double falloff_px,
                         std::size_t height, std::size_t width) {
  if (curves.frames() != mesh.frames() || curves.longitudinal() != mesh.longitudinal() ||
      curves.radial() != mesh.radial()) {
    throw Error(ErrorKind::format, "dynamic_map", "curves and mesh dimensions differ");
  }
  if (!(falloff_px >= 0.0)) throw Error(ErrorKind::usage, "dynamic_map", "falloff must be >= 0");
  const std::size_t T = mesh.frames(), R = mesh.radial();
  CoherenceMap map(T, height, width, CoherenceKind::dynamic_map);
  std::vector<Mask> masks(T);
  for (std::size_t t = 0; t < T; ++t) masks[t] = mask_from_mesh(mesh, t, height, width);

#pragma omp parallel for schedule(dynamic)
  for (long tl = 0; tl < static_cast<long>(T); ++tl) {
    const std::size_t t = static_cast<std::size_t>(tl);
    const Mask& mask = masks[t];
    const std::vector<double> vals = usable_values(curves, mesh, t);
    Image<float> inside(height, width, 0.0f);
    Mask assigned(height, width, 0);

    for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
      if (mesh.cell_degenerate(t, c)) continue;
      const Quad q = mesh.cell(t, c);
      const std::size_t i = c / (R - 1), j = c % (R - 1);
      const double v0 = vals[i * R + j], v1 = vals[(i + 1) * R + j], v2 = vals[(i + 1) * R + j + 1],
                   v3 = vals[i * R + j + 1];
      double xmin = q[0].x, xmax = q[0].x, zmin = q[0].z, zmax = q[0].z;
      for (const auto& p : q) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        zmin = std::min(zmin, p.z);
        zmax = std::max(zmax, p.z);
      }
      const long z0 = std::max(0L, static_cast<long>(std::ceil(zmin)));
      const long z1 = std::min<long>(height - 1, static_cast<long>(std::floor(zmax)));
      const long x0 = std::max(0L, static_cast<long>(std::ceil(xmin)));
      const long x1 = std::min<long>(width - 1, static_cast<long>(std::floor(xmax)));
      for (long z = z0; z <= z1; ++z) {
        for (long x = x0; x <= x1; ++x) {
          if (!mask.at(z, x) || assigned.at(z, x)) continue;
          const auto uv = solve_bilinear(q, {static_cast<double>(x), static_cast<double>(z)});
          if (!uv || uv->u < -1e-9 || uv->u > 1 + 1e-9 || uv->v < -1e-9 || uv->v > 1 + 1e-9) continue;
          const double u = std::clamp(uv->u, 0.0, 1.0), v = std::clamp(uv->v, 0.0, 1.0);
          inside.at(z, x) =
              static_cast<float>((1 - u) * (1 - v) * v0 + u * (1 - v) * v1 + u * v * v2 + (1 - u) * v * v3);
          assigned.at(z, x) = 1;
        }
      }
    }
    // Rasterization slack: mask pixels no cell claims take the nearest mesh point's value.
    for (std::size_t z = 0; z < height; ++z) {
      for (std::size_t x = 0; x < width; ++x) {
        if (!mask.at(z, x) || assigned.at(z, x)) continue;
        const Point2 p{static_cast<double>(x), static_cast<double>(z)};
        double best = std::numeric_limits<double>::infinity();
        std::size_t src = 0;
        for (std::size_t k = 0; k < vals.size(); ++k) {
          const double d = distance(mesh.point(t, k / R, k % R), p);
          if (d < best) {
            best = d;
            src = k;
          }
        }
        inside.at(z, x) = static_cast<float>(vals[src]);
      }
    }
    const Image<float> frame = apply_falloff(mask, inside, falloff_px);
    std::copy(frame.data().begin(), frame.data().end(), &map.at(t, 0, 0));
  }
  return map;
}

}  // namespace specklesim
