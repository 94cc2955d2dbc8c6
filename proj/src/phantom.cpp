// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/phantom.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

#include "specklesim/error.hpp"
#include "specklesim/rng.hpp"

namespace specklesim {
namespace {

std::vector<double> parse_numbers(std::string_view text, std::string_view original) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto colon = text.find(':');
    const std::string field(text.substr(0, colon));
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != field.size() || field.empty()) {
      throw Error(ErrorKind::usage, "phantom", "bad number in profile '" + std::string(original) + "'");
    }
    out.push_back(v);
    if (colon == std::string_view::npos) break;
    text.remove_prefix(colon + 1);
  }
  return out;
}

struct Geometry {
  Point2 center;
  double r_in, r_out, half_span;

  // Longitudinal coordinate in [0,1] from the angle about the band center.
  double longitudinal(Point2 p) const {
    const double phi = std::atan2(p.x - center.x, -(p.z - center.z));
    return std::clamp((phi + half_span) / (2 * half_span), 0.0, 1.0);
  }
};

Point2 displacement_scale(const PhantomSpec& spec, std::size_t t, double& scale) {
  const double step = static_cast<double>(t) - static_cast<double>(spec.es_index);
  scale = 1.0;
  switch (spec.motion) {
    case PhantomMotion::still: return {0, 0};
    case PhantomMotion::translate: return step * spec.translation_per_frame;
    case PhantomMotion::contract:
      scale = 1.0 - spec.contraction * 0.5 * (1.0 - std::cos(2 * std::numbers::pi * step / static_cast<double>(spec.frames)));
      return {0, 0};
  }
  return {0, 0};
}

}  // namespace

PhantomMotion parse_motion(std::string_view name) {
  if (name == "static" || name == "still") return PhantomMotion::still;
  if (name == "translate" || name == "translation") return PhantomMotion::translate;
  if (name == "contract" || name == "contraction") return PhantomMotion::contract;
  throw Error(ErrorKind::usage, "phantom", "unknown motion '" + std::string(name) + "'");
}

const char* to_string(PhantomMotion motion) {
  switch (motion) {
    case PhantomMotion::still: return "static";
    case PhantomMotion::translate: return "translate";
    case PhantomMotion::contract: return "contract";
  }
  return "static";
}

DecorrelationProfile DecorrelationProfile::parse(std::string_view text) {
  DecorrelationProfile p;
  if (text == "none" || text.empty()) return p;
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const auto nums = colon == std::string_view::npos ? std::vector<double>{} : parse_numbers(text.substr(colon + 1), text);
  if (kind == "const" && nums.size() == 1) {
    p.start = p.end = nums[0];
  } else if (kind == "ramp" && nums.size() == 2) {
    p.shape = Shape::ramp;
    p.start = nums[0];
    p.end = nums[1];
  } else if (kind == "spatial" && nums.size() == 2) {
    p.shape = Shape::spatial;
    p.start = nums[0];
    p.end = nums[1];
  } else {
    throw Error(ErrorKind::usage, "phantom",
                "profile must be none, const:q, ramp:q0:q1 or spatial:q0:q1, got '" + std::string(text) + "'");
  }
  if (p.start < 0 || p.start > 1 || p.end < 0 || p.end > 1) {
    throw Error(ErrorKind::usage, "phantom", "redraw fractions must lie in [0,1]");
  }
  return p;
}

std::string DecorrelationProfile::to_string() const {
  auto num = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  switch (shape) {
    case Shape::constant: return start == 0.0 ? "none" : "const:" + num(start);
    case Shape::ramp: return "ramp:" + num(start) + ":" + num(end);
    case Shape::spatial: return "spatial:" + num(start) + ":" + num(end);
  }
  return "none";
}

double DecorrelationProfile::redraw_fraction(std::size_t t, double s, std::size_t frames, std::size_t es_index) const {
  if (t == es_index) return 0.0;
  switch (shape) {
    case Shape::constant: return start;
    case Shape::spatial: return start + (end - start) * std::clamp(s, 0.0, 1.0);
    case Shape::ramp: {
      const std::size_t steps = std::max(es_index, frames - 1 - es_index);
      const std::size_t k = t > es_index ? t - es_index : es_index - t;
      const double a = steps <= 1 ? 0.0 : static_cast<double>(k - 1) / static_cast<double>(steps - 1);
      return start + (end - start) * a;
    }
  }
  return 0.0;
}

void PhantomSpec::validate() const {
  if (height < 16 || width < 16) throw Error(ErrorKind::usage, "phantom", "shape must be at least 16x16");
  if (frames < 2) throw Error(ErrorKind::usage, "phantom", "need at least 2 frames");
  if (es_index >= frames) throw Error(ErrorKind::usage, "phantom", "es_index out of range");
  if (longitudinal < 2 || radial < 2) throw Error(ErrorKind::usage, "phantom", "mesh needs l, r >= 2");
  if (!(0 < inner_radius && inner_radius < outer_radius)) {
    throw Error(ErrorKind::usage, "phantom", "need 0 < inner radius < outer radius");
  }
  if (!(contraction >= 0 && contraction < 1)) throw Error(ErrorKind::usage, "phantom", "contraction must lie in [0,1)");
}

Phantom synth_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t H = spec.height, W = spec.width, T = spec.frames, L = spec.longitudinal, R = spec.radial;
  const double size = static_cast<double>(std::min(H, W));
  const Geometry geo{{0.5 * static_cast<double>(W - 1), 0.5 * static_cast<double>(H - 1)},
                     spec.inner_radius * size, spec.outer_radius * size, spec.half_span_rad};

  // ES mesh, then the analytic motion for every frame.
  std::vector<Point2> es_points(L * R);
  for (std::size_t i = 0; i < L; ++i) {
    const double phi = -geo.half_span + 2 * geo.half_span * static_cast<double>(i) / static_cast<double>(L - 1);
    for (std::size_t j = 0; j < R; ++j) {
      const double rho = geo.r_in + (geo.r_out - geo.r_in) * static_cast<double>(j) / static_cast<double>(R - 1);
      es_points[i * R + j] = {geo.center.x + rho * std::sin(phi), geo.center.z - rho * std::cos(phi)};
    }
  }
  std::vector<Point2> points(T * L * R);
  std::vector<Point2> shift(T);
  std::vector<double> scale(T);
  for (std::size_t t = 0; t < T; ++t) {
    shift[t] = displacement_scale(spec, t, scale[t]);
    for (std::size_t k = 0; k < L * R; ++k) {
      points[t * L * R + k] = geo.center + scale[t] * (es_points[k] - geo.center) + shift[t];
    }
  }
  Mesh mesh(T, L, R, std::move(points));

  // Two texture layers: myocardium in ES (material) coordinates, background
  // in image coordinates. Both evolve outward from ES by random redraws.
  const std::size_t P = H * W;
  std::vector<double> s_of(P);
  for (std::size_t q = 0; q < P; ++q) {
    s_of[q] = geo.longitudinal({static_cast<double>(q % W), static_cast<double>(q / W)});
  }
  std::vector<float> es_layer(2 * P);
  for (std::size_t q = 0; q < 2 * P; ++q) {
    es_layer[q] = static_cast<float>(KeyedRng(seed, Stream::phantom_texture, q, spec.es_index).uniform());
  }
  std::vector<std::vector<float>> layers(T);
  layers[spec.es_index] = es_layer;
  auto step = [&](std::size_t from, std::size_t to) {
    layers[to] = layers[from];
    for (std::size_t q = 0; q < 2 * P; ++q) {
      const double frac = spec.profile.redraw_fraction(to, s_of[q % P], T, spec.es_index);
      if (frac > 0 && KeyedRng(seed, Stream::phantom_redraw, q, to).bernoulli(frac)) {
        layers[to][q] = static_cast<float>(KeyedRng(seed, Stream::phantom_texture, q, to).uniform());
      }
    }
  };
  for (std::size_t t = spec.es_index + 1; t < T; ++t) step(t - 1, t);
  for (std::size_t t = spec.es_index; t-- > 0;) step(t + 1, t);

  VideoTensor video(T, H, W, VideoMetadata{spec.spacing, spec.es_index, spec.fps});
  for (std::size_t t = 0; t < T; ++t) {
    const Mask mask = mask_from_mesh(mesh, t, H, W);
    const auto& layer = layers[t];
    for (std::size_t z = 0; z < H; ++z) {
      for (std::size_t x = 0; x < W; ++x) {
        float v = layer[P + z * W + x];
        if (mask.at(z, x)) {
          const Point2 here{static_cast<double>(x), static_cast<double>(z)};
          const Point2 material = geo.center + (1.0 / scale[t]) * (here - shift[t] - geo.center);
          const long mz = std::lround(material.z), mx = std::lround(material.x);
          if (mz >= 0 && mx >= 0 && mz < static_cast<long>(H) && mx < static_cast<long>(W)) {
            v = layer[static_cast<std::size_t>(mz) * W + static_cast<std::size_t>(mx)];
          }
        }
        video.at(t, z, x) = v;
      }
    }
  }
  return {std::move(video), std::move(mesh)};
}

void write_profile_csv(const std::filesystem::path& path, const PhantomSpec& spec) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "phantom", "cannot write " + path.string());
  out << "t,i,redraw_fraction\n";
  char buf[32];
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t i = 0; i < spec.longitudinal; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(spec.longitudinal - 1);
      std::snprintf(buf, sizeof buf, "%.6g", spec.profile.redraw_fraction(t, s, spec.frames, spec.es_index));
      out << t << ',' << i << ',' << buf << '\n';
    }
  }
}

}  // namespace specklesim
