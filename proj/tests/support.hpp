// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small builders shared by the unit tests.

#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "specklesim/mesh.hpp"
#include "specklesim/rng.hpp"
#include "specklesim/tensor.hpp"

namespace testing {

using namespace specklesim;

// l x r grid spanning [x0, x1] x [z0, z1], identical in every frame,
// optionally shifted by (dx, dz) per frame.
inline Mesh grid_mesh(std::size_t frames, std::size_t l, std::size_t r, double x0, double x1, double z0,
                      double z1, Point2 per_frame = {0, 0}) {
  std::vector<Point2> pts;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        const double x = x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(l - 1);
        const double z = z0 + (z1 - z0) * static_cast<double>(j) / static_cast<double>(r - 1);
        pts.push_back({x + per_frame.x * static_cast<double>(t), z + per_frame.z * static_cast<double>(t)});
      }
    }
  }
  return Mesh(frames, l, r, std::move(pts));
}

inline Image<float> noise_image(std::size_t h, std::size_t w, std::uint64_t seed, std::uint64_t index = 0) {
  Image<float> img(h, w);
  KeyedRng rng(seed, Stream::test, index);
  for (auto& v : img.data()) v = static_cast<float>(rng.uniform());
  return img;
}

// Frames of independent uniform noise.
inline VideoTensor noise_video(std::size_t frames, std::size_t h, std::size_t w, std::uint64_t seed) {
  VideoTensor v(frames, h, w);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto img = noise_image(h, w, seed, t);
    std::copy(img.data().begin(), img.data().end(), v.frame(t).begin());
  }
  return v;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("specklesim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
