// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace specklesim {

// Independent purposes get independent streams so adding draws to one
// never shifts another.
enum class Stream : std::uint64_t {
  positions = 1,
  selection = 2,
  myocardial_bsc = 3,
  background_bsc = 4,
  refresh = 5,
  phantom_texture = 6,
  phantom_redraw = 7,
  test = 99,
};

// Counter-keyed generator. Each (seed, stream, index, frame) key yields its
// own splitmix64 sequence, so results do not depend on evaluation order or
// thread count. Satisfies UniformRandomBitGenerator.
class KeyedRng {
 public:
  using result_type = std::uint64_t;

  KeyedRng(std::uint64_t seed, Stream stream, std::uint64_t index = 0, std::uint64_t frame = 0)
      : state_(mix(seed ^ mix(static_cast<std::uint64_t>(stream) ^ mix(index ^ mix(frame + 0x51ed27))))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() {
    std::normal_distribution<double> dist;
    return dist(*this);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace specklesim
