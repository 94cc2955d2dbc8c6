// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "specklesim/correlation.hpp"
#include "specklesim/error.hpp"

using namespace specklesim;
using namespace testing;

namespace {

// Max-of-NCC between independent uniform-noise windows (25 x 25 reference,
// 49 x 49 search), from a 1000-trial brute-force simulation.
constexpr double kNoiseMean = 0.1243;
constexpr double kNoiseStd = 0.0146;
constexpr double kNoiseLow = 0.0950;   // 0.5% quantile
constexpr double kNoiseHigh = 0.1722;  // 99.5% quantile

// Direct evaluation of the zero-normalized correlation definition.
double brute_ncc(const Image<float>& ref, const Image<float>& search, std::size_t dy, std::size_t dx) {
  const std::size_t h = ref.height(), w = ref.width();
  double ma = 0, mb = 0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      ma += ref.at(y, x);
      mb += search.at(dy + y, dx + x);
    }
  }
  ma /= double(h * w);
  mb /= double(h * w);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double a = ref.at(y, x) - ma, b = search.at(dy + y, dx + x) - mb;
      sab += a * b;
      saa += a * a;
      sbb += b * b;
    }
  }
  if (saa <= 0 || sbb <= 0) return 0;
  return sab / std::sqrt(saa * sbb);
}

Image<float> crop(const Image<float>& src, std::size_t z0, std::size_t x0, std::size_t h, std::size_t w) {
  Image<float> out(h, w);
  for (std::size_t z = 0; z < h; ++z)
    for (std::size_t x = 0; x < w; ++x) out.at(z, x) = src.at(z0 + z, x0 + x);
  return out;
}

// Frame 1 is frame 0 moved by (dz, dx), filled with fresh noise where it enters.
VideoTensor shifted_pair(std::size_t n, long dz, long dx, std::uint64_t seed) {
  const auto base = noise_image(n + 64, n + 64, seed);
  VideoTensor v(2, n, n);
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t x = 0; x < n; ++x) {
      v.at(0, z, x) = base.at(z + 32, x + 32);
      v.at(1, z, x) = base.at(static_cast<std::size_t>(long(z) + 32 - dz), static_cast<std::size_t>(long(x) + 32 - dx));
    }
  }
  return v;
}

}  // namespace

TEST_CASE("ncc_matrix agrees with the direct formula") {
  const auto ref = noise_image(9, 9, 1);
  const auto search = noise_image(17, 15, 2);
  const auto m = ncc_matrix(PlaneView::of(ref), PlaneView::of(search));
  REQUIRE(m.height() == 9);
  REQUIRE(m.width() == 7);
  for (std::size_t dy = 0; dy < m.height(); ++dy)
    for (std::size_t dx = 0; dx < m.width(); ++dx) CHECK(m.at(dy, dx) == doctest::Approx(brute_ncc(ref, search, dy, dx)).epsilon(1e-9));
}

TEST_CASE("self and anti correlation") {
  const auto ref = noise_image(25, 25, 3);
  Image<float> neg(25, 25);
  for (std::size_t k = 0; k < neg.size(); ++k) neg.data()[k] = -ref.data()[k];
  const auto self = ncc_matrix(PlaneView::of(ref), PlaneView::of(ref));
  const auto anti = ncc_matrix(PlaneView::of(ref), PlaneView::of(neg));
  REQUIRE(self.size() == 1);
  CHECK(std::abs(self.at(0, 0) - 1.0) <= 1e-9);
  CHECK(std::abs(anti.at(0, 0) + 1.0) <= 1e-9);
}

TEST_CASE("flat windows correlate to zero") {
  Image<float> flat(5, 5, 0.3f);
  const auto noise = noise_image(7, 7, 4);
  CHECK(ncc_matrix(PlaneView::of(flat), PlaneView::of(noise)).at(1, 1) == 0.0);
  CHECK(ncc_matrix(PlaneView::of(noise_image(5, 5, 5)), PlaneView::of(Image<float>(7, 7, 0.1f))).at(0, 0) == 0.0);
}

TEST_CASE("planted offset is recovered") {
  int found = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto search = noise_image(49, 49, 1000 + seed);
    const auto ref = noise_image(25, 25, 2000 + seed);
    for (std::size_t z = 0; z < 25; ++z)
      for (std::size_t x = 0; x < 25; ++x) search.at(3 + z, 2 + x) = ref.at(z, x);
    const auto m = ncc_matrix(PlaneView::of(ref), PlaneView::of(search));
    std::size_t best = 0;
    for (std::size_t k = 1; k < m.size(); ++k)
      if (m.data()[k] > m.data()[best]) best = k;
    if (best / m.width() == 3 && best % m.width() == 2 && m.data()[best] >= 0.99) ++found;
  }
  CHECK(found >= 99);
}

TEST_CASE("point correlation of a window with itself is one") {
  const VideoTensor v = noise_video(2, 64, 64, 6);
  const auto r = point_correlation(v, 0, {30, 31}, 0, {30, 31});
  CHECK(r.valid);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("point correlation finds a translation inside the search range") {
  for (auto [dz, dx] : {std::pair{3L, -5L}, {12L, 12L}, {-12L, 7L}, {0L, -11L}}) {
    const VideoTensor v = shifted_pair(80, dz, dx, 7);
    const auto r = point_correlation(v, 0, {40, 40}, 1, {40, 40});
    CHECK(r.valid);
    CHECK(r.value >= 0.999);
  }
}

TEST_CASE("independent noise frames sit in the noise band") {
  const VideoTensor v = noise_video(2, 160, 160, 8);
  double sum = 0;
  int inside = 0, n = 0;
  for (int z = 40; z <= 120; z += 10) {
    for (int x = 40; x <= 120; x += 10) {
      const auto r = point_correlation(v, 0, {double(x), double(z)}, 1, {double(x), double(z)});
      REQUIRE(r.valid);
      sum += r.value;
      inside += (r.value >= kNoiseLow && r.value <= kNoiseHigh);
      ++n;
    }
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - kNoiseMean) <= 4 * kNoiseStd / std::sqrt(double(n)));
  CHECK(inside >= int(0.95 * n));
}

TEST_CASE("cropping near the border and invalid windows") {
  const VideoTensor v = noise_video(2, 40, 40, 9);
  // Four pixels from the edge: the window crops to 9 x 9 and stays valid.
  CHECK(point_correlation(v, 0, {4, 20}, 0, {4, 20}).valid);
  CHECK(point_correlation(v, 0, {4, 20}, 0, {4, 20}).value == doctest::Approx(1.0));
  // Three pixels: 7 x 7 is below the minimum.
  CHECK_FALSE(point_correlation(v, 0, {3, 20}, 0, {3, 20}).valid);
  CHECK_FALSE(point_correlation(v, 0, {-5, 20}, 1, {20, 20}).valid);
}

TEST_CASE("symmetry with a zero search radius") {
  const VideoTensor v = noise_video(2, 64, 64, 10);
  CorrelationParams p;
  p.search_halfwidth = 0;
  const auto ab = point_correlation(v, 0, {30, 30}, 1, {33, 28}, p);
  const auto ba = point_correlation(v, 1, {33, 28}, 0, {30, 30}, p);
  CHECK(std::abs(ab.value - ba.value) <= 1e-6);
}

TEST_CASE("correlation is invariant to positive affine intensity maps") {
  VideoTensor v = noise_video(3, 64, 64, 11);
  const Mesh mesh = grid_mesh(3, 4, 3, 18, 46, 20, 44);
  const auto before = measure_curves(v, mesh, ReferenceMode::es);
  for (float& x : v.frame(1)) x = 0.5f * x + 0.2f;
  const auto after = measure_curves(v, mesh, ReferenceMode::es);
  for (std::size_t k = 0; k < before.size(); ++k) CHECK(std::abs(before.values()[k] - after.values()[k]) <= 1e-6);
}

TEST_CASE("static video gives curves of one in both modes") {
  VideoTensor v(4, 64, 64);
  const auto img = noise_image(64, 64, 12);
  for (std::size_t t = 0; t < 4; ++t) std::copy(img.data().begin(), img.data().end(), v.frame(t).begin());
  v.metadata().es_index = 2;
  const Mesh mesh = grid_mesh(4, 5, 3, 15, 50, 20, 45);
  for (auto mode : {ReferenceMode::es, ReferenceMode::previous_frame}) {
    const auto c = measure_curves(v, mesh, mode);
    for (std::size_t k = 0; k < c.size(); ++k) {
      CHECK(c.validity()[k] == 1);
      CHECK(c.values()[k] == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  CHECK(measure_curves(v, mesh, ReferenceMode::es).reference_frame() == 2);
}

TEST_CASE("rigid translation of mesh and texture keeps curves near one") {
  // Texture and mesh both move by (2, 1) pixels per frame.
  const auto base = noise_image(128, 128, 13);
  VideoTensor v(5, 96, 96);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t z = 0; z < 96; ++z)
      for (std::size_t x = 0; x < 96; ++x) v.at(t, z, x) = base.at(z + 16 - t, x + 16 - 2 * t);
  const Mesh mesh = grid_mesh(5, 4, 3, 30, 60, 30, 55, {2, 1});
  for (auto mode : {ReferenceMode::es, ReferenceMode::previous_frame}) {
    const auto c = measure_curves(v, mesh, mode);
    for (std::size_t k = 0; k < c.size(); ++k) CHECK(c.values()[k] >= 0.99);
  }
}

TEST_CASE("values stay in range and the ES frame is one") {
  const VideoTensor v = noise_video(4, 48, 48, 14);
  const Mesh mesh = grid_mesh(4, 6, 3, 5, 43, 2, 46);
  const auto c = measure_curves(v, mesh, ReferenceMode::es);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (c.valid(0, i, j)) CHECK(c.value(0, i, j) == doctest::Approx(1.0));
  for (double x : c.values()) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
  const auto f = measure_curves(v, mesh, ReferenceMode::previous_frame);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(f.valid(0, i, j));
      CHECK(f.value(0, i, j) == 1.0);
    }
}

TEST_CASE("window parameters are validated") {
  CorrelationParams p;
  p.window = 24;
  try {
    p.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::usage);
    CHECK(std::string(e.what()).find("window must be odd") != std::string::npos);
  }
  p.window = 25;
  p.search_halfwidth = -1;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("curves CSV format and round trip") {
  const auto dir = temp_dir("corr_csv");
  CorrelationCurves c(2, 2, 2, ReferenceMode::es, 0);
  c.set(0, 0, 0, 1.0, true);
  c.set(0, 0, 1, 1.0, true);
  c.set(0, 1, 0, 1.0, true);
  c.set(0, 1, 1, 0.0, false);
  c.set(1, 0, 0, 0.123456789, true);
  c.set(1, 0, 1, -0.5, true);
  c.set(1, 1, 0, 1.0 / 3.0, true);
  c.set(1, 1, 1, 0.0, false);
  write_curves_csv(dir / "c.csv", c);
  std::ifstream in(dir / "c.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() ==
        "t,i,j,value,valid\n0,0,0,1,1\n0,0,1,1,1\n0,1,0,1,1\n0,1,1,0,0\n"
        "1,0,0,0.123457,1\n1,0,1,-0.5,1\n1,1,0,0.333333,1\n1,1,1,0,0\n");
  const auto back = read_curves_csv(dir / "c.csv", ReferenceMode::es, 0);
  CHECK(back.same_shape(c));
  CHECK(back.value(1, 0, 0) == doctest::Approx(0.123457));
  CHECK_FALSE(back.valid(1, 1, 1));

  std::ofstream(dir / "dup.csv") << "t,i,j,value,valid\n0,0,0,1,1\n0,0,0,1,1\n";
  CHECK_THROWS_AS(read_curves_csv(dir / "dup.csv", ReferenceMode::es, 0), Error);
  std::ofstream(dir / "hole.csv") << "t,i,j,value,valid\n0,0,0,1,1\n1,1,1,1,1\n";
  CHECK_THROWS_AS(read_curves_csv(dir / "hole.csv", ReferenceMode::es, 0), Error);
  std::ofstream(dir / "hdr.csv") << "t,i,j,val\n";
  CHECK_THROWS_AS(read_curves_csv(dir / "hdr.csv", ReferenceMode::es, 0), Error);
}
