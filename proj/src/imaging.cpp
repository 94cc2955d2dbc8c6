// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace specklesim {
namespace {

constexpr double kTruncation = 4.0;

double max_of(const Image<double>& img) {
  double m = 0.0;
  for (double v : img.data()) m = std::max(m, v);
  return m;
}

}  // namespace

PsfPixels PsfPixels::from(const ProbeConfig& probe, PixelSpacing spacing) {
  probe.validate();
  return {probe.sigma_axial_mm() / spacing.axial_mm, probe.sigma_lateral_mm() / spacing.lateral_mm,
          probe.wavelength_mm() / spacing.axial_mm};
}

Image<double> render_envelope(const ScattererSet& set, std::size_t t, const PsfPixels& psf, std::size_t height,
                              std::size_t width) {
  std::vector<std::complex<double>> field(height * width);
  const long H = static_cast<long>(height), W = static_cast<long>(width);
  const double reach_z = kTruncation * psf.sigma_axial;
  const double reach_x = kTruncation * psf.sigma_lateral;
  const double k = 2.0 * std::numbers::pi / psf.wavelength;
  std::vector<double> lateral;
  std::vector<std::complex<double>> axial;

  for (std::size_t n = 0; n < set.count(); ++n) {
    const std::size_t s = set.slot(t, n);
    const double amp = set.bsc[s];
    if (!set.active[s] || amp == 0.0) continue;
    const Point2 p = set.position[s];
    const long z0 = std::max(0L, static_cast<long>(std::ceil(p.z - reach_z)));
    const long z1 = std::min(H - 1, static_cast<long>(std::floor(p.z + reach_z)));
    const long x0 = std::max(0L, static_cast<long>(std::ceil(p.x - reach_x)));
    const long x1 = std::min(W - 1, static_cast<long>(std::floor(p.x + reach_x)));
    if (z0 > z1 || x0 > x1) continue;

    // Separable kernel: lateral Gaussian times axial Gaussian with carrier.
    lateral.resize(static_cast<std::size_t>(x1 - x0 + 1));
    for (long x = x0; x <= x1; ++x) {
      const double dx = (static_cast<double>(x) - p.x) / psf.sigma_lateral;
      lateral[static_cast<std::size_t>(x - x0)] = std::exp(-0.5 * dx * dx);
    }
    axial.resize(static_cast<std::size_t>(z1 - z0 + 1));
    for (long z = z0; z <= z1; ++z) {
      const double dz = static_cast<double>(z) - p.z;
      const double g = amp * std::exp(-0.5 * (dz / psf.sigma_axial) * (dz / psf.sigma_axial));
      axial[static_cast<std::size_t>(z - z0)] = std::polar(g, k * dz);
    }
    for (long z = z0; z <= z1; ++z) {
      const std::complex<double> a = axial[static_cast<std::size_t>(z - z0)];
      std::complex<double>* row = field.data() + z * W;
      for (long x = x0; x <= x1; ++x) row[x] += a * lateral[static_cast<std::size_t>(x - x0)];
    }
  }

  Image<double> envelope(height, width);
  for (std::size_t q = 0; q < field.size(); ++q) envelope.data()[q] = std::abs(field[q]);
  return envelope;
}

float log_compress(double envelope, double reference, double dynamic_range_db) {
  if (!(reference > 0.0) || !(envelope > 0.0)) return 0.0f;
  const double db = 20.0 * std::log10(envelope / reference);
  return static_cast<float>(std::clamp(1.0 + db / dynamic_range_db, 0.0, 1.0));
}

Image<float> render_frame(const ScattererSet& set, std::size_t t, const ProbeConfig& probe, PixelSpacing spacing,
                          std::size_t height, std::size_t width) {
  const Image<double> env = render_envelope(set, t, PsfPixels::from(probe, spacing), height, width);
  const double ref = max_of(env);
  Image<float> out(height, width, 0.0f);
  for (std::size_t q = 0; q < env.size(); ++q) out.data()[q] = log_compress(env.data()[q], ref, probe.dynamic_range_db);
  return out;
}

VideoTensor render_sequence(const ScattererSet& set, const ProbeConfig& probe, const VideoMetadata& metadata,
                            std::size_t height, std::size_t width) {
  const PsfPixels psf = PsfPixels::from(probe, metadata.spacing);
  std::vector<Image<double>> envelopes(set.frames);
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < static_cast<long>(set.frames); ++t) {
    envelopes[static_cast<std::size_t>(t)] = render_envelope(set, static_cast<std::size_t>(t), psf, height, width);
  }
  double ref = 0.0;
  for (const auto& e : envelopes) ref = std::max(ref, max_of(e));

  VideoTensor video(set.frames, height, width, metadata);
  for (std::size_t t = 0; t < set.frames; ++t) {
    auto frame = video.frame(t);
    const auto env = envelopes[t].data();
    for (std::size_t q = 0; q < frame.size(); ++q) frame[q] = log_compress(env[q], ref, probe.dynamic_range_db);
  }
  return video;
}

}  // namespace specklesim
