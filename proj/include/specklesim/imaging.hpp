// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "specklesim/probe.hpp"
#include "specklesim/scatterers.hpp"
#include "specklesim/tensor.hpp"

namespace specklesim {

// Image formation by coherent summation of a fixed complex PSF:
//
//   F(x, z) = sum_i bsc_i * exp(-dx^2 / 2 sl^2 - dz^2 / 2 sa^2) * exp(j 2 pi dz / lambda)
//
// with dx = x - x_i, dz = z - z_i in pixels and the PSF truncated at 4 sigma.
// This replaces RF synthesis and beamforming; the B-mode image is the
// log-compressed envelope |F|.
struct PsfPixels {
  double sigma_axial = 1.0;
  double sigma_lateral = 1.0;
  double wavelength = 1.0;  // axial, in pixels

  static PsfPixels from(const ProbeConfig& probe, PixelSpacing spacing);
};

// Envelope |F| for frame t on an H x W grid.
Image<double> render_envelope(const ScattererSet& set, std::size_t t, const PsfPixels& psf, std::size_t height,
                              std::size_t width);

// Maps envelope to [0,1]: 1 + 20 log10(e / reference) / dynamic_range_db, clamped.
float log_compress(double envelope, double reference, double dynamic_range_db);

// Single frame normalized to its own envelope maximum. Empty sets give zeros.
Image<float> render_frame(const ScattererSet& set, std::size_t t, const ProbeConfig& probe, PixelSpacing spacing,
                          std::size_t height, std::size_t width);

// All frames, normalized by the envelope maximum over the whole sequence so
// inter-frame amplitude ratios survive compression.
VideoTensor render_sequence(const ScattererSet& set, const ProbeConfig& probe, const VideoMetadata& metadata,
                            std::size_t height, std::size_t width);

}  // namespace specklesim
