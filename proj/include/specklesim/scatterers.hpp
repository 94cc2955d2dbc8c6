// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "specklesim/coherence.hpp"
#include "specklesim/mesh.hpp"
#include "specklesim/probe.hpp"
#include "specklesim/tensor.hpp"

namespace specklesim {

enum class ScattererKind : std::uint8_t { myocardial, background };

// Scatterers with per-frame positions and amplitudes, stored
// structure-of-arrays. Per-frame arrays are indexed [t * count + n].
struct ScattererSet {
  std::size_t frames = 0;
  std::uint64_t seed = 0;

  std::vector<ScattererKind> kind;
  std::vector<Point2> anchor;              // sampled position (ES frame)
  std::vector<std::uint32_t> source;       // index into the sampled position list, keys the RNG
  std::vector<CellCoord> cell;             // mesh coordinates, myocardial only

  std::vector<Point2> position;            // T x N
  std::vector<double> base_bsc;            // T x N, Eq. 1 amplitude before any modulation
  std::vector<double> bsc;                 // T x N, amplitude actually rendered
  std::vector<std::uint8_t> active;        // T x N, 0 = contributes nothing this frame

  std::size_t count() const noexcept { return kind.size(); }
  std::size_t slot(std::size_t t, std::size_t n) const noexcept { return t * count() + n; }
  std::size_t count_of(ScattererKind k) const;

  // Adds one scatterer with all per-frame arrays sized later by finalize().
  void add(ScattererKind k, Point2 where, std::uint32_t source_index, CellCoord mesh_coord = {});
  // Allocates per-frame arrays; positions default to the anchor.
  void finalize(std::size_t frame_count);
};

// round(density * sector area / lambda^2)
std::size_t scatterer_count(const SectorGeometry& sector, const ProbeConfig& probe);

// Uniform positions over the sector by rejection sampling in its bounding box.
std::vector<Point2> sample_positions(const SectorGeometry& sector, const ProbeConfig& probe,
                                     PixelSpacing spacing, std::uint64_t seed);

// V(t, round(z), round(x))^gamma * epsilon; 0 outside the image.
double bsc_from_video(const VideoTensor& video, std::size_t t, double x, double z, double gamma, double epsilon);

// Standard normal draw used in Eq. 1 for a given scatterer source and frame.
double myocardial_epsilon(std::uint64_t seed, std::uint32_t source);
double background_epsilon(std::uint64_t seed, std::uint32_t source, std::size_t t);

// Static-coherence split: each position becomes myocardial with probability
// equal to the ES-frame map value, otherwise background. Myocardial BSC is
// fixed at ES; background BSC is redrawn every frame. Myocardial scatterers
// get ES mesh coordinates; call advect() to move them.
ScattererSet split_populations_s1(const std::vector<Point2>& positions, const CoherenceMap& static_coherence,
                                  const Mesh& mesh, const VideoTensor& video, double gamma, std::uint64_t seed);

enum class RefreshSchedule { per_frame, per_cycle };

// Background scatterers inside the frame-t mask stay active with probability
// 1 - map(t, position); the rest are silenced for that frame. Returns the
// number of active in-mask background scatterers per frame.
std::vector<std::size_t> s1_background_refresh(ScattererSet& set, const CoherenceMap& static_coherence,
                                               const std::vector<Mask>& masks,
                                               RefreshSchedule schedule = RefreshSchedule::per_frame);

// Dynamic-coherence set: positions in the ES coherence support spawn both a
// myocardial and a background scatterer; the rest spawn background only.
// The returned set is already advected and modulated (see modulate_s2).
ScattererSet build_set_s2(const std::vector<Point2>& positions, const Mesh& mesh,
                          const CoherenceMap& dynamic_coherence, const VideoTensor& video, double gamma,
                          std::uint64_t seed);

// bsc = base * C for myocardial scatterers (at their advected position) and
// base * (1 - C) for background ones. Only amplitudes change.
void modulate_s2(ScattererSet& set, const CoherenceMap& dynamic_coherence);

// Moves myocardial scatterers to forward_bilinear of their ES (cell, u, v)
// in each frame's mesh. Degenerate cells silence the scatterer for that frame.
void advect(ScattererSet& set, const Mesh& mesh);

// CSV "frame,index,kind,x,z,bsc" for one frame.
void write_scatterers_csv(const std::filesystem::path& path, const ScattererSet& set, std::size_t t);

}  // namespace specklesim
