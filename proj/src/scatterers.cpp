// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/scatterers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "specklesim/error.hpp"
#include "specklesim/rng.hpp"

namespace specklesim {

std::size_t ScattererSet::count_of(ScattererKind k) const {
  return static_cast<std::size_t>(std::count(kind.begin(), kind.end(), k));
}

void ScattererSet::add(ScattererKind k, Point2 where, std::uint32_t source_index, CellCoord mesh_coord) {
  kind.push_back(k);
  anchor.push_back(where);
  source.push_back(source_index);
  cell.push_back(mesh_coord);
}

void ScattererSet::finalize(std::size_t frame_count) {
  frames = frame_count;
  const std::size_t n = count();
  position.resize(frames * n);
  for (std::size_t t = 0; t < frames; ++t) std::copy(anchor.begin(), anchor.end(), position.begin() + t * n);
  base_bsc.assign(frames * n, 0.0);
  bsc.assign(frames * n, 0.0);
  active.assign(frames * n, 1);
}

std::size_t scatterer_count(const SectorGeometry& sector, const ProbeConfig& probe) {
  const double lambda = probe.wavelength_mm();
  return static_cast<std::size_t>(std::llround(probe.scatterer_density * sector.area_mm2() / (lambda * lambda)));
}

std::vector<Point2> sample_positions(const SectorGeometry& sector, const ProbeConfig& probe,
                                     PixelSpacing spacing, std::uint64_t seed) {
  sector.validate();
  probe.validate();
  const std::size_t n = scatterer_count(sector, probe);
  const auto box = sector.bounding_box(spacing);
  KeyedRng rng(seed, Stream::positions);
  std::vector<Point2> out;
  out.reserve(n);
  while (out.size() < n) {
    const Point2 p{box.x_min + rng.uniform() * (box.x_max - box.x_min),
                   box.z_min + rng.uniform() * (box.z_max - box.z_min)};
    if (sector.contains(p, spacing)) out.push_back(p);
  }
  return out;
}

double bsc_from_video(const VideoTensor& video, std::size_t t, double x, double z, double gamma, double epsilon) {
  const long zi = std::lround(z), xi = std::lround(x);
  if (zi < 0 || xi < 0 || zi >= static_cast<long>(video.height()) || xi >= static_cast<long>(video.width())) {
    return 0.0;
  }
  const double v = video.at(t, static_cast<std::size_t>(zi), static_cast<std::size_t>(xi));
  return std::pow(v, gamma) * epsilon;
}

double myocardial_epsilon(std::uint64_t seed, std::uint32_t source) {
  return KeyedRng(seed, Stream::myocardial_bsc, source).normal();
}

double background_epsilon(std::uint64_t seed, std::uint32_t source, std::size_t t) {
  return KeyedRng(seed, Stream::background_bsc, source, t).normal();
}

namespace {

void fill_background_bsc(ScattererSet& set, const VideoTensor& video, double gamma) {
  const std::size_t N = set.count();
  for (std::size_t t = 0; t < set.frames; ++t) {
    for (std::size_t n = 0; n < N; ++n) {
      if (set.kind[n] != ScattererKind::background) continue;
      const Point2 p = set.anchor[n];
      set.base_bsc[set.slot(t, n)] =
          bsc_from_video(video, t, p.x, p.z, gamma, background_epsilon(set.seed, set.source[n], t));
    }
  }
}

void fill_myocardial_bsc(ScattererSet& set, const VideoTensor& video, double gamma) {
  const std::size_t N = set.count();
  const std::size_t es = video.metadata().es_index;
  for (std::size_t n = 0; n < N; ++n) {
    if (set.kind[n] != ScattererKind::myocardial) continue;
    const Point2 p = set.anchor[n];
    const double b = bsc_from_video(video, es, p.x, p.z, gamma, myocardial_epsilon(set.seed, set.source[n]));
    for (std::size_t t = 0; t < set.frames; ++t) set.base_bsc[set.slot(t, n)] = b;
  }
}

}  // namespace

ScattererSet split_populations_s1(const std::vector<Point2>& positions, const CoherenceMap& static_coherence,
                                  const Mesh& mesh, const VideoTensor& video, double gamma, std::uint64_t seed) {
  const std::size_t es = video.metadata().es_index;
  ScattererSet set;
  set.seed = seed;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const auto src = static_cast<std::uint32_t>(k);
    const double prob = static_coherence.sample(es, positions[k]);
    if (KeyedRng(seed, Stream::selection, src).bernoulli(prob)) {
      set.add(ScattererKind::myocardial, positions[k], src, attach_to_mesh(mesh, es, positions[k]));
    } else {
      set.add(ScattererKind::background, positions[k], src);
    }
  }
  set.finalize(video.frames());
  fill_myocardial_bsc(set, video, gamma);
  fill_background_bsc(set, video, gamma);
  set.bsc = set.base_bsc;
  return set;
}

std::vector<std::size_t> s1_background_refresh(ScattererSet& set, const CoherenceMap& static_coherence,
                                               const std::vector<Mask>& masks, RefreshSchedule schedule) {
  if (masks.size() != set.frames || static_coherence.frames() != set.frames) {
    throw Error(ErrorKind::format, "s1_background_refresh", "frame counts differ");
  }
  std::vector<std::size_t> active_in_mask(set.frames, 0);
  for (std::size_t t = 0; t < set.frames; ++t) {
    const Mask& mask = masks[t];
    const std::uint64_t key_frame = schedule == RefreshSchedule::per_frame ? t : 0;
    for (std::size_t n = 0; n < set.count(); ++n) {
      if (set.kind[n] != ScattererKind::background) continue;
      const Point2 p = set.anchor[n];
      const long z = std::lround(p.z), x = std::lround(p.x);
      if (!mask.contains(z, x) || !mask.at(z, x)) continue;
      const double keep = 1.0 - static_coherence.sample(t, p);
      const bool on = KeyedRng(set.seed, Stream::refresh, set.source[n], key_frame).bernoulli(keep);
      const std::size_t s = set.slot(t, n);
      set.active[s] = on ? 1 : 0;
      set.bsc[s] = on ? set.base_bsc[s] : 0.0;
      if (on) ++active_in_mask[t];
    }
  }
  return active_in_mask;
}

void advect(ScattererSet& set, const Mesh& mesh) {
  if (mesh.frames() != set.frames) throw Error(ErrorKind::format, "advect", "mesh and set frame counts differ");
  for (std::size_t t = 0; t < set.frames; ++t) {
    for (std::size_t n = 0; n < set.count(); ++n) {
      if (set.kind[n] != ScattererKind::myocardial) continue;
      const std::size_t s = set.slot(t, n);
      if (mesh.cell_degenerate(t, set.cell[n].cell)) {
        set.active[s] = 0;
        set.bsc[s] = 0.0;
        continue;
      }
      set.position[s] = position_in_mesh(mesh, t, set.cell[n]);
    }
  }
}

void modulate_s2(ScattererSet& set, const CoherenceMap& dynamic_coherence) {
  if (dynamic_coherence.frames() != set.frames) {
    throw Error(ErrorKind::format, "modulate_s2", "map and set frame counts differ");
  }
  for (std::size_t t = 0; t < set.frames; ++t) {
    for (std::size_t n = 0; n < set.count(); ++n) {
      const std::size_t s = set.slot(t, n);
      const double c = dynamic_coherence.sample(t, set.position[s]);
      const double w = set.kind[n] == ScattererKind::myocardial ? c : 1.0 - c;
      set.bsc[s] = set.active[s] ? set.base_bsc[s] * w : 0.0;
    }
  }
}

ScattererSet build_set_s2(const std::vector<Point2>& positions, const Mesh& mesh,
                          const CoherenceMap& dynamic_coherence, const VideoTensor& video, double gamma,
                          std::uint64_t seed) {
  const std::size_t es = video.metadata().es_index;
  const Mask es_mask = mask_from_mesh(mesh, es, video.height(), video.width());
  ScattererSet set;
  set.seed = seed;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const auto src = static_cast<std::uint32_t>(k);
    const Point2 p = positions[k];
    const long z = std::lround(p.z), x = std::lround(p.x);
    const bool in_mask = es_mask.contains(z, x) && es_mask.at(z, x);
    if (in_mask || dynamic_coherence.sample(es, p) > 0.0f) {
      set.add(ScattererKind::myocardial, p, src, attach_to_mesh(mesh, es, p));
    }
    set.add(ScattererKind::background, p, src);
  }
  set.finalize(video.frames());
  fill_myocardial_bsc(set, video, gamma);
  fill_background_bsc(set, video, gamma);
  advect(set, mesh);
  modulate_s2(set, dynamic_coherence);
  return set;
}

void write_scatterers_csv(const std::filesystem::path& path, const ScattererSet& set, std::size_t t) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "write_scatterers", "cannot write " + path.string());
  out << "frame,index,kind,x,z,bsc\n";
  char buf[128];
  for (std::size_t n = 0; n < set.count(); ++n) {
    const std::size_t s = set.slot(t, n);
    std::snprintf(buf, sizeof buf, "%zu,%zu,%s,%.6g,%.6g,%.6g\n", t, n,
                  set.kind[n] == ScattererKind::myocardial ? "myocardial" : "background", set.position[s].x,
                  set.position[s].z, set.bsc[s]);
    out << buf;
  }
}

}  // namespace specklesim
