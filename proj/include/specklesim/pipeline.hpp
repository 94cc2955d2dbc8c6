// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specklesim/coherence.hpp"
#include "specklesim/correlation.hpp"
#include "specklesim/mesh.hpp"
#include "specklesim/probe.hpp"
#include "specklesim/scatterers.hpp"
#include "specklesim/tensor.hpp"

namespace specklesim {

enum class Strategy { s1, s2, s2_refined };

Strategy parse_strategy(std::string_view name);
const char* to_string(Strategy strategy);

struct SimulationJob {
  std::filesystem::path video_path;
  std::filesystem::path mesh_path;
  std::filesystem::path output_dir;
  Strategy strategy = Strategy::s2;
  std::optional<double> p;  // static coherence, S1 only
  ProbeConfig probe;
  std::optional<SectorGeometry> sector;  // default: SectorGeometry::covering
  std::uint64_t seed = 0;
  double refinement_gain = 2.0;
  int refinement_iterations = 1;
  double falloff_px = kDefaultFalloffPx;
  CorrelationParams correlation;
  RefreshSchedule refresh = RefreshSchedule::per_frame;

  void validate() const;
};

// Dense displacement from the ES frame, (dx, dz) per pixel, defined on the ES mask.
struct DisplacementField {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;  // T x H x W x 2
  Mask valid;

  Point2 at(std::size_t t, std::size_t z, std::size_t x) const {
    const std::size_t q = 2 * ((t * height + z) * width + x);
    return {data[q], data[q + 1]};
  }
  RawTensor to_raw() const;
};

struct SimulationResult {
  VideoTensor video;
  DisplacementField flow;
  CorrelationCurves target;      // ES curves of the input video
  CorrelationCurves target_f2f;  // frame-to-frame curves of the input video
  CorrelationCurves driving;     // curves behind the last dynamic map (S2 / S2R)
  CorrelationCurves sim_es;
  CorrelationCurves sim_f2f;
  SectorGeometry sector;  // as resolved for this run
  std::size_t scatterer_count = 0;
  double runtime_s = 0.0;
};

// C' = clamp(C + gain * (C - C_sim), 0, 1); entries invalid in either input copy C.
CorrelationCurves refine_curves(const CorrelationCurves& target, const CorrelationCurves& simulated, double gain);

// Iterated form: clamp(current + gain * (target - simulated), 0, 1). With
// current == target this is refine_curves.
CorrelationCurves refine_curves(const CorrelationCurves& current, const CorrelationCurves& target,
                                const CorrelationCurves& simulated, double gain);

DisplacementField ground_truth_field(const Mesh& mesh, std::size_t es_index, std::size_t height, std::size_t width);

SimulationResult run_s1(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh);
SimulationResult run_s2(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh);
SimulationResult run_s2_refined(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh);

// Dispatches on job.strategy.
SimulationResult run_job(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh);
// Loads job.video_path and job.mesh_path first.
SimulationResult run_job(const SimulationJob& job);

// sim.t32 (+ sim.json), flow.t32, flow_valid.t32, curves_target.csv,
// curves_target_f2f.csv, curves_sim_es.csv, curves_sim_f2f.csv, job.json.
void write_outputs(const SimulationResult& result, const SimulationJob& job, const std::filesystem::path& dir);

// Fully resolved job configuration as JSON text, without timestamps.
std::string job_json(const SimulationJob& job, const SimulationResult* result = nullptr);

}  // namespace specklesim
