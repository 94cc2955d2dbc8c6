// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0

#include "specklesim/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include "json.hpp"

#include "specklesim/error.hpp"
#include "specklesim/imaging.hpp"
#include "specklesim/tensor_io.hpp"

namespace specklesim {
namespace {

using Clock = std::chrono::steady_clock;

// Runs fn, prefixing the stage label of any library error.
template <typename Fn>
auto stage(const std::string& label, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.relabel(label);
  }
}

void check_inputs(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh) {
  job.validate();
  video.validate();
  if (mesh.frames() != video.frames()) {
    throw Error(ErrorKind::format, "inputs",
                "video has " + std::to_string(video.frames()) + " frames but mesh has " +
                    std::to_string(mesh.frames()));
  }
  const std::size_t es = video.metadata().es_index;
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    if (mesh.cell_degenerate(es, c)) {
      throw Error(ErrorKind::geometry, "inputs", "degenerate mesh cell " + std::to_string(c) + " at ES frame");
    }
  }
}

struct Prepared {
  SectorGeometry sector;
  std::vector<Point2> positions;
  Clock::time_point start;
};

Prepared prepare(const SimulationJob& job, const VideoTensor& video) {
  Prepared p;
  p.start = Clock::now();
  p.sector = job.sector.value_or(
      SectorGeometry::covering(video.height(), video.width(), video.metadata().spacing));
  p.positions = stage("sample_positions",
                      [&] { return sample_positions(p.sector, job.probe, video.metadata().spacing, job.seed); });
  return p;
}

void measure_targets(SimulationResult& r, const SimulationJob& job, const VideoTensor& video, const Mesh& mesh,
                     const std::string& label) {
  r.target = stage(label + "/measure_target",
                   [&] { return measure_curves(video, mesh, ReferenceMode::es, job.correlation); });
  r.target_f2f = stage(label + "/measure_target",
                       [&] { return measure_curves(video, mesh, ReferenceMode::previous_frame, job.correlation); });
}

void finish(SimulationResult& r, const SimulationJob& job, const VideoTensor& input, const Mesh& mesh,
            const Prepared& prep, const std::string& label) {
  r.sim_es = stage(label + "/measure_output",
                   [&] { return measure_curves(r.video, mesh, ReferenceMode::es, job.correlation); });
  r.sim_f2f = stage(label + "/measure_output",
                    [&] { return measure_curves(r.video, mesh, ReferenceMode::previous_frame, job.correlation); });
  r.flow = stage(label + "/ground_truth",
                 [&] { return ground_truth_field(mesh, input.metadata().es_index, input.height(), input.width()); });
  r.sector = prep.sector;
  r.runtime_s = std::chrono::duration<double>(Clock::now() - prep.start).count();
}

// S2 up to rendering; hands back the set so refinement can re-modulate it.
SimulationResult simulate_s2(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh,
                             const Prepared& prep, ScattererSet& set, const std::string& label) {
  SimulationResult r;
  measure_targets(r, job, video, mesh, label);
  const CoherenceMap map = stage(label + "/dynamic_map", [&] {
    return dynamic_map(r.target, mesh, job.falloff_px, video.height(), video.width());
  });
  set = stage(label + "/build_set",
              [&] { return build_set_s2(prep.positions, mesh, map, video, job.probe.gamma, job.seed); });
  r.driving = r.target;
  r.scatterer_count = set.count();
  r.video = stage(label + "/render",
                  [&] { return render_sequence(set, job.probe, video.metadata(), video.height(), video.width()); });
  return r;
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
  if (name == "s1") return Strategy::s1;
  if (name == "s2") return Strategy::s2;
  if (name == "s2r" || name == "s2-refined") return Strategy::s2_refined;
  throw Error(ErrorKind::usage, "strategy", "unknown strategy '" + std::string(name) + "' (s1|s2|s2r)");
}

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::s1: return "s1";
    case Strategy::s2: return "s2";
    case Strategy::s2_refined: return "s2r";
  }
  return "s2";
}

void SimulationJob::validate() const {
  if (strategy == Strategy::s1) {
    if (!p) throw Error(ErrorKind::usage, "job", "strategy s1 requires p");
    if (!(*p >= 0.0 && *p <= 1.0)) throw Error(ErrorKind::usage, "job", "p must lie in [0,1]");
  } else if (p) {
    throw Error(ErrorKind::usage, "job", "p only applies to strategy s1");
  }
  if (!(refinement_gain >= 0.0)) throw Error(ErrorKind::usage, "job", "refinement gain must be >= 0");
  if (refinement_iterations < 0) throw Error(ErrorKind::usage, "job", "refinement iterations must be >= 0");
  if (!(falloff_px >= 0.0)) throw Error(ErrorKind::usage, "job", "falloff must be >= 0");
  probe.validate();
  correlation.validate();
  if (sector) sector->validate();
}

RawTensor DisplacementField::to_raw() const {
  RawTensor raw;
  raw.dims = {static_cast<std::uint32_t>(frames), static_cast<std::uint32_t>(height),
              static_cast<std::uint32_t>(width), 2u};
  raw.data = data;
  return raw;
}

CorrelationCurves refine_curves(const CorrelationCurves& current, const CorrelationCurves& target,
                                const CorrelationCurves& simulated, double gain) {
  if (!current.same_shape(target) || !target.same_shape(simulated)) {
    throw Error(ErrorKind::metric, "refine_curves", "curve shapes differ");
  }
  CorrelationCurves out = current;
  auto& v = out.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!target.validity()[k] || !simulated.validity()[k] || !current.validity()[k]) {
      v[k] = target.values()[k];
      out.validity()[k] = target.validity()[k];
      continue;
    }
    v[k] = std::clamp(current.values()[k] + gain * (target.values()[k] - simulated.values()[k]), 0.0, 1.0);
  }
  return out;
}

CorrelationCurves refine_curves(const CorrelationCurves& target, const CorrelationCurves& simulated, double gain) {
  return refine_curves(target, target, simulated, gain);
}

DisplacementField ground_truth_field(const Mesh& mesh, std::size_t es_index, std::size_t height, std::size_t width) {
  DisplacementField f{mesh.frames(), height, width, std::vector<float>(2 * mesh.frames() * height * width, 0.0f),
                      mask_from_mesh(mesh, es_index, height, width)};
  for (std::size_t z = 0; z < height; ++z) {
    for (std::size_t x = 0; x < width; ++x) {
      if (!f.valid.at(z, x)) continue;
      const Point2 p{static_cast<double>(x), static_cast<double>(z)};
      const CellCoord where = attach_to_mesh(mesh, es_index, p);
      // Relative to the reconstructed ES position so a static mesh gives exact zeros.
      const Point2 origin = position_in_mesh(mesh, es_index, where);
      for (std::size_t t = 0; t < mesh.frames(); ++t) {
        const Point2 d = position_in_mesh(mesh, t, where) - origin;
        const std::size_t q = 2 * ((t * height + z) * width + x);
        f.data[q] = static_cast<float>(d.x);
        f.data[q + 1] = static_cast<float>(d.z);
      }
    }
  }
  return f;
}

SimulationResult run_s1(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh) {
  stage("s1", [&] { check_inputs(job, video, mesh); });
  const Prepared prep = stage("s1", [&] { return prepare(job, video); });
  const std::size_t H = video.height(), W = video.width(), T = video.frames();

  SimulationResult r;
  measure_targets(r, job, video, mesh, "s1");
  const CoherenceMap map = stage("s1/static_map", [&] { return static_map(mesh, *job.p, job.falloff_px, H, W); });
  ScattererSet set = stage("s1/split", [&] {
    return split_populations_s1(prep.positions, map, mesh, video, job.probe.gamma, job.seed);
  });
  stage("s1/advect", [&] { advect(set, mesh); });
  std::vector<Mask> masks(T);
  for (std::size_t t = 0; t < T; ++t) masks[t] = mask_from_mesh(mesh, t, H, W);
  stage("s1/refresh", [&] { s1_background_refresh(set, map, masks, job.refresh); });
  r.scatterer_count = set.count();
  r.video = stage("s1/render", [&] { return render_sequence(set, job.probe, video.metadata(), H, W); });
  finish(r, job, video, mesh, prep, "s1");
  return r;
}

SimulationResult run_s2(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh) {
  stage("s2", [&] { check_inputs(job, video, mesh); });
  const Prepared prep = stage("s2", [&] { return prepare(job, video); });
  ScattererSet set;
  SimulationResult r = simulate_s2(job, video, mesh, prep, set, "s2");
  finish(r, job, video, mesh, prep, "s2");
  return r;
}

SimulationResult run_s2_refined(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh) {
  stage("s2r", [&] { check_inputs(job, video, mesh); });
  const Prepared prep = stage("s2r", [&] { return prepare(job, video); });
  ScattererSet set;
  SimulationResult r = simulate_s2(job, video, mesh, prep, set, "s2r");
  for (int k = 0; k < job.refinement_iterations; ++k) {
    const CorrelationCurves simulated = stage("s2r/measure_output", [&] {
      return measure_curves(r.video, mesh, ReferenceMode::es, job.correlation);
    });
    r.driving = refine_curves(r.driving, r.target, simulated, job.refinement_gain);
    const CoherenceMap map = stage("s2r/dynamic_map", [&] {
      return dynamic_map(r.driving, mesh, job.falloff_px, video.height(), video.width());
    });
    stage("s2r/modulate", [&] { modulate_s2(set, map); });
    r.video = stage("s2r/render", [&] {
      return render_sequence(set, job.probe, video.metadata(), video.height(), video.width());
    });
  }
  finish(r, job, video, mesh, prep, "s2r");
  return r;
}

SimulationResult run_job(const SimulationJob& job, const VideoTensor& video, const Mesh& mesh) {
  switch (job.strategy) {
    case Strategy::s1: return run_s1(job, video, mesh);
    case Strategy::s2: return run_s2(job, video, mesh);
    case Strategy::s2_refined: return run_s2_refined(job, video, mesh);
  }
  throw Error(ErrorKind::usage, "job", "unknown strategy");
}

SimulationResult run_job(const SimulationJob& job) {
  const VideoTensor video = load_tensor(job.video_path);
  const Mesh mesh = load_mesh(job.mesh_path);
  return run_job(job, video, mesh);
}

std::string job_json(const SimulationJob& job, const SimulationResult* result) {
  nlohmann::ordered_json j;
  j["video"] = job.video_path.string();
  j["mesh"] = job.mesh_path.string();
  j["strategy"] = to_string(job.strategy);
  j["p"] = job.p ? nlohmann::ordered_json(*job.p) : nlohmann::ordered_json(nullptr);
  j["seed"] = job.seed;
  j["refinement_gain"] = job.refinement_gain;
  j["refinement_iterations"] = job.refinement_iterations;
  j["falloff_px"] = job.falloff_px;
  j["refresh_schedule"] = job.refresh == RefreshSchedule::per_frame ? "per_frame" : "per_cycle";
  j["correlation"] = {{"window", job.correlation.window},
                      {"search_halfwidth", job.correlation.search_halfwidth},
                      {"min_window", job.correlation.min_window}};
  const auto& pr = job.probe;
  j["probe"] = {{"center_frequency_hz", pr.center_frequency_hz},
                {"speed_of_sound", pr.speed_of_sound},
                {"wavelength_mm", pr.wavelength_mm()},
                {"scatterer_density", pr.scatterer_density},
                {"psf_sigma_axial_mm", pr.sigma_axial_mm()},
                {"psf_sigma_lateral_mm", pr.sigma_lateral_mm()},
                {"dynamic_range_db", pr.dynamic_range_db},
                {"gamma", pr.gamma}};
  if (result) {
    const auto& s = result->sector;
    j["sector"] = {{"apex_px", {s.apex.x, s.apex.z}},
                   {"angle_min_rad", s.angle_min},
                   {"angle_max_rad", s.angle_max},
                   {"depth_min_mm", s.depth_min_mm},
                   {"depth_max_mm", s.depth_max_mm}};
    j["scatterer_count"] = result->scatterer_count;
    j["frames"] = result->video.frames();
    j["es_index"] = result->video.metadata().es_index;
  }
  return j.dump(2);
}

void write_outputs(const SimulationResult& result, const SimulationJob& job, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "write_outputs", "cannot create " + dir.string() + ": " + ec.message());
  save_tensor(dir / "sim.t32", result.video);
  write_t32(dir / "flow.t32", result.flow.to_raw());
  RawTensor valid;
  valid.dims = {static_cast<std::uint32_t>(result.flow.height), static_cast<std::uint32_t>(result.flow.width)};
  for (auto v : result.flow.valid.data()) valid.data.push_back(v ? 1.0f : 0.0f);
  write_t32(dir / "flow_valid.t32", valid);
  write_curves_csv(dir / "curves_target.csv", result.target);
  write_curves_csv(dir / "curves_target_f2f.csv", result.target_f2f);
  write_curves_csv(dir / "curves_sim_es.csv", result.sim_es);
  write_curves_csv(dir / "curves_sim_f2f.csv", result.sim_f2f);

  auto j = nlohmann::ordered_json::parse(job_json(job, &result));
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["created_at"] = stamp;
  std::ofstream out(dir / "job.json", std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "write_outputs", "cannot write job.json");
  out << j.dump(2) << '\n';
}

}  // namespace specklesim
