// Copyright 2026 The specklesim Authors
// SPDX-License-Identifier: Apache-2.0
//
// specklesim: batch front end.
//
//   specklesim phantom  --shape 128x128 --frames 16 --motion contract --decorr const:0.05 --seed 1 --out ph/
//   specklesim measure  --video ph/phantom.t32 --mesh ph/mesh.json --mode es --out curves.csv
//   specklesim simulate --video ph/phantom.t32 --mesh ph/mesh.json --strategy s2r --seed 7 --out run/
//   specklesim eval     --real-curves run/curves_target.csv --runs run/ --out report/
//
// Exit codes: 0 ok, 2 usage / validation, 3 I/O or format, 4 numeric or metric.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "specklesim/correlation.hpp"
#include "specklesim/error.hpp"
#include "specklesim/evaluation.hpp"
#include "specklesim/parallel.hpp"
#include "specklesim/phantom.hpp"
#include "specklesim/pipeline.hpp"
#include "specklesim/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace specklesim;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return 2;
    case ErrorKind::io:
    case ErrorKind::format:
    case ErrorKind::metadata: return 3;
    case ErrorKind::geometry:
    case ErrorKind::containment:
    case ErrorKind::metric: return 4;
  }
  return 1;
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorKind::usage, "args", what + " file not found: " + path.string());
  }
}

ReferenceMode parse_mode(const std::string& mode) {
  if (mode == "es") return ReferenceMode::es;
  if (mode == "f2f") return ReferenceMode::previous_frame;
  throw Error(ErrorKind::usage, "args", "mode must be es or f2f");
}

std::string run_label(const nlohmann::json& job, const fs::path& dir) {
  if (!job.contains("strategy")) return dir.filename().string();
  const std::string s = job["strategy"].get<std::string>();
  if (s == "s1" && job.contains("p") && job["p"].is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S1 (%d)", static_cast<int>(std::lround(100.0 * job["p"].get<double>())));
    return buf;
  }
  if (s == "s2") return "S2";
  if (s == "s2r") return "S2 - Refined";
  return s;
}

struct Common {
  int threads = 0;
  int window = CorrelationParams{}.window;
  int search = CorrelationParams{}.search_halfwidth;
};

CorrelationParams correlation_params(const Common& c) {
  CorrelationParams p;
  p.window = c.window;
  p.search_halfwidth = c.search;
  p.min_window = std::min(p.min_window, std::max(1, c.window));
  p.validate();
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cardiac ultrasound sequence simulator with speckle decorrelation"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (0 = hardware concurrency)");

  // measure
  auto* measure = app.add_subcommand("measure", "Measure correlation curves of a video along a mesh");
  fs::path m_video, m_mesh, m_out;
  std::string m_mode = "es";
  measure->add_option("--video", m_video, "Input .t32 video")->required();
  measure->add_option("--mesh", m_mesh, "Mesh JSON")->required();
  measure->add_option("--mode", m_mode, "Reference mode: es|f2f")->capture_default_str();
  measure->add_option("--window", common.window, "Correlation window (odd)")->capture_default_str();
  measure->add_option("--search", common.search, "Search half-width")->capture_default_str();
  measure->add_option("--out", m_out, "Output CSV")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate a sequence with ground-truth motion");
  SimulationJob job;
  std::string strategy;
  std::optional<double> p;
  std::uint64_t seed = 0;
  std::string refresh = "per-frame";
  simulate->add_option("--video", job.video_path, "Input .t32 video")->required();
  simulate->add_option("--mesh", job.mesh_path, "Mesh JSON")->required();
  simulate->add_option("--strategy", strategy, "s1|s2|s2r")->required();
  simulate->add_option("--p", p, "Static coherence probability (s1 only)");
  simulate->add_option("--gain", job.refinement_gain, "Refinement gain")->capture_default_str();
  simulate->add_option("--iters", job.refinement_iterations, "Refinement iterations")->capture_default_str();
  simulate->add_option("--seed", seed, "Master seed")->required();
  simulate->add_option("--falloff", job.falloff_px, "Coherence falloff width in pixels")->capture_default_str();
  simulate->add_option("--gamma", job.probe.gamma, "Gamma applied to video intensities")->capture_default_str();
  simulate->add_option("--frequency", job.probe.center_frequency_hz, "Center frequency in Hz")->capture_default_str();
  simulate->add_option("--density", job.probe.scatterer_density, "Scatterers per square wavelength")
      ->capture_default_str();
  simulate->add_option("--dynamic-range", job.probe.dynamic_range_db, "Log compression range in dB")
      ->capture_default_str();
  simulate->add_option("--refresh", refresh, "S1 background refresh: per-frame|per-cycle")->capture_default_str();
  simulate->add_option("--window", common.window, "Correlation window (odd)")->capture_default_str();
  simulate->add_option("--search", common.search, "Search half-width")->capture_default_str();
  simulate->add_option("--out", job.output_dir, "Output directory")->required();

  // phantom
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic speckle phantom and mesh");
  std::string shape = "128x128", motion = "static", decorr = "none";
  PhantomSpec spec;
  std::uint64_t ph_seed = 0;
  fs::path ph_out;
  phantom->add_option("--shape", shape, "HxW")->capture_default_str();
  phantom->add_option("--frames", spec.frames, "Frame count")->capture_default_str();
  phantom->add_option("--motion", motion, "static|translate|contract")->capture_default_str();
  phantom->add_option("--decorr", decorr, "none | const:q | ramp:q0:q1 | spatial:q0:q1")->capture_default_str();
  phantom->add_option("--es-index", spec.es_index, "End-systole frame")->capture_default_str();
  phantom->add_option("--mesh-l", spec.longitudinal, "Longitudinal mesh points")->capture_default_str();
  phantom->add_option("--mesh-r", spec.radial, "Radial mesh points")->capture_default_str();
  phantom->add_option("--inner-radius", spec.inner_radius, "Inner band radius as a fraction of min(H, W)")
      ->capture_default_str();
  phantom->add_option("--outer-radius", spec.outer_radius, "Outer band radius as a fraction of min(H, W)")
      ->capture_default_str();
  phantom->add_option("--contraction", spec.contraction, "Peak relative radius change")->capture_default_str();
  phantom->add_option("--seed", ph_seed, "Seed")->required();
  phantom->add_option("--out", ph_out, "Output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Compare simulated runs against real correlation curves");
  fs::path real_curves, real_f2f, ev_out;
  std::vector<fs::path> runs;
  std::optional<std::size_t> es_override;
  eval->add_option("--real-curves", real_curves, "ES-referenced curves of the real video")->required();
  eval->add_option("--real-f2f", real_f2f, "Frame-to-frame curves of the real video");
  eval->add_option("--runs", runs, "Simulation output directories")->required()->expected(1, -1);
  eval->add_option("--es-index", es_override, "ES frame of the real video (default: from job.json)");
  eval->add_option("--out", ev_out, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_thread_count(common.threads);

    if (*measure) {
      const auto params = correlation_params(common);
      const auto mode = parse_mode(m_mode);
      require_file(m_video, "video");
      require_file(m_mesh, "mesh");
      const VideoTensor video = load_tensor(m_video);
      const Mesh mesh = load_mesh(m_mesh);
      write_curves_csv(m_out, measure_curves(video, mesh, mode, params));
      return 0;
    }

    if (*simulate) {
      job.strategy = parse_strategy(strategy);
      job.p = p;
      job.seed = seed;
      job.correlation = correlation_params(common);
      if (refresh == "per-frame") {
        job.refresh = RefreshSchedule::per_frame;
      } else if (refresh == "per-cycle") {
        job.refresh = RefreshSchedule::per_cycle;
      } else {
        throw Error(ErrorKind::usage, "args", "refresh must be per-frame or per-cycle");
      }
      job.validate();
      require_file(job.video_path, "video");
      require_file(job.mesh_path, "mesh");
      const SimulationResult result = run_job(job);
      write_outputs(result, job, job.output_dir);
      std::printf("strategy=%s scatterers=%zu runtime=%.2fs out=%s\n", to_string(job.strategy),
                  result.scatterer_count, result.runtime_s, job.output_dir.string().c_str());
      return 0;
    }

    if (*phantom) {
      static const std::regex shape_re(R"((\d+)x(\d+))");
      std::smatch m;
      if (!std::regex_match(shape, m, shape_re)) {
        throw Error(ErrorKind::usage, "args", "shape must look like HxW, got '" + shape + "'");
      }
      spec.height = std::stoul(m[1]);
      spec.width = std::stoul(m[2]);
      spec.motion = parse_motion(motion);
      spec.profile = DecorrelationProfile::parse(decorr);
      const Phantom ph = synth_phantom(spec, ph_seed);
      std::error_code ec;
      fs::create_directories(ph_out, ec);
      if (ec) throw Error(ErrorKind::io, "phantom", "cannot create " + ph_out.string());
      save_tensor(ph_out / "phantom.t32", ph.video);
      save_mesh(ph_out / "mesh.json", ph.mesh);
      write_profile_csv(ph_out / "profile.csv", spec);
      return 0;
    }

    if (*eval) {
      require_file(real_curves, "real curves");
      std::vector<RunCurves> run_curves;
      std::optional<CorrelationCurves> real_f2f_curves;
      std::optional<CorrelationCurves> real_es;
      for (const auto& dir : runs) {
        nlohmann::json meta = nlohmann::json::object();
        if (std::ifstream jf(dir / "job.json"); jf) {
          try {
            jf >> meta;
          } catch (const nlohmann::json::exception&) {
            throw Error(ErrorKind::format, "eval", "unparsable " + (dir / "job.json").string());
          }
        }
        std::size_t es = es_override.value_or(0);
        if (!es_override) {
          if (!meta.contains("es_index")) {
            throw Error(ErrorKind::metadata, "eval", "no es_index in " + (dir / "job.json").string() +
                                                         "; pass --es-index");
          }
          es = meta["es_index"].get<std::size_t>();
        }
        if (!real_es) {
          real_es = read_curves_csv(real_curves, ReferenceMode::es, es);
          if (!real_f2f.empty()) {
            require_file(real_f2f, "real f2f curves");
            real_f2f_curves = read_curves_csv(real_f2f, ReferenceMode::previous_frame, 0);
          } else if (fs::is_regular_file(dir / "curves_target_f2f.csv")) {
            real_f2f_curves = read_curves_csv(dir / "curves_target_f2f.csv", ReferenceMode::previous_frame, 0);
          }
        }
        require_file(dir / "curves_sim_es.csv", "run curves");
        RunCurves rc{run_label(meta, dir), read_curves_csv(dir / "curves_sim_es.csv", ReferenceMode::es, es),
                     std::nullopt};
        if (fs::is_regular_file(dir / "curves_sim_f2f.csv")) {
          rc.f2f = read_curves_csv(dir / "curves_sim_f2f.csv", ReferenceMode::previous_frame, 0);
        }
        if (!rc.es.same_shape(*real_es)) {
          throw Error(ErrorKind::metric, "eval",
                      "shape mismatch between " + real_curves.string() + " and " + (dir / "curves_sim_es.csv").string());
        }
        run_curves.push_back(std::move(rc));
      }
      const auto rows = report(*real_es, real_f2f_curves, run_curves);
      write_report(ev_out, rows);
      std::cout << report_markdown(rows);
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "specklesim: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "specklesim: %s\n", e.what());
    return 3;
  }
  return 0;
}
