// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tilesr/controller.hpp"
#include "tilesr/image.hpp"
#include "tilesr/metrics.hpp"
#include "tilesr/pfj.hpp"

namespace tilesr {

struct RunConfig {
  std::string input_path, output_path, report_path;
  int scale = 4;
  int tile_size = 64;
  std::optional<int> overlap;       // default tile_size / 4
  int t_max = 1000;
  double tau = 5e-3;
  std::array<int, 4> intervals{5, 10, 15, 20};
  int saturation_streak = 2;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::string denoiser = "analytic";  // analytic | shrinkage
  double gamma = 0.5;
  std::vector<MetricSpec> metrics;  // empty selects the default set
  ModulationParams pfj;
  std::optional<double> blend_sigma;  // default tile_size / 4
  int workers = 1;
};

// Fills defaulted fields in place and returns every invariant violation with
// its field path; an empty list means the config is runnable (paths are
// checked at run time, not here).
std::vector<std::string> validate_config(RunConfig& config);

// Parses a JSON config object; unknown fields are rejected, absent fields
// keep their defaults.
RunConfig config_from_json_text(const std::string& text);

struct TileRecord {
  int tile_id = 0;
  std::pair<int, int> origin{0, 0};
  int nfe = 0;
  double equivalent_timesteps = 0;
  int exit_timestep = 0;
  std::string exit_reason;
  std::vector<std::string> category_timeline;
  std::vector<int> intervals;
  double final_fr = 0;
  std::optional<double> final_nr;
  std::optional<double> best_nr_score;
  std::string error;
};

struct RunReport {
  std::vector<TileRecord> tiles;
  long total_nfe = 0;
  double mean_equivalent_timesteps = 0;
  double wall_time_seconds = 0;
  int failed_tiles = 0;
  RunConfig config;  // echo
};

struct RunResult {
  RunReport report;
  Image canvas;  // pre-quantization floats in [0,1]
};

// Catmull-Rom bicubic, center-aligned, replicate borders; scale 1 is a
// bitwise identity.
Image bicubic_upsample(const Image& img, int scale);

// Full pipeline on an in-memory [0,1] image; pure aside from RNG seeded by
// config.seed.
RunResult run_adaptive_sr_on(const Image& input, const RunConfig& config);

// File-level wrapper: reads config.input_path, writes output image and JSON
// report where paths are set.
RunResult run_adaptive_sr(const RunConfig& config);

// Deterministic serialization; floats carry 17 significant digits.
std::string report_to_json(const RunReport& report);

}  // namespace tilesr
