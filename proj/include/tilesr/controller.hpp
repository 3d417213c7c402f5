// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tilesr/denoiser.hpp"
#include "tilesr/image.hpp"
#include "tilesr/metrics.hpp"
#include "tilesr/pfj.hpp"
#include "tilesr/rng.hpp"
#include "tilesr/schedule.hpp"

namespace tilesr {

enum class TileCategory { Bootstrap, Stable, Growing, Saturated, Done, Failed };

const char* category_name(TileCategory c);

struct DtssConfig {
  double tau = 5e-3;
  int t_max = 1000;
  std::array<int, 4> intervals{5, 10, 15, 20};
  int saturation_streak = 2;
  double eta = 0.0;
};

// Throws if any DtssConfig invariant fails.
void validate_dtss(const DtssConfig& c);

// Scoring surface the controller consumes; the production implementation
// wraps the metric stack, tests may script it.
class MetricsContext {
 public:
  virtual ~MetricsContext() = default;
  virtual bool nr_active(int timestep) const = 0;
  virtual RepresentationScore score(const Image& f, int timestep) const = 0;
};

// Real metric stack against a fixed reference tile. NR metrics activate in
// the second half of the denoising (2t < t_max).
class StandardMetricsContext : public MetricsContext {
 public:
  StandardMetricsContext(const Image& reference, std::vector<MetricSpec> specs, int t_max)
      : ref_(&reference), specs_(std::move(specs)), t_max_(t_max) {}

  bool nr_active(int timestep) const override { return 2 * timestep < t_max_; }
  RepresentationScore score(const Image& f, int timestep) const override {
    return representation_score(f, *ref_, specs_, nr_active(timestep), timestep);
  }

 private:
  const Image* ref_;
  std::vector<MetricSpec> specs_;
  int t_max_;
};

struct TileState {
  int tile_id = 0;
  std::pair<int, int> origin{0, 0};
  Image latent;
  int timestep = 0;
  TileCategory category = TileCategory::Bootstrap;
  std::vector<RepresentationScore> history;
  std::optional<std::pair<double, Image>> best_nr;  // max nr_component + its latent
  int nfe = 0;
  int decline_streak = 0;

  // report plumbing
  std::vector<TileCategory> timeline;     // category per advance
  std::vector<int> chosen_intervals;      // pre-truncation interval per advance
  std::string exit_reason;                // "completed" | "saturated" | "failed"
  std::string error;
};

struct ClassifyResult {
  TileCategory category = TileCategory::Stable;
  int interval = 0;
  bool exit = false;  // saturation directive: snapshot-and-exit
};

// Threshold mapping (2*tau, tau, 0) over nr_gain with fr_gain fallback;
// decline_streak counts consecutive prior NR declines, the gain under
// classification is the +1.
ClassifyResult classify_region(const InfoGainReport& report, bool nr_active, int decline_streak,
                               const DtssConfig& config);

// Everything one advance needs besides the tile and its stream.
struct AdvanceContext {
  const DenoiserFn* denoiser = nullptr;
  const DiffusionSchedule* schedule = nullptr;
  SkipCodebook* codebook = nullptr;
  const MetricsContext* metrics = nullptr;
  const Image* conditioning = nullptr;  // unmodulated o
  ModulationParams pfj;
  DtssConfig config;
};

// Baseline representation score at t_max; must run once before advances.
void init_tile(TileState& tile, const AdvanceContext& ctx);

// One controller iteration: classify (or bootstrap), jump, denoise,
// transition, score, bookkeeping. Sets Done at timestep 0 or on saturation
// exit (restoring the best-NR snapshot); sets Failed and rethrows on error.
void advance_tile(TileState& tile, const AdvanceContext& ctx, NormalStream& rng);

// Runs advances until the tile leaves the active categories.
void run_tile_loop(TileState& tile, const AdvanceContext& ctx, NormalStream& rng);

// Raw timesteps consumed before exit: t_max - exit timestep.
double equivalent_timesteps(const TileState& tile, int t_max);

}  // namespace tilesr
