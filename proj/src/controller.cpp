// SPDX-License-Identifier: Apache-2.0
#include "tilesr/controller.hpp"

#include <algorithm>
#include <stdexcept>

namespace tilesr {

const char* category_name(TileCategory c) {
  switch (c) {
    case TileCategory::Bootstrap: return "bootstrap";
    case TileCategory::Stable: return "stable";
    case TileCategory::Growing: return "growing";
    case TileCategory::Saturated: return "saturated";
    case TileCategory::Done: return "done";
    case TileCategory::Failed: return "failed";
  }
  return "?";
}

void validate_dtss(const DtssConfig& c) {
  if (!(c.tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (c.t_max < 1) throw std::invalid_argument("t_max must be >= 1");
  if (c.saturation_streak < 1) throw std::invalid_argument("saturation_streak must be >= 1");
  if (c.eta < 0.0 || c.eta > 1.0) throw std::invalid_argument("eta must lie in [0, 1]");
  for (int i = 0; i < 4; ++i) {
    if (c.intervals[i] <= 0) throw std::invalid_argument("intervals must be positive");
    if (c.intervals[i] > c.t_max) throw std::invalid_argument("intervals must not exceed t_max");
    // equal intervals are legal: a flat (k,k,k,k) ladder is the uniform
    // baseline every adaptive run is measured against
    if (i > 0 && c.intervals[i] < c.intervals[i - 1])
      throw std::invalid_argument("intervals must be non-decreasing");
  }
}

ClassifyResult classify_region(const InfoGainReport& report, bool nr_active, int decline_streak,
                               const DtssConfig& config) {
  validate_dtss(config);
  const double tau = config.tau;
  ClassifyResult r;
  if (nr_active && report.nr_gain) {
    double nr = *report.nr_gain;
    if (nr <= -tau && decline_streak + 1 >= config.saturation_streak) {
      r.category = TileCategory::Saturated;
      r.exit = true;
      return r;
    }
    if (nr >= 2 * tau) {
      r.category = TileCategory::Growing;
      r.interval = config.intervals[0];
    } else if (nr >= tau) {
      r.category = TileCategory::Growing;
      r.interval = config.intervals[1];
    } else if (report.fr_gain >= tau) {
      r.category = TileCategory::Stable;
      r.interval = config.intervals[2];
    } else {
      r.category = TileCategory::Stable;
      r.interval = config.intervals[3];
    }
    return r;
  }
  double fr = report.fr_gain;
  if (fr >= 2 * tau) {
    r.category = TileCategory::Growing;
    r.interval = config.intervals[0];
  } else if (fr >= tau) {
    r.category = TileCategory::Growing;
    r.interval = config.intervals[1];
  } else if (fr >= 0.0) {
    r.category = TileCategory::Stable;
    r.interval = config.intervals[2];
  } else {
    r.category = TileCategory::Stable;
    r.interval = config.intervals[3];
  }
  return r;
}

void init_tile(TileState& tile, const AdvanceContext& ctx) {
  validate_dtss(ctx.config);
  tile.timestep = ctx.config.t_max;
  tile.category = TileCategory::Bootstrap;
  tile.history.clear();
  tile.history.push_back(ctx.metrics->score(tile.latent, tile.timestep));
  tile.nfe = 0;
  tile.decline_streak = 0;
  tile.best_nr.reset();
  if (tile.history.back().nr_component)
    tile.best_nr.emplace(*tile.history.back().nr_component, tile.latent);
}

namespace {

void advance_impl(TileState& tile, const AdvanceContext& ctx, NormalStream& rng) {
  const DtssConfig& cfg = ctx.config;
  std::optional<InfoGainReport> latest_gain;
  int interval;
  if (tile.history.size() >= 2) {
    const RepresentationScore& cur = tile.history[tile.history.size() - 1];
    const RepresentationScore& prev = tile.history[tile.history.size() - 2];
    InfoGainReport g = info_gain(cur, prev);
    latest_gain = g;
    ClassifyResult res = classify_region(g, g.nr_gain.has_value(), tile.decline_streak, cfg);
    if (res.exit) {
      tile.category = TileCategory::Done;
      tile.exit_reason = "saturated";
      tile.timeline.push_back(TileCategory::Saturated);
      if (tile.best_nr) tile.latent = tile.best_nr->second;  // snapshot restored bitwise
      return;
    }
    tile.decline_streak = (g.nr_gain && *g.nr_gain <= -cfg.tau) ? tile.decline_streak + 1 : 0;
    tile.category = res.category;
    interval = res.interval;
  } else {
    // bootstrap: no gain history yet
    tile.category = TileCategory::Bootstrap;
    interval = cfg.intervals[0];
  }

  int jump = std::min(interval, tile.timestep);  // land at 0 exactly on the last step
  int t_to = tile.timestep - jump;

  auto [alpha, beta] = modulation_coefficients(*ctx.conditioning, latest_gain, ctx.pfj);
  Image o_hat = inject(*ctx.conditioning, alpha, beta);

  DenoiserRequest req{&tile.latent, tile.timestep, &o_hat, ctx.schedule};
  Image eps = (*ctx.denoiser)(req);
  SkipCodebookEntry entry = ctx.codebook->lookup(tile.timestep, t_to, cfg.eta);
  Image noise = entry.sigma > 0.0 ? rng.normal_tile(tile.latent.h, tile.latent.w, tile.latent.c)
                                  : Image(tile.latent.h, tile.latent.w, tile.latent.c, 0.0);
  tile.latent = transition(tile.latent, eps, entry, noise);
  ++tile.nfe;
  tile.timestep = t_to;
  tile.chosen_intervals.push_back(interval);
  tile.timeline.push_back(tile.category);

  RepresentationScore sc = ctx.metrics->score(tile.latent, tile.timestep);
  tile.history.push_back(sc);
  if (sc.nr_component && (!tile.best_nr || *sc.nr_component > tile.best_nr->first))
    tile.best_nr.emplace(*sc.nr_component, tile.latent);

  if (tile.timestep == 0) {
    tile.category = TileCategory::Done;
    tile.exit_reason = "completed";
  }
}

}  // namespace

void advance_tile(TileState& tile, const AdvanceContext& ctx, NormalStream& rng) {
  if (tile.category == TileCategory::Done || tile.category == TileCategory::Failed)
    throw std::logic_error("advance on a finished tile");
  try {
    advance_impl(tile, ctx, rng);
  } catch (const std::exception& e) {
    tile.category = TileCategory::Failed;
    tile.exit_reason = "failed";
    tile.error = e.what();
    throw;
  }
}

void run_tile_loop(TileState& tile, const AdvanceContext& ctx, NormalStream& rng) {
  while (tile.category != TileCategory::Done && tile.category != TileCategory::Failed)
    advance_tile(tile, ctx, rng);
}

double equivalent_timesteps(const TileState& tile, int t_max) {
  if (tile.category != TileCategory::Done)
    throw std::logic_error("equivalent timesteps defined only for finished tiles");
  return static_cast<double>(t_max - tile.timestep);
}

}  // namespace tilesr
