// SPDX-License-Identifier: Apache-2.0
#include "tilesr/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tilesr/io.hpp"
#include "tilesr/tiler.hpp"

namespace tilesr {
namespace {

using nlohmann::json;

int effective_overlap(const RunConfig& c) { return c.overlap.value_or(c.tile_size / 4); }
double effective_sigma(const RunConfig& c) { return c.blend_sigma.value_or(c.tile_size / 4.0); }

std::vector<MetricSpec> effective_metrics(const RunConfig& c) {
  return c.metrics.empty() ? default_metric_specs() : c.metrics;
}

// Catmull-Rom weights for fractional offset t over taps -1..2; exactly
// (0,1,0,0) at t = 0
void catmull_rom(double t, double w[4]) {
  double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

inline int clampi(int i, int lo, int hi) { return i < lo ? lo : (i > hi ? hi : i); }

}  // namespace

Image bicubic_upsample(const Image& img, int scale) {
  if (scale < 1) throw std::invalid_argument("scale must be >= 1");
  if (scale == 1) return img;
  Image out(img.h * scale, img.w * scale, img.c);
  std::vector<std::array<double, 4>> wx(out.w), wy(out.h);
  std::vector<int> ix(out.w), iy(out.h);
  for (int x = 0; x < out.w; ++x) {
    double s = (x + 0.5) / scale - 0.5;
    double fl = std::floor(s);
    ix[x] = static_cast<int>(fl);
    catmull_rom(s - fl, wx[x].data());
  }
  for (int y = 0; y < out.h; ++y) {
    double s = (y + 0.5) / scale - 0.5;
    double fl = std::floor(s);
    iy[y] = static_cast<int>(fl);
    catmull_rom(s - fl, wy[y].data());
  }
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      for (int ch = 0; ch < img.c; ++ch) {
        double acc = 0;
        for (int j = 0; j < 4; ++j) {
          int sy = clampi(iy[y] - 1 + j, 0, img.h - 1);
          double rowacc = 0;
          for (int i = 0; i < 4; ++i)
            rowacc += wx[x][i] * img.at(sy, clampi(ix[x] - 1 + i, 0, img.w - 1), ch);
          acc += wy[y][j] * rowacc;
        }
        out.at(y, x, ch) = acc;
      }
  return out;
}

std::vector<std::string> validate_config(RunConfig& c) {
  std::vector<std::string> errors;
  auto err = [&](const std::string& field, const std::string& what) {
    errors.push_back(field + ": " + what);
  };
  if (c.scale < 1) err("scale", "must be >= 1");
  if (c.tile_size < 16) err("tile_size", "must be >= 16 (metric minimum)");
  if (!c.overlap) c.overlap = c.tile_size / 4;
  if (*c.overlap < 0 || *c.overlap >= c.tile_size)
    err("overlap", "must satisfy 0 <= overlap < tile_size");
  if (c.t_max < 1) err("t_max", "must be >= 1");
  if (!(c.tau > 0.0)) err("tau", "must be positive");
  bool intervals_ok = true;
  for (int i = 0; i < 4; ++i) {
    if (c.intervals[i] <= 0) {
      err("intervals", "must be positive");
      intervals_ok = false;
      break;
    }
    if (i > 0 && c.intervals[i] < c.intervals[i - 1]) {
      err("intervals", "must be non-decreasing");
      intervals_ok = false;
      break;
    }
  }
  if (intervals_ok && c.intervals[3] > c.t_max) err("intervals", "must not exceed t_max");
  if (c.saturation_streak < 1) err("saturation_streak", "must be >= 1");
  if (c.eta < 0.0 || c.eta > 1.0) err("eta", "must lie in [0, 1]");
  if (c.denoiser != "analytic" && c.denoiser != "shrinkage")
    err("denoiser", "must be 'analytic' or 'shrinkage'");
  if (c.gamma < 0.0 || c.gamma > 1.0) err("gamma", "must lie in [0, 1]");
  bool any_fr = false;
  for (const MetricSpec& m : effective_metrics(c)) {
    if (m.weight < 0.0) err(std::string("metrics.") + metric_name(m.id) + ".weight", "must be >= 0");
    if (!(m.norm_lo < m.norm_hi))
      err(std::string("metrics.") + metric_name(m.id) + ".norm", "window must satisfy lo < hi");
    if (!m.no_reference && m.weight > 0.0) any_fr = true;
  }
  if (!any_fr) err("metrics", "at least one full-reference metric must stay active");
  if (!(c.pfj.alpha0 > 0.0)) err("pfj.alpha0", "must be positive");
  if (c.pfj.alpha_max < c.pfj.alpha0) err("pfj.alpha_max", "must be >= alpha0");
  if (!c.blend_sigma) c.blend_sigma = c.tile_size / 4.0;
  if (!(*c.blend_sigma > 0.0)) err("blend_sigma", "must be positive");
  if (c.workers < 1) err("workers", "must be >= 1");
  return errors;
}

RunConfig config_from_json_text(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");
  RunConfig c;
  for (auto& [key, val] : j.items()) {
    if (key == "input_path") c.input_path = val.get<std::string>();
    else if (key == "output_path") c.output_path = val.get<std::string>();
    else if (key == "report_path") c.report_path = val.get<std::string>();
    else if (key == "scale") c.scale = val.get<int>();
    else if (key == "tile_size") c.tile_size = val.get<int>();
    else if (key == "overlap") c.overlap = val.get<int>();
    else if (key == "t_max") c.t_max = val.get<int>();
    else if (key == "tau") c.tau = val.get<double>();
    else if (key == "intervals") {
      auto v = val.get<std::vector<int>>();
      if (v.size() != 4) throw std::invalid_argument("intervals: expected exactly 4 values");
      std::copy(v.begin(), v.end(), c.intervals.begin());
    } else if (key == "saturation_streak") c.saturation_streak = val.get<int>();
    else if (key == "eta") c.eta = val.get<double>();
    else if (key == "seed") c.seed = val.get<std::uint64_t>();
    else if (key == "denoiser") c.denoiser = val.get<std::string>();
    else if (key == "gamma") c.gamma = val.get<double>();
    else if (key == "blend_sigma") c.blend_sigma = val.get<double>();
    else if (key == "workers") c.workers = val.get<int>();
    else if (key == "pfj") {
      for (auto& [pk, pv] : val.items()) {
        if (pk == "alpha0") c.pfj.alpha0 = pv.get<double>();
        else if (pk == "k_alpha") c.pfj.k_alpha = pv.get<double>();
        else if (pk == "alpha_max") c.pfj.alpha_max = pv.get<double>();
        else if (pk == "beta0") c.pfj.beta0 = pv.get<double>();
        else throw std::invalid_argument("pfj." + pk + ": unknown field");
      }
    } else if (key == "metrics") {
      std::vector<MetricSpec> specs;
      for (auto& m : val) {
        MetricSpec s;
        auto id = metric_from_name(m.at("id").get<std::string>());
        if (!id) throw std::invalid_argument("metrics: unknown id " + m.at("id").get<std::string>());
        s.id = *id;
        s.no_reference = (s.id == MetricId::NrNaturalness || s.id == MetricId::NrDetail);
        s.lower_better = (s.id == MetricId::Nlpd);
        // window defaults per metric, overridable
        for (const MetricSpec& d : default_metric_specs())
          if (d.id == s.id) {
            s.norm_lo = d.norm_lo;
            s.norm_hi = d.norm_hi;
          }
        if (m.contains("weight")) s.weight = m.at("weight").get<double>();
        if (m.contains("norm_lo")) s.norm_lo = m.at("norm_lo").get<double>();
        if (m.contains("norm_hi")) s.norm_hi = m.at("norm_hi").get<double>();
        specs.push_back(s);
      }
      c.metrics = std::move(specs);
    } else {
      throw std::invalid_argument(key + ": unknown config field");
    }
  }
  return c;
}

namespace {

// 17-significant-digit float, locale-independent
std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') {
      out.push_back('\\');
      out.push_back(ch);
    } else if (static_cast<unsigned char>(ch) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", ch);
      out += buf;
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

void append_config_json(std::string& s, const RunConfig& c) {
  s += "{";
  s += "\"input_path\":\"" + json_escape(c.input_path) + "\",";
  s += "\"output_path\":\"" + json_escape(c.output_path) + "\",";
  s += "\"report_path\":\"" + json_escape(c.report_path) + "\",";
  s += "\"scale\":" + std::to_string(c.scale) + ",";
  s += "\"tile_size\":" + std::to_string(c.tile_size) + ",";
  s += "\"overlap\":" + std::to_string(c.overlap.value_or(-1)) + ",";
  s += "\"t_max\":" + std::to_string(c.t_max) + ",";
  s += "\"tau\":" + fmt_double(c.tau) + ",";
  s += "\"intervals\":[" + std::to_string(c.intervals[0]) + "," + std::to_string(c.intervals[1]) +
       "," + std::to_string(c.intervals[2]) + "," + std::to_string(c.intervals[3]) + "],";
  s += "\"saturation_streak\":" + std::to_string(c.saturation_streak) + ",";
  s += "\"eta\":" + fmt_double(c.eta) + ",";
  s += "\"seed\":" + std::to_string(c.seed) + ",";
  s += "\"denoiser\":\"" + json_escape(c.denoiser) + "\",";
  s += "\"gamma\":" + fmt_double(c.gamma) + ",";
  s += "\"metrics\":[";
  auto specs = effective_metrics(c);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i) s += ",";
    s += "{\"id\":\"";
    s += metric_name(specs[i].id);
    s += "\",\"weight\":" + fmt_double(specs[i].weight);
    s += ",\"norm_lo\":" + fmt_double(specs[i].norm_lo);
    s += ",\"norm_hi\":" + fmt_double(specs[i].norm_hi) + "}";
  }
  s += "],";
  s += "\"pfj\":{\"alpha0\":" + fmt_double(c.pfj.alpha0) +
       ",\"k_alpha\":" + fmt_double(c.pfj.k_alpha) +
       ",\"alpha_max\":" + fmt_double(c.pfj.alpha_max) +
       ",\"beta0\":" + fmt_double(c.pfj.beta0) + "},";
  s += "\"blend_sigma\":" + fmt_double(c.blend_sigma.value_or(-1.0)) + ",";
  s += "\"workers\":" + std::to_string(c.workers);
  s += "}";
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  std::string s = "{\n";
  s += "\"config\":";
  append_config_json(s, r.config);
  s += ",\n\"tiles\":[\n";
  for (std::size_t i = 0; i < r.tiles.size(); ++i) {
    const TileRecord& t = r.tiles[i];
    if (i) s += ",\n";
    s += "{\"tile_id\":" + std::to_string(t.tile_id);
    s += ",\"origin\":[" + std::to_string(t.origin.first) + "," + std::to_string(t.origin.second) + "]";
    s += ",\"nfe\":" + std::to_string(t.nfe);
    s += ",\"equivalent_timesteps\":" + fmt_double(t.equivalent_timesteps);
    s += ",\"exit_timestep\":" + std::to_string(t.exit_timestep);
    s += ",\"exit_reason\":\"" + json_escape(t.exit_reason) + "\"";
    s += ",\"category_timeline\":[";
    for (std::size_t k = 0; k < t.category_timeline.size(); ++k) {
      if (k) s += ",";
      s += "\"" + json_escape(t.category_timeline[k]) + "\"";
    }
    s += "],\"intervals\":[";
    for (std::size_t k = 0; k < t.intervals.size(); ++k) {
      if (k) s += ",";
      s += std::to_string(t.intervals[k]);
    }
    s += "],\"final_fr\":" + fmt_double(t.final_fr);
    s += ",\"final_nr\":" + (t.final_nr ? fmt_double(*t.final_nr) : std::string("null"));
    s += ",\"best_nr_score\":" + (t.best_nr_score ? fmt_double(*t.best_nr_score) : std::string("null"));
    if (!t.error.empty()) s += ",\"error\":\"" + json_escape(t.error) + "\"";
    s += "}";
  }
  s += "\n],\n\"aggregate\":{";
  s += "\"tiles\":" + std::to_string(r.tiles.size());
  s += ",\"total_nfe\":" + std::to_string(r.total_nfe);
  s += ",\"mean_equivalent_timesteps\":" + fmt_double(r.mean_equivalent_timesteps);
  s += ",\"failed_tiles\":" + std::to_string(r.failed_tiles);
  s += ",\"wall_time_seconds\":" + fmt_double(r.wall_time_seconds);
  s += "}\n}\n";
  return s;
}

RunResult run_adaptive_sr_on(const Image& input, const RunConfig& config_in) {
  auto t0 = std::chrono::steady_clock::now();
  RunConfig config = config_in;
  {
    auto errors = validate_config(config);
    if (!errors.empty()) {
      std::string msg = "invalid config:";
      for (const auto& e : errors) msg += "\n  " + e;
      throw std::invalid_argument(msg);
    }
  }

  // [0,1] -> [-1,1], then upsample to the conditioning canvas
  Image latent_in(input.h, input.w, input.c);
  for (std::size_t i = 0; i < input.v.size(); ++i) latent_in.v[i] = 2.0 * input.v[i] - 1.0;
  Image cond = bicubic_upsample(latent_in, config.scale);

  TileLayout layout = slice_canvas(cond.h, cond.w, config.tile_size, *config.overlap);
  const std::size_t n_tiles = layout.origins.size();

  DiffusionSchedule schedule = build_schedule(config.t_max, 1e-4, 0.02);
  SkipCodebook codebook(schedule);
  DtssConfig dtss{config.tau, config.t_max, config.intervals, config.saturation_streak, config.eta};
  std::vector<MetricSpec> specs = effective_metrics(config);

  DenoiserFn denoiser;
  if (config.denoiser == "analytic") {
    denoiser = [](const DenoiserRequest& req) { return analytic_epsilon(req); };
  } else {
    double gamma = config.gamma;
    denoiser = [gamma](const DenoiserRequest& req) { return shrinkage_denoise(req, gamma); };
  }

  std::vector<TileState> tiles(n_tiles);
  std::vector<Image> refs(n_tiles);
  for (std::size_t k = 0; k < n_tiles; ++k) {
    auto [r0, c0] = layout.origins[k];
    refs[k] = crop(cond, r0, c0, config.tile_size, config.tile_size);
  }

  // Tiles are independent; per-tile RNG streams make the result identical
  // for any worker count.
  std::atomic<std::size_t> next{0};
  std::atomic<bool> any_failed{false};
  auto work = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= n_tiles) return;
      TileState& tile = tiles[k];
      tile.tile_id = static_cast<int>(k);
      tile.origin = layout.origins[k];
      NormalStream rng(stream_seed(config.seed, k));
      tile.latent = rng.normal_tile(config.tile_size, config.tile_size, cond.c);
      StandardMetricsContext metrics(refs[k], specs, config.t_max);
      AdvanceContext ctx;
      ctx.denoiser = &denoiser;
      ctx.schedule = &schedule;
      ctx.codebook = &codebook;
      ctx.metrics = &metrics;
      ctx.conditioning = &refs[k];
      ctx.pfj = config.pfj;
      ctx.config = dtss;
      try {
        init_tile(tile, ctx);
        run_tile_loop(tile, ctx, rng);
      } catch (const std::exception& e) {
        tile.category = TileCategory::Failed;
        tile.exit_reason = "failed";
        if (tile.error.empty()) tile.error = e.what();
        any_failed.store(true);
      }
    }
  };
  int workers = std::min<int>(config.workers, static_cast<int>(n_tiles ? n_tiles : 1));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  RunResult result;
  result.report.config = config;
  double eq_sum = 0;
  for (std::size_t k = 0; k < n_tiles; ++k) {
    const TileState& tile = tiles[k];
    TileRecord rec;
    rec.tile_id = tile.tile_id;
    rec.origin = tile.origin;
    rec.nfe = tile.nfe;
    rec.exit_timestep = tile.timestep;
    rec.exit_reason = tile.exit_reason;
    for (TileCategory c : tile.timeline) rec.category_timeline.emplace_back(category_name(c));
    rec.intervals = tile.chosen_intervals;
    rec.error = tile.error;
    if (tile.category == TileCategory::Done) {
      rec.equivalent_timesteps = equivalent_timesteps(tile, config.t_max);
      const RepresentationScore& last = tile.history.back();
      rec.final_fr = last.fr_component;
      rec.final_nr = last.nr_component;
      if (tile.best_nr) rec.best_nr_score = tile.best_nr->first;
    } else {
      result.report.failed_tiles += 1;
    }
    result.report.total_nfe += tile.nfe;
    eq_sum += rec.equivalent_timesteps;
    result.report.tiles.push_back(std::move(rec));
  }
  result.report.mean_equivalent_timesteps = n_tiles ? eq_sum / n_tiles : 0.0;

  if (result.report.failed_tiles == 0) {
    std::vector<Image> latents;
    latents.reserve(n_tiles);
    for (auto& tile : tiles) latents.push_back(std::move(tile.latent));
    Image canvas = integrate_regions(latents, layout, *config.blend_sigma);
    // back to [0,1]
    result.canvas = Image(canvas.h, canvas.w, canvas.c);
    for (std::size_t i = 0; i < canvas.v.size(); ++i) {
      double v = (canvas.v[i] + 1.0) / 2.0;
      result.canvas.v[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
  }

  auto t1 = std::chrono::steady_clock::now();
  result.report.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

RunResult run_adaptive_sr(const RunConfig& config) {
  if (config.input_path.empty()) throw std::invalid_argument("input_path: required for a file run");
  Image input = read_image(config.input_path);
  RunResult result = run_adaptive_sr_on(input, config);
  if (result.report.failed_tiles == 0 && !config.output_path.empty())
    write_image(config.output_path, result.canvas);
  if (!config.report_path.empty()) {
    std::ofstream out(config.report_path, std::ios::binary);
    if (!out) throw std::runtime_error(config.report_path + ": cannot open for writing");
    out << report_to_json(result.report);
  }
  return result;
}

}  // namespace tilesr
