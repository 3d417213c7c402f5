// SPDX-License-Identifier: Apache-2.0
#include "tilesr/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tilesr {
namespace {

void validate(const DenoiserRequest& req) {
  if (!req.x_t || !req.conditioning || !req.schedule)
    throw std::invalid_argument("denoiser request is missing a field");
  if (req.timestep <= 0 || req.timestep > req.schedule->t_max)
    throw std::invalid_argument("denoiser timestep must lie in (0, t_max]");
  if (!req.x_t->same_shape(*req.conditioning))
    throw std::invalid_argument("latent and conditioning dimensions differ");
  if (1.0 - req.schedule->alpha_bar[req.timestep] < 1e-12)
    throw std::runtime_error("schedule leaves no noise to divide by at this timestep");
}

inline int clampi(int i, int lo, int hi) { return i < lo ? lo : (i > hi ? hi : i); }

// 5x5 Gaussian (sigma = 1.0), replicate borders, per channel
Image gauss5(const Image& a) {
  double k1[5];
  double s = 0;
  for (int i = 0; i < 5; ++i) {
    double d = i - 2;
    k1[i] = std::exp(-d * d / 2.0);
    s += k1[i];
  }
  for (int i = 0; i < 5; ++i) k1[i] /= s;
  Image tmp(a.h, a.w, a.c), out(a.h, a.w, a.c);
  for (int ch = 0; ch < a.c; ++ch)
    for (int y = 0; y < a.h; ++y)
      for (int x = 0; x < a.w; ++x) {
        double acc = 0;
        for (int t = -2; t <= 2; ++t) acc += k1[t + 2] * a.at(y, clampi(x + t, 0, a.w - 1), ch);
        tmp.at(y, x, ch) = acc;
      }
  for (int ch = 0; ch < a.c; ++ch)
    for (int y = 0; y < a.h; ++y)
      for (int x = 0; x < a.w; ++x) {
        double acc = 0;
        for (int t = -2; t <= 2; ++t) acc += k1[t + 2] * tmp.at(clampi(y + t, 0, a.h - 1), x, ch);
        out.at(y, x, ch) = acc;
      }
  return out;
}

}  // namespace

Image analytic_epsilon(const DenoiserRequest& req) {
  validate(req);
  double ab = req.schedule->alpha_bar[req.timestep];
  double root_ab = std::sqrt(ab), root_1mab = std::sqrt(1.0 - ab);
  Image out(req.x_t->h, req.x_t->w, req.x_t->c);
  for (std::size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = (req.x_t->v[i] - root_ab * req.conditioning->v[i]) / root_1mab;
  return out;
}

Image shrinkage_denoise(const DenoiserRequest& req, double gamma) {
  validate(req);
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in [0, 1]");
  double ab = req.schedule->alpha_bar[req.timestep];
  double root_ab = std::sqrt(ab), root_1mab = std::sqrt(1.0 - ab);
  Image scaled(req.x_t->h, req.x_t->w, req.x_t->c);
  for (std::size_t i = 0; i < scaled.v.size(); ++i) scaled.v[i] = req.x_t->v[i] / root_ab;
  Image smooth = gauss5(scaled);
  Image out(req.x_t->h, req.x_t->w, req.x_t->c);
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    double x0 = (1.0 - gamma) * smooth.v[i] + gamma * req.conditioning->v[i];
    x0 = std::clamp(x0, -1.0, 1.0);
    out.v[i] = (req.x_t->v[i] - root_ab * x0) / root_1mab;
  }
  return out;
}

}  // namespace tilesr
