// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "tilesr/image.hpp"
#include "tilesr/schedule.hpp"

namespace tilesr {

// One noise-prediction request. conditioning is the modulated original tile
// (the denoiser's best estimate of the clean content); timestep must be in
// (0, t_max].
struct DenoiserRequest {
  const Image* x_t = nullptr;
  int timestep = 0;
  const Image* conditioning = nullptr;
  const DiffusionSchedule* schedule = nullptr;
};

// Exact-noise oracle: eps = (x_t - sqrt(ab_t) * conditioning) / sqrt(1 - ab_t).
// If conditioning is the true clean tile this recovers the injected noise to
// machine precision.
Image analytic_epsilon(const DenoiserRequest& req);

// Functional stand-in for a learned predictor: the clean estimate blends a
// 5x5 Gaussian smoothing of the rescaled latent with the conditioning,
// clamped to [-1, 1], then is converted to a noise prediction.
Image shrinkage_denoise(const DenoiserRequest& req, double gamma);

using DenoiserFn = std::function<Image(const DenoiserRequest&)>;

}  // namespace tilesr
