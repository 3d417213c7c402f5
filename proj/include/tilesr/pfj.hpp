// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>

#include "tilesr/image.hpp"
#include "tilesr/metrics.hpp"

namespace tilesr {

struct ModulationParams {
  double alpha0 = 1.0;
  double k_alpha = 0.5;
  double alpha_max = 1.5;
  double beta0 = 0.0;
};

// Closed-form stand-in for a learned coefficient predictor: alpha grows
// monotonically with positive NR gain up to alpha_max; negative or absent
// gain leaves the base coefficients. o is accepted so alternative predictors
// can use tile content.
std::pair<double, double> modulation_coefficients(const Image& o,
                                                  const std::optional<InfoGainReport>& report,
                                                  const ModulationParams& params);

// o_hat = alpha * o + beta, elementwise
Image inject(const Image& o, double alpha, double beta);

}  // namespace tilesr
