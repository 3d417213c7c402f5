// SPDX-License-Identifier: Apache-2.0
#include "tilesr/pfj.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tilesr {

std::pair<double, double> modulation_coefficients(const Image& o,
                                                  const std::optional<InfoGainReport>& report,
                                                  const ModulationParams& params) {
  (void)o;
  if (!(params.alpha0 > 0.0) || !(params.alpha_max >= params.alpha0))
    throw std::invalid_argument("modulation params require alpha_max >= alpha0 > 0");
  // negative sensitivity would break the [alpha0, alpha_max] bound promised
  // to the controller
  if (params.k_alpha < 0.0) throw std::invalid_argument("k_alpha must be nonnegative");
  double alpha = params.alpha0;
  if (report && report->nr_gain)
    alpha = std::min(params.alpha_max, params.alpha0 + params.k_alpha * std::max(*report->nr_gain, 0.0));
  return {alpha, params.beta0};
}

Image inject(const Image& o, double alpha, double beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw std::invalid_argument("modulation coefficients must be finite");
  if (alpha == 1.0 && beta == 0.0) return o;  // identity stays bitwise
  Image out(o.h, o.w, o.c);
  for (std::size_t i = 0; i < o.v.size(); ++i) out.v[i] = alpha * o.v[i] + beta;
  return out;
}

}  // namespace tilesr
