// SPDX-License-Identifier: Apache-2.0
#include "tilesr/schedule.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace tilesr {

DiffusionSchedule build_schedule(int t_max, double beta_start, double beta_end) {
  if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw std::invalid_argument("beta range must satisfy 0 < beta_start <= beta_end < 1");
  DiffusionSchedule s;
  s.t_max = t_max;
  s.beta.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
  s.alpha_bar.assign(static_cast<std::size_t>(t_max) + 1, 1.0);
  for (int t = 1; t <= t_max; ++t) {
    s.beta[t] = (t_max == 1)
                    ? beta_start
                    : beta_start + (beta_end - beta_start) * (t - 1) / static_cast<double>(t_max - 1);
    s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - s.beta[t]);
  }
  return s;
}

SkipCodebookEntry compute_skip_entry(const DiffusionSchedule& s, int t_from, int t_to, double eta) {
  if (t_to >= t_from) throw std::invalid_argument("skip transition requires t_to < t_from");
  if (t_to < 0 || t_from > s.t_max) throw std::invalid_argument("timestep outside schedule");
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta must lie in [0, 1]");
  double ab_t = s.alpha_bar[t_from], ab_s = s.alpha_bar[t_to];
  SkipCodebookEntry e;
  e.t_from = t_from;
  e.t_to = t_to;
  e.sigma = eta * std::sqrt((1.0 - ab_s) / (1.0 - ab_t)) * std::sqrt(1.0 - ab_t / ab_s);
  e.c_x = std::sqrt(ab_s / ab_t);
  double rad = 1.0 - ab_s - e.sigma * e.sigma;
  if (rad < 0.0) rad = 0.0;  // representable only through rounding; clamp
  e.c_eps = std::sqrt(rad) - e.c_x * std::sqrt(1.0 - ab_t);
  return e;
}

SkipCodebookEntry SkipCodebook::lookup(int t_from, int t_to, double eta) {
  auto key = std::make_tuple(t_from, t_to, std::bit_cast<std::uint64_t>(eta));
  std::lock_guard<std::mutex> lock(mu_);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  SkipCodebookEntry e = compute_skip_entry(*sched_, t_from, t_to, eta);
  memo_.emplace(key, e);
  return e;
}

std::size_t SkipCodebook::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.size();
}

Image transition(const Image& x, const Image& eps_hat, const SkipCodebookEntry& e,
                 const Image& noise) {
  if (!x.same_shape(eps_hat) || !x.same_shape(noise))
    throw std::invalid_argument("transition operands must share dimensions");
  Image out(x.h, x.w, x.c);
  for (std::size_t i = 0; i < x.v.size(); ++i)
    out.v[i] = e.c_x * x.v[i] + e.c_eps * eps_hat.v[i] + e.sigma * noise.v[i];
  return out;
}

}  // namespace tilesr
