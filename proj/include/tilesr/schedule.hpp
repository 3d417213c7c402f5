// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>

#include "tilesr/image.hpp"

namespace tilesr {

// beta is 1-indexed conceptually: beta[t] for t in 1..t_max lives at index t
// (index 0 unused, kept 0). alpha_bar[t] = prod_{k<=t} (1 - beta[k]),
// alpha_bar[0] = 1, strictly decreasing.
struct DiffusionSchedule {
  int t_max = 0;
  std::vector<double> beta;
  std::vector<double> alpha_bar;
};

DiffusionSchedule build_schedule(int t_max, double beta_start, double beta_end);

// Coefficients of one skip transition t_from -> t_to:
//   x_s = c_x * x_t + c_eps * eps_hat + sigma * noise
// eta = 0 gives sigma = 0 exactly; eta = 1 at a unit step reproduces the
// ancestral posterior. sigma^2 <= 1 - alpha_bar[t_to] always, so the c_eps
// radicand is nonnegative.
struct SkipCodebookEntry {
  int t_from = 0, t_to = 0;
  double c_x = 0, c_eps = 0, sigma = 0;
};

// Pure coefficient computation, no caching.
SkipCodebookEntry compute_skip_entry(const DiffusionSchedule& s, int t_from, int t_to, double eta);

// Lazy memoized entry store keyed by (t_from, t_to, eta bits); lookups are
// internally synchronized and repeated lookups return bitwise-identical
// entries.
class SkipCodebook {
 public:
  explicit SkipCodebook(const DiffusionSchedule& s) : sched_(&s) {}

  SkipCodebookEntry lookup(int t_from, int t_to, double eta);
  std::size_t entries() const;

 private:
  const DiffusionSchedule* sched_;
  mutable std::mutex mu_;
  std::map<std::tuple<int, int, std::uint64_t>, SkipCodebookEntry> memo_;
};

Image transition(const Image& x, const Image& eps_hat, const SkipCodebookEntry& e,
                 const Image& noise);

}  // namespace tilesr
