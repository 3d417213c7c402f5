// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstring>
#include <thread>
#include <vector>

#include "frozen.hpp"
#include "tilesr/rng.hpp"
#include "tilesr/schedule.hpp"

using namespace tilesr;

namespace {

bool rel_close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

TEST_CASE("schedule satisfies range, monotonicity and product invariants") {
  DiffusionSchedule s = build_schedule(1000, 1e-4, 0.02);
  CHECK(s.alpha_bar[0] == 1.0);
  double prod = 1.0;
  for (int t = 1; t <= 1000; ++t) {
    CHECK(s.beta[t] > 0.0);
    CHECK(s.beta[t] < 1.0);
    CHECK(s.beta[t] >= s.beta[t - 1]);
    CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
    prod *= 1.0 - s.beta[t];
    CHECK(rel_close(s.alpha_bar[t], prod, 1e-12));
  }
}

TEST_CASE("schedule endpoints match the independent product table") {
  DiffusionSchedule s = build_schedule(1000, 1e-4, 0.02);
  CHECK(rel_close(s.alpha_bar[1], frozen::kAlphaBar1T1000, 1e-12));
  CHECK(rel_close(s.alpha_bar[180], frozen::kAlphaBar180T1000, 1e-12));
  CHECK(rel_close(s.alpha_bar[200], frozen::kAlphaBar200T1000, 1e-12));
  CHECK(rel_close(s.alpha_bar[1000], frozen::kAlphaBar1000T1000, 1e-12));
}

TEST_CASE("single-step schedule is the lone factor") {
  DiffusionSchedule s = build_schedule(1, 0.01, 0.01);
  CHECK(s.alpha_bar[1] == doctest::Approx(frozen::kAlphaBar1T1).epsilon(1e-15));
}

TEST_CASE("schedule rejects invalid ranges") {
  CHECK_THROWS_AS(build_schedule(0, 1e-4, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.0, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.03, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 1e-4, 1.0), std::invalid_argument);
}

TEST_CASE("skip entry coefficients match the closed forms") {
  DiffusionSchedule s = build_schedule(1000, 1e-4, 0.02);
  SkipCodebookEntry e = compute_skip_entry(s, 200, 180, 0.0);
  CHECK(e.sigma == 0.0);
  CHECK(rel_close(e.c_x, frozen::kCx200To180T1000, 1e-12));
  double expect_ceps =
      std::sqrt(1.0 - s.alpha_bar[180]) - e.c_x * std::sqrt(1.0 - s.alpha_bar[200]);
  CHECK(e.c_eps == doctest::Approx(expect_ceps).epsilon(1e-14));
}

TEST_CASE("eta zero keeps sigma exactly zero on every jump") {
  DiffusionSchedule s = build_schedule(500, 1e-4, 0.02);
  for (int t_from : {1, 2, 9, 77, 250, 500})
    for (int t_to : {0, 1, 8, 76, 249}) {
      if (t_to >= t_from) continue;
      SkipCodebookEntry e = compute_skip_entry(s, t_from, t_to, 0.0);
      CHECK(e.sigma == 0.0);
    }
}

TEST_CASE("sigma variance bound holds across eta and jump sizes") {
  DiffusionSchedule s = build_schedule(300, 1e-4, 0.02);
  for (double eta : {0.0, 0.25, 0.5, 0.75, 1.0})
    for (int t_from : {2, 10, 50, 150, 300})
      for (int t_to : {0, 1, 5, 40, 149}) {
        if (t_to >= t_from) continue;
        SkipCodebookEntry e = compute_skip_entry(s, t_from, t_to, eta);
        CHECK(e.sigma * e.sigma <= 1.0 - s.alpha_bar[t_to] + 1e-15);
        CHECK(rel_close(e.c_x, std::sqrt(s.alpha_bar[t_to] / s.alpha_bar[t_from]), 1e-12));
      }
}

TEST_CASE("eta one at a unit step reproduces the ancestral posterior") {
  DiffusionSchedule s = build_schedule(400, 1e-4, 0.02);
  for (int t : {1, 2, 17, 99, 256, 400}) {
    SkipCodebookEntry e = compute_skip_entry(s, t, t - 1, 1.0);
    double ab_t = s.alpha_bar[t], ab_p = s.alpha_bar[t - 1];
    double alpha_t = ab_t / ab_p;  // 1 - beta_t up to rounding
    double beta_t = 1.0 - alpha_t;
    // posterior x_{t-1} mean coefficients in (x_t, eps) form
    double sigma_sq = (1.0 - ab_p) / (1.0 - ab_t) * beta_t;
    double cx = 1.0 / std::sqrt(alpha_t);
    double ceps = -beta_t / (std::sqrt(alpha_t) * std::sqrt(1.0 - ab_t));
    CHECK(rel_close(e.sigma * e.sigma, sigma_sq, 1e-10));
    CHECK(rel_close(e.c_x, cx, 1e-10));
    CHECK(rel_close(e.c_eps, ceps, 1e-10));
  }
}

TEST_CASE("ordering violations and bad eta are rejected") {
  DiffusionSchedule s = build_schedule(100, 1e-4, 0.02);
  CHECK_THROWS_AS(compute_skip_entry(s, 50, 50, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(compute_skip_entry(s, 50, 60, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(compute_skip_entry(s, 101, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(compute_skip_entry(s, 50, 40, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(compute_skip_entry(s, 50, 40, 1.5), std::invalid_argument);
}

TEST_CASE("codebook lookups are cached, bitwise repeatable and thread-safe") {
  DiffusionSchedule s = build_schedule(200, 1e-4, 0.02);
  SkipCodebook cb(s);
  SkipCodebookEntry a = cb.lookup(200, 150, 0.3);
  SkipCodebookEntry b = cb.lookup(200, 150, 0.3);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  CHECK(cb.entries() == 1);

  std::vector<std::thread> pool;
  for (int i = 0; i < 8; ++i)
    pool.emplace_back([&cb] {
      for (int t = 2; t <= 200; t += 3)
        for (int d = 1; d <= 2; ++d) cb.lookup(t, t - d, 0.5);
    });
  for (auto& th : pool) th.join();
  SkipCodebookEntry c = cb.lookup(200, 150, 0.3);
  CHECK(std::memcmp(&a, &c, sizeof a) == 0);
}

TEST_CASE("transition collapses to scaling when eps and sigma vanish") {
  DiffusionSchedule s = build_schedule(100, 1e-4, 0.02);
  SkipCodebookEntry e = compute_skip_entry(s, 80, 30, 0.0);
  Image x(4, 4, 1);
  NormalStream rs(3);
  for (double& v : x.v) v = rs.next();
  Image zero(4, 4, 1, 0.0);
  Image out = transition(x, zero, e, zero);
  for (std::size_t i = 0; i < x.v.size(); ++i)
    CHECK(out.v[i] == doctest::Approx(e.c_x * x.v[i]).epsilon(1e-15));
}

TEST_CASE("transition moves clean-manifold points along the manifold") {
  DiffusionSchedule s = build_schedule(100, 1e-4, 0.02);
  SkipCodebookEntry e = compute_skip_entry(s, 60, 20, 0.0);
  Image c(3, 5, 1);
  NormalStream rs(11);
  for (double& v : c.v) v = rs.next();
  Image x(3, 5, 1), zero(3, 5, 1, 0.0);
  for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] = std::sqrt(s.alpha_bar[60]) * c.v[i];
  Image out = transition(x, zero, e, zero);
  for (std::size_t i = 0; i < x.v.size(); ++i)
    CHECK(out.v[i] == doctest::Approx(std::sqrt(s.alpha_bar[20]) * c.v[i]).epsilon(1e-12));
}

TEST_CASE("transition rejects mismatched dimensions") {
  DiffusionSchedule s = build_schedule(100, 1e-4, 0.02);
  SkipCodebookEntry e = compute_skip_entry(s, 50, 10, 0.0);
  Image a(4, 4, 1), b(4, 5, 1), z(4, 4, 1);
  CHECK_THROWS_AS(transition(a, b, e, z), std::invalid_argument);
}
