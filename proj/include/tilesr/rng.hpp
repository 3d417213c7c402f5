// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tilesr/image.hpp"

namespace tilesr {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent per-tile stream seed; two splitmix rounds decorrelate
// neighboring tile ids under any run seed.
inline std::uint64_t stream_seed(std::uint64_t run_seed, std::uint64_t tile_id) {
  std::uint64_t s = run_seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ tile_id;
  return splitmix64(s);
}

// Deterministic standard-normal stream: mt19937_64 (fully specified by the
// standard) plus hand-rolled Box-Muller, since std::normal_distribution is
// implementation-defined.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so log never sees zero
    double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
    double u2 = static_cast<double>(eng_() >> 11) * 0x1p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  Image normal_tile(int h, int w, int c) {
    Image out(h, w, c);
    for (double& x : out.v) x = next();
    return out;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tilesr
