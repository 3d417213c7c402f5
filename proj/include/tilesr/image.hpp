// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace tilesr {

// Row-major float64 raster with interleaved channels (1 = gray, 3 = RGB).
struct Image {
  int h = 0, w = 0, c = 1;
  std::vector<double> v;

  Image() = default;
  Image(int height, int width, int channels = 1, double fill = 0.0);

  double& at(int y, int x, int ch = 0) {
    return v[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }
  double at(int y, int x, int ch = 0) const {
    return v[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Image& o) const { return h == o.h && w == o.w && c == o.c; }
};

Image crop(const Image& img, int y0, int x0, int ch, int cw);

// true only if shapes match and every payload double is bit-identical
bool bit_equal(const Image& a, const Image& b);

}  // namespace tilesr
