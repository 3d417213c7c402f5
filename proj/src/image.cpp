// SPDX-License-Identifier: Apache-2.0
#include "tilesr/image.hpp"

#include <cstring>
#include <stdexcept>

namespace tilesr {

Image::Image(int height, int width, int channels, double fill)
    : h(height), w(width), c(channels),
      v(static_cast<std::size_t>(height) * width * channels, fill) {
  if (height <= 0 || width <= 0 || (channels != 1 && channels != 3))
    throw std::invalid_argument("image dimensions must be positive with 1 or 3 channels");
}

Image crop(const Image& img, int y0, int x0, int ch, int cw) {
  if (y0 < 0 || x0 < 0 || y0 + ch > img.h || x0 + cw > img.w)
    throw std::invalid_argument("crop rectangle outside image");
  Image out(ch, cw, img.c);
  for (int y = 0; y < ch; ++y)
    std::memcpy(&out.v[static_cast<std::size_t>(y) * cw * img.c],
                &img.v[(static_cast<std::size_t>(y0 + y) * img.w + x0) * img.c],
                static_cast<std::size_t>(cw) * img.c * sizeof(double));
  return out;
}

bool bit_equal(const Image& a, const Image& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.v.data(), b.v.data(), a.v.size() * sizeof(double)) == 0;
}

}  // namespace tilesr
