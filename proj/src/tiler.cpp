// SPDX-License-Identifier: Apache-2.0
#include "tilesr/tiler.hpp"

#include <cmath>
#include <stdexcept>

namespace tilesr {
namespace {

std::vector<int> axis_origins(int dim, int tile, int stride) {
  std::vector<int> out;
  for (int pos = 0; pos + tile <= dim; pos += stride) out.push_back(pos);
  if (out.back() != dim - tile) out.push_back(dim - tile);  // clamp final origin inward
  return out;
}

}  // namespace

TileLayout slice_canvas(int canvas_h, int canvas_w, int tile_size, int overlap) {
  if (tile_size <= 0 || tile_size > std::min(canvas_h, canvas_w))
    throw std::invalid_argument("tile size must fit inside the canvas");
  if (overlap < 0 || overlap >= tile_size)
    throw std::invalid_argument("overlap must satisfy 0 <= overlap < tile_size");
  TileLayout l;
  l.canvas_h = canvas_h;
  l.canvas_w = canvas_w;
  l.tile_size = tile_size;
  l.overlap = overlap;
  int stride = tile_size - overlap;
  std::vector<int> rows = axis_origins(canvas_h, tile_size, stride);
  std::vector<int> cols = axis_origins(canvas_w, tile_size, stride);
  for (int r : rows)
    for (int cc : cols) l.origins.emplace_back(r, cc);
  return l;
}

Image gaussian_weight_map(int tile_size, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (tile_size <= 0) throw std::invalid_argument("tile size must be positive");
  double center = (tile_size - 1) / 2.0;
  double dmin = (tile_size % 2 == 1) ? 0.0 : 0.5;
  std::vector<double> axis(tile_size);
  for (int i = 0; i < tile_size; ++i) {
    double d = i - center;
    axis[i] = std::exp(-(d * d - dmin * dmin) / (2 * sigma * sigma));
  }
  Image out(tile_size, tile_size, 1);
  for (int y = 0; y < tile_size; ++y)
    for (int x = 0; x < tile_size; ++x) out.at(y, x) = axis[y] * axis[x];
  return out;
}

Image integrate_regions(const std::vector<Image>& tiles, const TileLayout& layout, double sigma) {
  if (tiles.size() != layout.origins.size())
    throw std::invalid_argument("tile count does not match layout");
  const int ts = layout.tile_size;
  int channels = tiles.empty() ? 1 : tiles[0].c;
  for (const Image& t : tiles)
    if (t.h != ts || t.w != ts || t.c != channels)
      throw std::invalid_argument("tile dimensions do not match layout");

  Image weights = gaussian_weight_map(ts, sigma);
  Image num(layout.canvas_h, layout.canvas_w, channels);
  std::vector<double> den(static_cast<std::size_t>(layout.canvas_h) * layout.canvas_w, 0.0);
  std::vector<int> cover(den.size(), 0);
  std::vector<std::size_t> sole(den.size(), 0);  // contributing tile when cover == 1

  for (std::size_t k = 0; k < tiles.size(); ++k) {
    auto [r0, c0] = layout.origins[k];
    for (int y = 0; y < ts; ++y)
      for (int x = 0; x < ts; ++x) {
        std::size_t p = static_cast<std::size_t>(r0 + y) * layout.canvas_w + (c0 + x);
        double wgt = weights.at(y, x);
        den[p] += wgt;
        cover[p] += 1;
        sole[p] = k;
        for (int ch = 0; ch < channels; ++ch)
          num.at(r0 + y, c0 + x, ch) += wgt * tiles[k].at(y, x, ch);
      }
  }

  Image out(layout.canvas_h, layout.canvas_w, channels);
  for (int y = 0; y < layout.canvas_h; ++y)
    for (int x = 0; x < layout.canvas_w; ++x) {
      std::size_t p = static_cast<std::size_t>(y) * layout.canvas_w + x;
      if (cover[p] == 0) throw std::runtime_error("layout leaves a pixel uncovered");
      if (cover[p] == 1) {
        // single contributor: copy bitwise instead of (w*v)/w
        auto [r0, c0] = layout.origins[sole[p]];
        for (int ch = 0; ch < channels; ++ch)
          out.at(y, x, ch) = tiles[sole[p]].at(y - r0, x - c0, ch);
      } else {
        for (int ch = 0; ch < channels; ++ch) out.at(y, x, ch) = num.at(y, x, ch) / den[p];
      }
    }
  return out;
}

}  // namespace tilesr
