// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "tilesr/image.hpp"

namespace tilesr {

// All tiles are exactly tile_size x tile_size; the last origin per axis is
// clamped inward so the canvas is fully covered without padding.
struct TileLayout {
  int canvas_h = 0, canvas_w = 0;
  int tile_size = 0, overlap = 0;
  std::vector<std::pair<int, int>> origins;  // row-major, unique
};

TileLayout slice_canvas(int canvas_h, int canvas_w, int tile_size, int overlap);

// Separable Gaussian weights with peak value 1 at the center pixel(s); even
// sizes peak at the two middle pixels per axis. Single-channel raster.
Image gaussian_weight_map(int tile_size, double sigma);

// Normalized Gaussian blend of finished tiles: output(p) is the weight-
// normalized convex combination of covering tiles. Pixels covered by exactly
// one tile copy that tile's values bitwise. Tiles are ordered as
// layout.origins.
Image integrate_regions(const std::vector<Image>& tiles, const TileLayout& layout, double sigma);

}  // namespace tilesr
