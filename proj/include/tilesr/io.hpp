// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "tilesr/image.hpp"

namespace tilesr {

// 8-bit PNG (gray or RGB) or binary PGM, chosen by extension on write and by
// magic bytes on read. Samples map to [0,1] as v/255.
Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& img);

// round-half-to-even quantization of a [0,1] value to 0..255
unsigned char quantize8(double v);

}  // namespace tilesr
