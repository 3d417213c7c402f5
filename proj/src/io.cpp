// SPDX-License-Identifier: Apache-2.0
#include "tilesr/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace tilesr {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

Image read_png(const std::string& path, std::FILE* f) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "png reader allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(path, "png info allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "png decode error");
  }
  png_init_io(png, f);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info), h = png_get_image_height(png, info);
  int color = png_get_color_type(png, info), depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_strip_16(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "unsupported channel count after expansion");
  }
  std::vector<unsigned char> raster(static_cast<std::size_t>(h) * w * channels);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = raster.data() + static_cast<std::size_t>(y) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(static_cast<int>(h), static_cast<int>(w), channels);
  for (std::size_t i = 0; i < img.v.size(); ++i) img.v[i] = raster[i] / 255.0;
  return img;
}

Image read_pgm(const std::string& path, std::FILE* f) {
  auto next_token = [&]() -> std::string {
    std::string tok;
    int ch;
    while ((ch = std::fgetc(f)) != EOF) {
      if (ch == '#') {  // comment to end of line
        while ((ch = std::fgetc(f)) != EOF && ch != '\n') {
        }
        continue;
      }
      if (std::isspace(ch)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) fail(path, "truncated pgm header");
    return tok;
  };
  if (next_token() != "P5") fail(path, "only binary (P5) pgm is supported");
  int w = std::stoi(next_token());
  int h = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0) fail(path, "bad pgm dimensions");
  if (maxval != 255) fail(path, "pgm maxval must be 255");
  std::vector<unsigned char> raster(static_cast<std::size_t>(h) * w);
  if (std::fread(raster.data(), 1, raster.size(), f) != raster.size())
    fail(path, "truncated pgm payload");
  Image img(h, w, 1);
  for (std::size_t i = 0; i < img.v.size(); ++i) img.v[i] = raster[i] / 255.0;
  return img;
}

void write_png(const std::string& path, const Image& img) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "png writer allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(path, "png info allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "png encode error");
  }
  png_init_io(png, f.get());
  int color = img.c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, img.w, img.h, 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(static_cast<std::size_t>(img.w) * img.c);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x)
      for (int ch = 0; ch < img.c; ++ch)
        row[static_cast<std::size_t>(x) * img.c + ch] = quantize8(img.at(y, x, ch));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_pgm(const std::string& path, const Image& img) {
  if (img.c != 1) fail(path, "pgm output requires a single channel");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(path, "cannot open for writing");
  std::fprintf(f.get(), "P5\n%d %d\n255\n", img.w, img.h);
  std::vector<unsigned char> row(static_cast<std::size_t>(img.w));
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) row[x] = quantize8(img.at(y, x));
    if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size())
      fail(path, "short write");
  }
}

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

unsigned char quantize8(double v) {
  v = std::clamp(v, 0.0, 1.0) * 255.0;
  return static_cast<unsigned char>(std::nearbyint(v));  // ties to even
}

Image read_image(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(path, "cannot open");
  unsigned char magic[2] = {0, 0};
  if (std::fread(magic, 1, 2, f.get()) != 2) fail(path, "file too short");
  std::rewind(f.get());
  if (magic[0] == 0x89 && magic[1] == 'P') return read_png(path, f.get());
  if (magic[0] == 'P' && magic[1] == '5') return read_pgm(path, f.get());
  fail(path, "unrecognized image format (need png or binary pgm)");
}

void write_image(const std::string& path, const Image& img) {
  if (img.h <= 0 || img.w <= 0 || (img.c != 1 && img.c != 3) ||
      img.v.size() != static_cast<std::size_t>(img.h) * img.w * img.c)
    throw std::invalid_argument(path + ": refusing to write a malformed image");
  if (has_suffix(path, ".pgm")) {
    write_pgm(path, img);
    return;
  }
  write_png(path, img);
}

}  // namespace tilesr
