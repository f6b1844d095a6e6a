#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <png.h>

#include "camsig/common.hpp"

namespace camsig::img {

// Interleaved 8-bit image, 1 (gray) or 3 (RGB) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> data;

  Image() = default;
  Image(int w, int h, int c, uint8_t fill = 0)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {}

  uint8_t& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  uint8_t at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  size_t size_bytes() const { return data.size(); }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

namespace detail {
struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};
struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};
}  // namespace detail

// Reads an 8-bit PNG as RGB (3 channels) or grayscale (1 channel). Palette
// and 16-bit inputs are normalized to 8-bit; alpha is stripped.
inline Image read_png(const std::string& path) {
  detail::PngReadCloser s;
  s.fp = std::fopen(path.c_str(), "rb");
  if (!s.fp) throw DataError("cannot open image: " + path);
  s.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  s.info = png_create_info_struct(s.png);
  if (!s.png || !s.info) throw DataError("png init failed: " + path);
  if (setjmp(png_jmpbuf(s.png))) throw DataError("corrupt PNG: " + path);
  png_init_io(s.png, s.fp);
  png_read_info(s.png, s.info);

  png_set_strip_16(s.png);
  png_set_packing(s.png);
  if (png_get_color_type(s.png, s.info) == PNG_COLOR_TYPE_PALETTE)
    png_set_palette_to_rgb(s.png);
  if (png_get_color_type(s.png, s.info) == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(s.png, s.info) < 8)
    png_set_expand_gray_1_2_4_to_8(s.png);
  png_set_strip_alpha(s.png);
  png_read_update_info(s.png, s.info);

  const int w = static_cast<int>(png_get_image_width(s.png, s.info));
  const int h = static_cast<int>(png_get_image_height(s.png, s.info));
  const int c = static_cast<int>(png_get_channels(s.png, s.info));
  if (c != 1 && c != 3) throw DataError("unsupported PNG channel count: " + path);

  Image img(w, h, c);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = img.data.data() + static_cast<size_t>(y) * w * c;
  png_read_image(s.png, rows.data());
  return img;
}

inline void write_png(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw DataError("write_png: only 1- or 3-channel images supported");
  detail::PngWriteCloser s;
  s.fp = std::fopen(path.c_str(), "wb");
  if (!s.fp) throw DataError("cannot write image: " + path);
  s.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  s.info = png_create_info_struct(s.png);
  if (!s.png || !s.info) throw DataError("png init failed: " + path);
  if (setjmp(png_jmpbuf(s.png))) throw DataError("png write failed: " + path);
  png_init_io(s.png, s.fp);
  png_set_IHDR(s.png, s.info, img.width, img.height, 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(s.png, s.info);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(img.data.data() +
                                    static_cast<size_t>(y) * img.width * img.channels);
  png_write_image(s.png, rows.data());
  png_write_end(s.png, nullptr);
}

// Bilinear resize (used by probe preprocessing and the synthetic pipelines).
inline Image resize_bilinear(const Image& src, int out_w, int out_h) {
  Image out(out_w, out_h, src.channels);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = std::max(0, std::min(src.height - 1, static_cast<int>(std::floor(fy))));
    const int y1 = std::min(src.height - 1, y0 + 1);
    const double wy = std::max(0.0, std::min(1.0, fy - y0));
    for (int x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = std::max(0, std::min(src.width - 1, static_cast<int>(std::floor(fx))));
      const int x1 = std::min(src.width - 1, x0 + 1);
      const double wx = std::max(0.0, std::min(1.0, fx - x0));
      for (int c = 0; c < src.channels; ++c) {
        const double top = src.at(x0, y0, c) * (1 - wx) + src.at(x1, y0, c) * wx;
        const double bot = src.at(x0, y1, c) * (1 - wx) + src.at(x1, y1, c) * wx;
        out.at(x, y, c) = static_cast<uint8_t>(std::lround(top * (1 - wy) + bot * wy));
      }
    }
  }
  return out;
}

inline Image center_crop(const Image& src, int side) {
  if (src.width < side || src.height < side)
    throw DataError("center_crop: image smaller than crop side");
  Image out(side, side, src.channels);
  const int x0 = (src.width - side) / 2;
  const int y0 = (src.height - side) / 2;
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(x0 + x, y0 + y, c);
  return out;
}

}  // namespace camsig::img
