#pragma once

#include <cmath>
#include <string>

#include "camsig/common.hpp"
#include "camsig/image/image.hpp"

namespace camsig::img {

enum class MaskShape { Rectangle, Ellipse };

struct SpliceResult {
  Image composite;        // host outside the mask, donor inside
  Image mask;             // single channel, 0 / 255
  double area_fraction = 0.0;
};

// Donor pixels replace host pixels wherever mask != 0, at the same
// coordinates; the donor must cover the masked region.
inline SpliceResult composite_with_mask(const Image& host, const Image& donor,
                                        const Image& mask) {
  if (mask.width != host.width || mask.height != host.height || mask.channels != 1)
    throw DataError("composite_with_mask: mask must be single-channel at host size");
  int max_x = -1, max_y = -1;
  size_t area = 0;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y, 0)) {
        ++area;
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
      }
  if (area > 0 && (donor.width <= max_x || donor.height <= max_y ||
                   donor.channels != host.channels))
    throw DataError("composite_with_mask: donor does not cover the masked region");
  SpliceResult r;
  r.composite = host;
  r.mask = mask;
  r.area_fraction = static_cast<double>(area) / (static_cast<double>(mask.width) * mask.height);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y, 0))
        for (int c = 0; c < host.channels; ++c) r.composite.at(x, y, c) = donor.at(x, y, c);
  return r;
}

// Draws a random axis-aligned rectangle or ellipse whose area fraction lands
// inside [min_frac, max_frac].
inline Image random_mask(int width, int height, MaskShape shape, Rng& rng,
                         double min_frac = 0.05, double max_frac = 0.40) {
  if (!(min_frac > 0.0 && min_frac <= max_frac && max_frac < 1.0))
    throw DataError("random_mask: invalid area bounds");
  const double total = static_cast<double>(width) * height;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double target = rng.uniform(min_frac, max_frac);
    const double aspect = rng.uniform(0.6, 1.6667);
    double area_px = target * total;
    if (shape == MaskShape::Ellipse) area_px *= 4.0 / 3.14159265358979323846;
    int w = static_cast<int>(std::lround(std::sqrt(area_px * aspect)));
    int h = static_cast<int>(std::lround(std::sqrt(area_px / aspect)));
    w = std::min(w, width - 2);
    h = std::min(h, height - 2);
    if (w < 2 || h < 2) continue;
    const int x0 = 1 + rng.uniform_int(width - w - 1);
    const int y0 = 1 + rng.uniform_int(height - h - 1);
    Image mask(width, height, 1, 0);
    size_t area = 0;
    if (shape == MaskShape::Rectangle) {
      for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) {
          mask.at(x, y, 0) = 255;
          ++area;
        }
    } else {
      const double cx = x0 + w / 2.0, cy = y0 + h / 2.0;
      const double rx = w / 2.0, ry = h / 2.0;
      for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) {
          const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
          if (dx * dx + dy * dy <= 1.0) {
            mask.at(x, y, 0) = 255;
            ++area;
          }
        }
    }
    const double frac = static_cast<double>(area) / total;
    if (frac >= min_frac && frac <= max_frac) return mask;
  }
  throw DataError("random_mask: could not place a mask within the area bounds");
}

// Synthetic splice: composite a donor region into a host image and return the
// ground-truth mask alongside.
inline SpliceResult synth_splice(const Image& host, const Image& donor, MaskShape shape,
                                 Rng& rng, double min_frac = 0.05, double max_frac = 0.40) {
  if (donor.width < host.width || donor.height < host.height)
    throw DataError("synth_splice: donor smaller than host");
  Image mask = random_mask(host.width, host.height, shape, rng, min_frac, max_frac);
  return composite_with_mask(host, donor, mask);
}

}  // namespace camsig::img
