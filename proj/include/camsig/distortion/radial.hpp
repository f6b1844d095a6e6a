#pragma once

#include <cmath>

#include "camsig/common.hpp"
#include "camsig/image/image.hpp"

namespace camsig::distortion {

// Polynomial radial model: scaling factor d = 1 + k1 r^2 + k2 r^4 applied to
// normalized coordinates, with k2 tied to k1.
struct DistortionParams {
  double k1 = 0.0;
  double k2 = 0.0;

  static DistortionParams from_k1(double k1) {
    return DistortionParams{k1, derived_k2(k1)};
  }
  static double derived_k2(double k1) { return 0.019 * k1 + 0.805 * k1 * k1; }
};

inline double distortion_scale(double r, const DistortionParams& p) {
  const double r2 = r * r;
  return 1.0 + p.k1 * r2 + p.k2 * r2 * r2;
}

// Coordinates are normalized so the image center is the origin and the
// farthest point (a corner) is at distance 1.
inline std::pair<double, double> distort_point(double x, double y,
                                               const DistortionParams& p) {
  const double d = distortion_scale(std::sqrt(x * x + y * y), p);
  return {d * x, d * y};
}

// Inverse of r -> r * d(r) by bisection; the map is monotone on [0, 2] for
// the sampled k1 range.
inline double invert_radial(double r_distorted, const DistortionParams& p) {
  if (r_distorted <= 0.0) return 0.0;
  double lo = 0.0, hi = 2.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid * distortion_scale(mid, p) < r_distorted) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Inverse-warp resampling with bilinear interpolation; pixels mapping outside
// the source stay black.
inline img::Image distort_image(const img::Image& src, const DistortionParams& p) {
  if (src.width != src.height) throw DataError("distort_image: square input required");
  const int n = src.width;
  img::Image out(n, n, src.channels, 0);
  const double c = (n - 1) / 2.0;
  const double norm = std::sqrt(2.0) * c;  // distance from center to a corner
  if (norm <= 0.0) return src;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double xd = (x - c) / norm;
      const double yd = (y - c) / norm;
      const double rd = std::sqrt(xd * xd + yd * yd);
      double sx_px, sy_px;
      if (rd == 0.0) {
        sx_px = c;
        sy_px = c;
      } else {
        const double r = invert_radial(rd, p);
        const double scale = r / rd;
        sx_px = c + xd * scale * norm;
        sy_px = c + yd * scale * norm;
      }
      if (sx_px < 0.0 || sy_px < 0.0 || sx_px > n - 1 || sy_px > n - 1) continue;
      const int x0 = static_cast<int>(std::floor(sx_px));
      const int y0 = static_cast<int>(std::floor(sy_px));
      const int x1 = std::min(n - 1, x0 + 1);
      const int y1 = std::min(n - 1, y0 + 1);
      const double wx = sx_px - x0;
      const double wy = sy_px - y0;
      for (int ch = 0; ch < src.channels; ++ch) {
        const double top = src.at(x0, y0, ch) * (1 - wx) + src.at(x1, y0, ch) * wx;
        const double bot = src.at(x0, y1, ch) * (1 - wx) + src.at(x1, y1, ch) * wx;
        out.at(x, y, ch) = static_cast<uint8_t>(std::lround(top * (1 - wy) + bot * wy));
      }
    }
  }
  return out;
}

inline DistortionParams sample_k1(Rng& rng) {
  return DistortionParams::from_k1(rng.uniform(-0.4, 0.0));
}

// 20 equal bins over [-0.4, 0], left-closed / right-open, last bin closed.
struct K1Binner {
  static constexpr int kBins = 20;
  static constexpr double kLo = -0.4;
  static constexpr double kHi = 0.0;
  static constexpr double kWidth = (kHi - kLo) / kBins;
};

inline int bin_k1(double k1) {
  if (k1 < K1Binner::kLo || k1 > K1Binner::kHi)
    throw DataError("bin_k1: k1 outside [-0.4, 0]");
  const int idx = static_cast<int>(std::floor((k1 - K1Binner::kLo) / K1Binner::kWidth));
  return std::min(idx, K1Binner::kBins - 1);
}

}  // namespace camsig::distortion
