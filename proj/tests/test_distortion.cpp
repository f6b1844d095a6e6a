#include <doctest.h>

#include <cmath>

#include "camsig/distortion/radial.hpp"

using namespace camsig;
using namespace camsig::distortion;

TEST_SUITE("distort_point") {
  TEST_CASE("origin is a fixed point for any k1") {
    for (double k1 : {-0.4, -0.2, -0.05, 0.0}) {
      auto [x, y] = distort_point(0.0, 0.0, DistortionParams::from_k1(k1));
      CHECK(x == 0.0);
      CHECK(y == 0.0);
    }
  }

  TEST_CASE("k1 = 0 is the identity map") {
    auto p = DistortionParams::from_k1(0.0);
    CHECK(p.k2 == 0.0);
    for (double x : {-0.9, -0.3, 0.0, 0.5, 1.0})
      for (double y : {-0.7, 0.0, 0.6}) {
        auto [xd, yd] = distort_point(x, y, p);
        CHECK(xd == doctest::Approx(x).epsilon(1e-15));
        CHECK(yd == doctest::Approx(y).epsilon(1e-15));
      }
  }

  TEST_CASE("k1 = -0.4 at r = 1 scales by exactly 0.7212") {
    auto p = DistortionParams::from_k1(-0.4);
    CHECK(std::abs(distortion_scale(1.0, p) - 0.7212) < 1e-12);
    auto [xd, yd] = distort_point(1.0, 0.0, p);
    CHECK(std::abs(xd - 0.7212) < 1e-12);
  }

  TEST_CASE("radial symmetry: rotation commutes with the warp to 1e-12") {
    Rng rng(31);
    for (int t = 0; t < 200; ++t) {
      const double k1 = rng.uniform(-0.4, 0.0);
      auto p = DistortionParams::from_k1(k1);
      const double r = rng.uniform(0.0, 1.0);
      const double a = rng.uniform(0.0, 6.28);
      const double x = r * std::cos(a), y = r * std::sin(a);
      const double theta = rng.uniform(0.0, 6.28);
      const double c = std::cos(theta), s = std::sin(theta);
      // rotate then distort
      auto [xd1, yd1] = distort_point(c * x - s * y, s * x + c * y, p);
      // distort then rotate
      auto [xd0, yd0] = distort_point(x, y, p);
      const double xd2 = c * xd0 - s * yd0, yd2 = s * xd0 + c * yd0;
      CHECK(std::abs(xd1 - xd2) < 1e-12);
      CHECK(std::abs(yd1 - yd2) < 1e-12);
    }
  }

  TEST_CASE("barrel direction: d < 1 for r in (0,1] over the sampled k1 range") {
    for (int ki = 1; ki <= 40; ++ki) {
      const double k1 = -0.01 * ki;
      auto p = DistortionParams::from_k1(k1);
      for (int ri = 1; ri <= 20; ++ri) {
        const double r = ri / 20.0;
        CHECK(distortion_scale(r, p) < 1.0);
      }
    }
  }
}

TEST_SUITE("distort_image") {
  static img::Image gradient_image(int n) {
    img::Image im(n, n, 3);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        im.at(x, y, 0) = static_cast<uint8_t>((x * 255) / (n - 1));
        im.at(x, y, 1) = static_cast<uint8_t>((y * 255) / (n - 1));
        im.at(x, y, 2) = static_cast<uint8_t>(((x + y) * 255) / (2 * n - 2));
      }
    return im;
  }

  TEST_CASE("k1 = 0 reproduces the input exactly") {
    auto im = gradient_image(64);
    auto out = distort_image(im, DistortionParams::from_k1(0.0));
    CHECK(out.data == im.data);
  }

  TEST_CASE("center pixel is invariant for all k1") {
    auto im = gradient_image(65);
    for (double k1 : {-0.4, -0.25, -0.1}) {
      auto out = distort_image(im, DistortionParams::from_k1(k1));
      for (int c = 0; c < 3; ++c) CHECK(out.at(32, 32, c) == im.at(32, 32, c));
    }
  }

  TEST_CASE("non-square input is an error") {
    img::Image im(64, 32, 3);
    CHECK_THROWS_AS(distort_image(im, DistortionParams::from_k1(-0.2)), DataError);
  }

  TEST_CASE("warp then inverse-warp: mean displacement < 0.5 px at k1 = -0.2") {
    // Oracle: per-point Newton root finding, independent of invert_radial.
    auto p = DistortionParams::from_k1(-0.2);
    const int n = 128;
    const double c = (n - 1) / 2.0;
    const double norm = std::sqrt(2.0) * c;
    double total_px = 0.0;
    int count = 0;
    for (int y = 0; y < n; y += 3)
      for (int x = 0; x < n; x += 3) {
        const double xn = (x - c) / norm, yn = (y - c) / norm;
        const double r = std::sqrt(xn * xn + yn * yn);
        auto [xd, yd] = distort_point(xn, yn, p);
        const double rd = std::sqrt(xd * xd + yd * yd);
        // Newton solve r' * d(r') = rd
        double rp = rd;
        for (int it = 0; it < 50; ++it) {
          const double f = rp * distortion_scale(rp, p) - rd;
          const double fp = 1.0 + 3.0 * p.k1 * rp * rp + 5.0 * p.k2 * rp * rp * rp * rp;
          rp -= f / fp;
        }
        const double scale = r > 0 ? rp / r : 1.0;
        const double dx = (xn * scale - xn) * norm;
        const double dy = (yn * scale - yn) * norm;
        total_px += std::sqrt(dx * dx + dy * dy);
        ++count;
      }
    CHECK(total_px / count < 0.5);
  }
}

TEST_SUITE("sample_and_bin_k1") {
  TEST_CASE("10k draws: range, mean, and the k2 identity") {
    Rng rng(32);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
      auto p = sample_k1(rng);
      CHECK(p.k1 >= -0.4);
      CHECK(p.k1 <= 0.0);
      CHECK(std::abs(p.k2 - (0.019 * p.k1 + 0.805 * p.k1 * p.k1)) < 1e-12);
      sum += p.k1;
    }
    CHECK(std::abs(sum / 10000.0 + 0.2) < 0.01);
  }

  TEST_CASE("bin edges") {
    CHECK(bin_k1(-0.4) == 0);
    CHECK(bin_k1(0.0) == 19);
    CHECK(bin_k1(-0.39) == 0);
    CHECK(bin_k1(-0.381) == 0);
    CHECK(bin_k1(-0.379) == 1);
    CHECK(bin_k1(-0.001) == 19);
    CHECK_THROWS_AS(bin_k1(-0.41), DataError);
    CHECK_THROWS_AS(bin_k1(0.01), DataError);
  }

  TEST_CASE("monotone non-decreasing in k1") {
    int prev = 0;
    for (int i = 0; i <= 4000; ++i) {
      const int b = bin_k1(-0.4 + 0.0001 * i);
      CHECK(b >= prev);
      prev = b;
    }
    CHECK(prev == 19);
  }
}
