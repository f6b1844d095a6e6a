#include <doctest.h>

#include <map>
#include <numeric>

#include "camsig/image/image.hpp"
#include "camsig/image/patch.hpp"
#include "camsig/image/splice.hpp"

using namespace camsig;
using namespace camsig::img;

namespace {
Image noise_image(int w, int h, int c, uint64_t seed) {
  Image im(w, h, c);
  Rng rng(seed);
  for (auto& b : im.data) b = static_cast<uint8_t>(rng.uniform_int(256));
  return im;
}
}  // namespace

TEST_SUITE("image_io") {
  TEST_CASE("png round trip, rgb and gray") {
    Image rgb = noise_image(37, 23, 3, 1);
    write_png("io_rgb.png", rgb);
    Image back = read_png("io_rgb.png");
    CHECK(back.same_shape(rgb));
    CHECK(back.data == rgb.data);

    Image gray = noise_image(16, 9, 1, 2);
    write_png("io_gray.png", gray);
    Image gback = read_png("io_gray.png");
    CHECK(gback.same_shape(gray));
    CHECK(gback.data == gray.data);
  }

  TEST_CASE("missing file is an error") {
    CHECK_THROWS_AS(read_png("definitely_missing.png"), DataError);
  }
}

TEST_SUITE("random_crop") {
  TEST_CASE("image exactly patch-sized has a single valid origin") {
    Image im(124, 124, 3);
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
      auto spec = random_crop(im, 124, rng);
      CHECK(spec.x == 0);
      CHECK(spec.y == 0);
    }
  }

  TEST_CASE("125x124 image: both x origins occur with roughly equal frequency") {
    Image im(125, 124, 3);
    Rng rng(2);
    int count_x0 = 0, n = 4000;
    for (int i = 0; i < n; ++i) {
      auto spec = random_crop(im, 124, rng);
      CHECK(spec.y == 0);
      CHECK((spec.x == 0 || spec.x == 1));
      count_x0 += spec.x == 0;
    }
    CHECK(count_x0 > n / 2 - 150);
    CHECK(count_x0 < n / 2 + 150);
  }

  TEST_CASE("image smaller than the crop side is an error") {
    Image im(100, 100, 3);
    Rng rng(3);
    CHECK_THROWS_AS(random_crop(im, 124, rng), DataError);
  }

  TEST_CASE("origin uniformity passes a 1% chi-square test on a small image") {
    // 10x10 image, side 8 -> 9 equally likely origins.
    Image im(10, 10, 1);
    Rng rng(4);
    std::map<std::pair<int, int>, int> counts;
    const int n = 9000;
    for (int i = 0; i < n; ++i) {
      auto spec = random_crop(im, 8, rng);
      counts[{spec.x, spec.y}]++;
    }
    REQUIRE(counts.size() == 9);
    const double expected = n / 9.0;
    double chi2 = 0.0;
    for (const auto& [origin, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 20.09);  // chi-square critical value, 8 dof, alpha = 0.01
  }
}

TEST_SUITE("build_grid") {
  TEST_CASE("1000x600, side 124, n=25: endpoints exact, stride 36 or 37") {
    auto grid = build_grid(1000, 600, 124, 25);
    CHECK(grid.cols == 25);
    std::vector<int> xs;
    for (int i = 0; i < grid.cols; ++i) xs.push_back(grid.patches[i].x);
    CHECK(xs.front() == 0);
    CHECK(xs.back() == 876);
    for (size_t i = 1; i < xs.size(); ++i) {
      const int step = xs[i] - xs[i - 1];
      CHECK(step >= 36);
      CHECK(step <= 37);
    }
    // shorter dimension: same stride, endpoints included
    CHECK(grid.patches.front().y == 0);
    CHECK(grid.patches.back().y == 600 - 124);
  }

  TEST_CASE("patch-sized image yields a single patch at the origin") {
    auto grid = build_grid(124, 124, 124, 25);
    REQUIRE(grid.patches.size() == 1);
    CHECK(grid.patches[0].x == 0);
    CHECK(grid.patches[0].y == 0);
  }

  TEST_CASE("square 600x600 with n=25 gives a 25x25 grid") {
    auto grid = build_grid(600, 600, 124, 25);
    CHECK(grid.rows == 25);
    CHECK(grid.cols == 25);
    CHECK(grid.patches.size() == 625);
  }

  TEST_CASE("grid endpoints hold for assorted shapes") {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
      const int side = 8 + rng.uniform_int(40);
      const int w = side + rng.uniform_int(400);
      const int h = side + rng.uniform_int(400);
      auto grid = build_grid(w, h, side, 2 + rng.uniform_int(24));
      int max_x = 0, max_y = 0, min_x = w, min_y = h;
      for (const auto& p : grid.patches) {
        max_x = std::max(max_x, p.x);
        min_x = std::min(min_x, p.x);
        max_y = std::max(max_y, p.y);
        min_y = std::min(min_y, p.y);
        CHECK(p.x + side <= w);
        CHECK(p.y + side <= h);
      }
      CHECK(min_x == 0);
      CHECK(min_y == 0);
      CHECK(max_x == w - side);
      CHECK(max_y == h - side);
    }
  }

  TEST_CASE("coverage: union of footprints covers every pixel when stride <= side") {
    auto grid = build_grid(300, 200, 32, 25);
    CHECK(grid.stride_x <= 32);
    std::vector<uint8_t> covered(300 * 200, 0);
    for (const auto& p : grid.patches)
      for (int y = p.y; y < p.y + p.side; ++y)
        for (int x = p.x; x < p.x + p.side; ++x) covered[y * 300 + x] = 1;
    CHECK(std::accumulate(covered.begin(), covered.end(), 0) == 300 * 200);
  }

  TEST_CASE("too-small image is an error") {
    CHECK_THROWS_AS(build_grid(100, 200, 124, 25), DataError);
  }
}

TEST_SUITE("accumulate_overlaps") {
  TEST_CASE("single patch paints its footprint") {
    PatchGrid grid;
    grid.side = 4;
    grid.image_w = 8;
    grid.image_h = 8;
    grid.patches = {{2, 2, 4}};
    std::vector<double> scalars{1.0};
    auto map = accumulate_overlaps(grid, scalars);
    CHECK(map(3, 3) == 1.0);
    CHECK(map(5, 5) == 1.0);
    // outside pixels are filled from the nearest covered pixel
    CHECK(map(0, 0) == 1.0);
  }

  TEST_CASE("two fully overlapping patches average to 0.5") {
    PatchGrid grid;
    grid.side = 4;
    grid.image_w = 4;
    grid.image_h = 4;
    grid.patches = {{0, 0, 4}, {0, 0, 4}};
    std::vector<double> scalars{0.0, 1.0};
    auto map = accumulate_overlaps(grid, scalars);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) CHECK(map(y, x) == doctest::Approx(0.5));
  }

  TEST_CASE("three-patch partial overlap matches the per-pixel oracle") {
    PatchGrid grid;
    grid.side = 6;
    grid.image_w = 12;
    grid.image_h = 10;
    grid.patches = {{0, 0, 6}, {4, 2, 6}, {6, 4, 6}};
    std::vector<double> scalars{0.25, -1.5, 3.0};
    auto map = accumulate_overlaps(grid, scalars);
    // brute-force per-pixel accumulation
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 12; ++x) {
        double sum = 0;
        int cnt = 0;
        for (size_t p = 0; p < grid.patches.size(); ++p) {
          const auto& s = grid.patches[p];
          if (x >= s.x && x < s.x + s.side && y >= s.y && y < s.y + s.side) {
            sum += scalars[p];
            ++cnt;
          }
        }
        if (cnt > 0) CHECK(map(y, x) == doctest::Approx(sum / cnt).epsilon(1e-12));
      }
  }

  TEST_CASE("linearity and constant-input properties") {
    auto grid = build_grid(40, 30, 8, 6);
    const size_t n = grid.patches.size();
    Rng rng(6);
    std::vector<double> a(n), b(n), combo(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
      combo[i] = 2.0 * a[i] + 3.0 * b[i];
    }
    auto ma = accumulate_overlaps(grid, a);
    auto mb = accumulate_overlaps(grid, b);
    auto mc = accumulate_overlaps(grid, combo);
    CHECK((mc - (2.0 * ma + 3.0 * mb)).cwiseAbs().maxCoeff() < 1e-9);

    std::vector<double> constant(n, 0.7);
    auto mconst = accumulate_overlaps(grid, constant);
    CHECK((mconst.array() - 0.7).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("scalar count mismatch is an error") {
    auto grid = build_grid(40, 30, 8, 6);
    std::vector<double> wrong(grid.patches.size() + 1, 0.0);
    CHECK_THROWS_AS(accumulate_overlaps(grid, wrong), DataError);
  }
}

TEST_SUITE("synth_splice") {
  TEST_CASE("empty mask reproduces the host") {
    Image host = noise_image(32, 32, 3, 7);
    Image donor = noise_image(32, 32, 3, 8);
    Image mask(32, 32, 1, 0);
    auto r = composite_with_mask(host, donor, mask);
    CHECK(r.composite.data == host.data);
    CHECK(r.area_fraction == 0.0);
  }

  TEST_CASE("full mask reproduces the donor placement") {
    Image host = noise_image(32, 32, 3, 9);
    Image donor = noise_image(32, 32, 3, 10);
    Image mask(32, 32, 1, 255);
    auto r = composite_with_mask(host, donor, mask);
    CHECK(r.composite.data == donor.data);
    CHECK(r.area_fraction == 1.0);
  }

  TEST_CASE("random rectangle: pixel-exact on both regions, area within bounds") {
    Image host = noise_image(64, 48, 3, 11);
    Image donor = noise_image(64, 48, 3, 12);
    Rng rng(13);
    for (int t = 0; t < 20; ++t) {
      auto shape = t % 2 ? MaskShape::Rectangle : MaskShape::Ellipse;
      auto r = synth_splice(host, donor, shape, rng, 0.05, 0.40);
      CHECK(r.area_fraction >= 0.05);
      CHECK(r.area_fraction <= 0.40);
      for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x)
          for (int c = 0; c < 3; ++c) {
            const uint8_t expect =
                r.mask.at(x, y, 0) ? donor.at(x, y, c) : host.at(x, y, c);
            CHECK(r.composite.at(x, y, c) == expect);
          }
    }
  }

  TEST_CASE("donor smaller than host is an error") {
    Image host = noise_image(64, 48, 3, 14);
    Image donor = noise_image(32, 32, 3, 15);
    Rng rng(16);
    CHECK_THROWS_AS(synth_splice(host, donor, MaskShape::Rectangle, rng), DataError);
  }
}
