#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "camsig/common.hpp"
#include "camsig/image/image.hpp"

namespace camsig::img {

struct PatchSpec {
  int x = 0;
  int y = 0;
  int side = 0;
};

// Inference grid: exactly n_longest origins along the longest image dimension,
// endpoint-inclusive; the shorter dimension reuses the stride with endpoints
// forced to 0 and dim-side.
struct PatchGrid {
  std::vector<PatchSpec> patches;  // row-major: y outer, x inner
  int rows = 0;
  int cols = 0;
  int side = 0;
  int image_w = 0;
  int image_h = 0;
  double stride_x = 0.0;
  double stride_y = 0.0;
};

inline PatchSpec random_crop(const Image& image, int side, Rng& rng) {
  if (image.width < side || image.height < side)
    throw DataError("random_crop: image smaller than crop side");
  const int max_x = image.width - side;
  const int max_y = image.height - side;
  return PatchSpec{rng.uniform_int(max_x + 1), rng.uniform_int(max_y + 1), side};
}

inline Image extract_patch(const Image& image, const PatchSpec& spec) {
  if (spec.x < 0 || spec.y < 0 || spec.x + spec.side > image.width ||
      spec.y + spec.side > image.height)
    throw DataError("extract_patch: patch outside image bounds");
  Image out(spec.side, spec.side, image.channels);
  for (int y = 0; y < spec.side; ++y)
    for (int x = 0; x < spec.side; ++x)
      for (int c = 0; c < image.channels; ++c)
        out.at(x, y, c) = image.at(spec.x + x, spec.y + y, c);
  return out;
}

namespace detail {
// Endpoint-inclusive even spacing over [0, extent] with per-origin rounding.
inline std::vector<int> spaced_origins(int extent, int count) {
  std::vector<int> out;
  if (extent <= 0 || count <= 1) return {0};
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(static_cast<int>(std::lround(
        static_cast<double>(i) * extent / (count - 1))));
  return out;
}
}  // namespace detail

inline PatchGrid build_grid(int image_w, int image_h, int side, int n_longest = 25) {
  if (image_w < side || image_h < side)
    throw DataError("build_grid: image smaller than patch side");
  if (n_longest < 2 && (image_w > side || image_h > side))
    throw DataError("build_grid: n_longest must be at least 2");

  const int long_extent = std::max(image_w, image_h) - side;
  const int short_extent = std::min(image_w, image_h) - side;
  const int n_long = long_extent == 0 ? 1 : n_longest;
  const double stride =
      n_long > 1 ? static_cast<double>(long_extent) / (n_long - 1) : 0.0;
  // Count on the short side derives from the long-side stride.
  const int n_short =
      short_extent == 0 ? 1
                        : std::max(2, static_cast<int>(std::lround(short_extent / stride)) + 1);

  const bool wide = image_w >= image_h;
  const std::vector<int> xs = detail::spaced_origins(image_w - side, wide ? n_long : n_short);
  const std::vector<int> ys = detail::spaced_origins(image_h - side, wide ? n_short : n_long);

  PatchGrid grid;
  grid.side = side;
  grid.image_w = image_w;
  grid.image_h = image_h;
  grid.cols = static_cast<int>(xs.size());
  grid.rows = static_cast<int>(ys.size());
  grid.stride_x = xs.size() > 1 ? static_cast<double>(image_w - side) / (xs.size() - 1) : 0.0;
  grid.stride_y = ys.size() > 1 ? static_cast<double>(image_h - side) / (ys.size() - 1) : 0.0;
  grid.patches.reserve(xs.size() * ys.size());
  for (int y : ys)
    for (int x : xs) grid.patches.push_back(PatchSpec{x, y, side});
  return grid;
}

// Per-pixel mean of the scalars of all covering patches. Uncovered pixels are
// filled from the nearest covered pixel (multi-source BFS, 4-connected).
inline Eigen::MatrixXd accumulate_overlaps(const PatchGrid& grid,
                                           std::span<const double> scalars) {
  if (scalars.size() != grid.patches.size())
    throw DataError("accumulate_overlaps: one scalar per patch required");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(grid.image_h, grid.image_w);
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(grid.image_h, grid.image_w);
  for (size_t p = 0; p < grid.patches.size(); ++p) {
    const auto& spec = grid.patches[p];
    sum.block(spec.y, spec.x, spec.side, spec.side).array() += scalars[p];
    count.block(spec.y, spec.x, spec.side, spec.side).array() += 1.0;
  }
  Eigen::MatrixXd out(grid.image_h, grid.image_w);
  std::deque<std::pair<int, int>> frontier;
  for (int y = 0; y < grid.image_h; ++y)
    for (int x = 0; x < grid.image_w; ++x) {
      if (count(y, x) > 0) {
        out(y, x) = sum(y, x) / count(y, x);
        frontier.emplace_back(y, x);
      } else {
        out(y, x) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  while (!frontier.empty()) {
    const auto [y, x] = frontier.front();
    frontier.pop_front();
    const int dy[] = {-1, 1, 0, 0};
    const int dx[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int ny = y + dy[k], nx = x + dx[k];
      if (ny < 0 || nx < 0 || ny >= grid.image_h || nx >= grid.image_w) continue;
      if (std::isnan(out(ny, nx))) {
        out(ny, nx) = out(y, x);
        frontier.emplace_back(ny, nx);
      }
    }
  }
  return out;
}

}  // namespace camsig::img
