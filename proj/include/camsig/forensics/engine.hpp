#pragma once

#include <vector>

#include "camsig/common.hpp"
#include "camsig/forensics/affinity.hpp"
#include "camsig/forensics/mean_shift.hpp"
#include "camsig/forensics/ncut.hpp"
#include "camsig/image/image.hpp"
#include "camsig/image/patch.hpp"
#include "camsig/nn/model.hpp"

namespace camsig::forensics {

// Embeds every patch of a grid; chunks run in parallel on frozen params and
// write disjoint column ranges, so the result is order-independent.
inline Mat embed_grid_patches(nn::DualEncoderModel& model, const img::Image& image,
                              const img::PatchGrid& grid, int chunk = 64) {
  const int p = static_cast<int>(grid.patches.size());
  Mat embeddings(model.patch.config().embed_dim, p);
  const int n_chunks = (p + chunk - 1) / chunk;
  parallel_for(n_chunks, [&](int c) {
    const int lo = c * chunk;
    const int hi = std::min(p, lo + chunk);
    std::vector<img::Image> patches;
    patches.reserve(hi - lo);
    for (int i = lo; i < hi; ++i) patches.push_back(img::extract_patch(image, grid.patches[i]));
    nn::Tape tape;
    auto out = model.patch.forward(tape, model.pixels_to_input(patches), hi - lo,
                                   grid.side, grid.side);
    embeddings.middleCols(lo, hi - lo) = tape.val(out.embedding);
  });
  return embeddings;
}

struct AnalysisConfig {
  int n_longest = 25;
  double no_cut_threshold = 0.95;
};

struct AnalysisResult {
  double phi = 0.0;
  double phi_bar = 1.0;
  Eigen::MatrixXd response;  // per-pixel, [0,1], low = suspected splice
  img::Image mask;           // single channel, 255 = spliced (smaller region)
  bool splice_detected = false;
  double ncut_objective = 1.0;
  int n_patches = 0;
  img::PatchGrid grid;
};

// Pipeline tail shared by the fresh and cached-embedding paths: affinity ->
// score, mean-shift response map, and normalized-cut mask with the
// smaller-region rule applied at pixel level.
inline AnalysisResult analyze_embeddings(nn::DualEncoderModel& model, const img::Image& image,
                                         img::PatchGrid grid, const Mat& embeddings,
                                         AnalysisConfig cfg = {}) {
  AnalysisResult res;
  res.grid = std::move(grid);
  res.n_patches = static_cast<int>(res.grid.patches.size());
  const Mat a = affinity(embeddings);
  const ImageScore score = image_score(a, model.tau);
  res.phi = score.phi;
  res.phi_bar = score.phi_bar;

  res.mask = img::Image(image.width, image.height, 1, 0);
  if (res.n_patches == 1) {
    res.response = Eigen::MatrixXd::Ones(image.height, image.width);
    res.splice_detected = false;
    return res;
  }

  const MeanShiftResult ms = mean_shift_response(a);
  res.response = img::accumulate_overlaps(res.grid, ms.responses);

  const NcutResult cut = ncut_partition(a, cfg.no_cut_threshold);
  res.ncut_objective = cut.objective;
  if (cut.empty_splice) {
    res.splice_detected = false;
    return res;
  }

  // rasterize: per-pixel majority over overlapping patch labels
  std::vector<double> labels(res.n_patches);
  for (int i = 0; i < res.n_patches; ++i) labels[i] = cut.in_cut_side[i] ? 1.0 : 0.0;
  const Eigen::MatrixXd vote = img::accumulate_overlaps(res.grid, labels);
  size_t side1 = 0;
  for (Eigen::Index i = 0; i < vote.size(); ++i) side1 += vote(i) > 0.5 ? 1 : 0;
  const size_t total = static_cast<size_t>(image.width) * image.height;
  const bool side1_is_splice = side1 * 2 <= total;  // smaller pixel region
  size_t spliced = 0;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const bool one = vote(y, x) > 0.5;
      const bool is_splice = side1_is_splice ? one : !one;
      if (is_splice) {
        res.mask.at(x, y, 0) = 255;
        ++spliced;
      }
    }
  res.splice_detected = spliced > 0;
  return res;
}

// Full zero-shot pipeline: grid -> patch embeddings -> analyze_embeddings.
inline AnalysisResult detect_and_localize(nn::DualEncoderModel& model, const img::Image& image,
                                          AnalysisConfig cfg = {}) {
  if (image.channels != 3) throw DataError("detect_and_localize: RGB image required");
  img::PatchGrid grid = img::build_grid(image.width, image.height, model.patch_side,
                                        cfg.n_longest);
  const Mat embeddings = embed_grid_patches(model, image, grid);
  return analyze_embeddings(model, image, std::move(grid), embeddings, cfg);
}

}  // namespace camsig::forensics
