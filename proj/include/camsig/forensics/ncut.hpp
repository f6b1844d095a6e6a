#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "camsig/common.hpp"

namespace camsig::forensics {

using Mat = Eigen::MatrixXd;

struct NcutResult {
  std::vector<uint8_t> in_cut_side;  // 1 = the side below the chosen threshold
  double objective = 0.0;            // ncut value of the chosen split
  bool empty_splice = false;         // no confident cut found
};

// Two-way normalized cut on W = (A+1)/2 (affinities shifted nonnegative).
// The second-smallest generalized eigenvector is thresholded at the split
// minimizing the ncut objective; a near-worthless best cut (objective above
// no_cut_threshold) yields an empty-splice result. Disconnected graphs fall
// back to connected components as the partition.
inline NcutResult ncut_partition(const Mat& a, double no_cut_threshold = 0.95) {
  if (a.rows() != a.cols() || a.rows() < 1) throw DataError("ncut: square affinity required");
  const Eigen::Index p = a.rows();
  NcutResult r;
  r.in_cut_side.assign(p, 0);
  if (p == 1) {
    r.empty_splice = true;
    r.objective = 1.0;
    return r;
  }

  const Mat w = (a.array() + 1.0) / 2.0;

  // connected components (edges where w > 0)
  std::vector<int> comp(p, -1);
  int n_comp = 0;
  for (Eigen::Index seed = 0; seed < p; ++seed) {
    if (comp[seed] >= 0) continue;
    std::vector<Eigen::Index> stack{seed};
    comp[seed] = n_comp;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < p; ++j)
        if (comp[j] < 0 && w(i, j) > 1e-12) {
          comp[j] = n_comp;
          stack.push_back(j);
        }
    }
    ++n_comp;
  }
  if (n_comp > 1) {
    // components are the partition: largest component vs the rest
    std::vector<int> sizes(n_comp, 0);
    for (Eigen::Index i = 0; i < p; ++i) sizes[comp[i]]++;
    const int largest =
        static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (Eigen::Index i = 0; i < p; ++i) r.in_cut_side[i] = comp[i] == largest ? 0 : 1;
    r.objective = 0.0;
    return r;
  }

  const Eigen::VectorXd d = w.rowwise().sum();
  const Eigen::VectorXd d_inv_sqrt = d.array().rsqrt();
  Mat l_sym = Mat::Identity(p, p) - (d_inv_sqrt.asDiagonal() * w * d_inv_sqrt.asDiagonal());
  l_sym = ((l_sym + l_sym.transpose()) / 2.0).eval();  // scrub triple-product noise

  Eigen::SelfAdjointEigenSolver<Mat> solver(l_sym);
  if (solver.info() != Eigen::Success) throw DataError("ncut: eigensolver failed");
  Eigen::VectorXd v = d_inv_sqrt.asDiagonal() * solver.eigenvectors().col(1);
  // deterministic sign: first coordinate of meaningful magnitude is positive
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      break;
    }
  }

  // sweep thresholds between consecutive sorted values of v
  std::vector<Eigen::Index> order(p);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index x, Eigen::Index y) { return v(x) < v(y); });

  const double vol_total = d.sum();
  Eigen::VectorXd link_to_s = Eigen::VectorXd::Zero(p);
  double vol_s = 0.0, in_s = 0.0;
  double best = std::numeric_limits<double>::infinity();
  Eigen::Index best_k = 0;  // points order[0..k-1] fall below the threshold
  for (Eigen::Index k = 0; k + 1 <= p - 1; ++k) {
    const Eigen::Index idx = order[k];
    vol_s += d(idx);
    in_s += 2.0 * link_to_s(idx) + w(idx, idx);
    link_to_s += w.col(idx);
    if (v(order[k]) == v(order[k + 1])) continue;  // not a distinct threshold
    const double cut = vol_s - in_s;
    const double vol_rest = vol_total - vol_s;
    if (vol_s <= 0.0 || vol_rest <= 0.0) continue;
    const double ncut = cut / vol_s + cut / vol_rest;
    if (ncut < best) {
      best = ncut;
      best_k = k + 1;
    }
  }

  if (!std::isfinite(best) || best > no_cut_threshold) {
    r.empty_splice = true;
    r.objective = std::isfinite(best) ? best : 1.0;
    return r;
  }
  r.objective = best;
  for (Eigen::Index k = 0; k < best_k; ++k) r.in_cut_side[order[k]] = 1;
  return r;
}

}  // namespace camsig::forensics
