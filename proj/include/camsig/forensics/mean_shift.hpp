#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "camsig/common.hpp"

namespace camsig::forensics {

using Mat = Eigen::MatrixXd;

struct MeanShiftResult {
  std::vector<double> responses;     // [0,1], low = unlike the dominant source
  std::vector<int> mode_of;          // basin index per patch
  Eigen::VectorXd dominant_mode;     // mode vector in affinity-row space
  int n_modes = 0;
};

// Flat-kernel mean shift over the rows of the affinity matrix. Bandwidth is
// the median pairwise distance between rows. Each patch's response is the dot
// product of its affinity row with the dominant (largest-basin) mode vector,
// min-max normalized across patches.
inline MeanShiftResult mean_shift_response(const Mat& a, int max_iters = 60) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw DataError("mean_shift_response: square affinity required");
  const Eigen::Index p = a.rows();
  MeanShiftResult r;

  if (p == 1) {
    r.responses = {1.0};
    r.mode_of = {0};
    r.dominant_mode = a.row(0);
    r.n_modes = 1;
    return r;
  }

  // pairwise squared distances between rows via the Gram trick
  const Eigen::VectorXd sq = a.rowwise().squaredNorm();
  Mat d2 = (-2.0 * (a * a.transpose())).colwise() + sq;
  d2.rowwise() += sq.transpose();
  d2 = d2.cwiseMax(0.0);

  std::vector<double> dists;
  dists.reserve(static_cast<size_t>(p) * (p - 1) / 2);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j) dists.push_back(std::sqrt(d2(i, j)));
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  const double bandwidth = std::max(dists[dists.size() / 2], 1e-12);

  // degenerate: all rows identical
  const double max_d = *std::max_element(dists.begin(), dists.end());
  if (max_d < 1e-9) {
    r.responses.assign(p, 1.0);
    r.mode_of.assign(p, 0);
    r.dominant_mode = a.row(0);
    r.n_modes = 1;
    return r;
  }

  const double b2 = bandwidth * bandwidth;
  Mat y = a;  // shifted points, one per row
  std::vector<char> active(p, 1);
  const double tol = 1e-8 * (1.0 + bandwidth);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool any_active = false;
    const Eigen::VectorXd ysq = y.rowwise().squaredNorm();
    Mat dist2 = (-2.0 * (y * a.transpose())).colwise() + ysq;
    dist2.rowwise() += sq.transpose();
    for (Eigen::Index i = 0; i < p; ++i) {
      if (!active[i]) continue;
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(p);
      int count = 0;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (dist2(i, j) <= b2) {
          mean += a.row(j);
          ++count;
        }
      }
      if (count == 0) {
        active[i] = 0;
        continue;
      }
      mean /= static_cast<double>(count);
      const double move = (mean - y.row(i)).norm();
      y.row(i) = mean;
      if (move < tol) active[i] = 0;
      else any_active = true;
    }
    if (!any_active) break;
  }

  // Merge converged points into modes. Processing in lexicographic order of
  // the converged vectors makes representatives, basin counts, and the
  // dominant mode independent of patch ordering.
  std::vector<Eigen::Index> canon(p);
  std::iota(canon.begin(), canon.end(), Eigen::Index{0});
  std::sort(canon.begin(), canon.end(), [&](Eigen::Index i, Eigen::Index j) {
    for (Eigen::Index k = 0; k < p; ++k) {
      if (y(i, k) != y(j, k)) return y(i, k) < y(j, k);
    }
    return false;
  });
  std::vector<Eigen::RowVectorXd> modes;
  std::vector<int> basin_size;
  r.mode_of.assign(p, -1);
  const double merge_tol = std::max(bandwidth * 0.5, 1e-9);
  for (Eigen::Index i : canon) {
    int assigned = -1;
    for (size_t m = 0; m < modes.size(); ++m) {
      if ((y.row(i) - modes[m]).norm() <= merge_tol) {
        assigned = static_cast<int>(m);
        break;
      }
    }
    if (assigned < 0) {
      modes.push_back(y.row(i));
      basin_size.push_back(0);
      assigned = static_cast<int>(modes.size()) - 1;
    }
    r.mode_of[i] = assigned;
    basin_size[assigned]++;
  }
  r.n_modes = static_cast<int>(modes.size());
  int dominant = 0;
  for (size_t m = 1; m < modes.size(); ++m)
    if (basin_size[m] > basin_size[dominant]) dominant = static_cast<int>(m);
  r.dominant_mode = modes[dominant].transpose();

  r.responses.resize(p);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < p; ++i) {
    r.responses[i] = a.row(i).dot(r.dominant_mode);
    lo = std::min(lo, r.responses[i]);
    hi = std::max(hi, r.responses[i]);
  }
  if (hi - lo < 1e-12) {
    std::fill(r.responses.begin(), r.responses.end(), 1.0);
  } else {
    for (auto& v : r.responses) v = (v - lo) / (hi - lo);
  }
  return r;
}

}  // namespace camsig::forensics
