#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "camsig/common.hpp"

namespace camsig::train {

using Mat = Eigen::MatrixXd;

namespace detail {
inline Mat softmax_rows(const Mat& z) {
  Mat p(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    p.row(r) = (z.row(r).array() - mx).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}
}  // namespace detail

// One direction of the contrastive objective: mean over rows i of
// -log( exp(sim_ii/tau) / sum_j exp(sim_ij/tau) ), computed with
// max-subtraction so large logits cannot overflow.
inline double info_nce_vm(const Mat& sim, double tau) {
  if (sim.rows() != sim.cols() || sim.rows() < 1)
    throw DataError("info_nce_vm: similarity matrix must be square");
  if (!(tau > 0.0)) throw DataError("info_nce_vm: tau must be positive");
  if (!sim.allFinite()) throw DataError("info_nce_vm: non-finite similarity entries");
  const Eigen::Index n = sim.rows();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = sim.row(i) / tau;
    const double mx = row.maxCoeff();
    const double lse = std::log((row.array() - mx).exp().sum()) + mx;
    loss += lse - row(i);
  }
  return loss / static_cast<double>(n);
}

// L = L^{V,M} + L^{M,V}: the same loss summed over the transpose.
inline double combined_loss(const Mat& sim, double tau) {
  return info_nce_vm(sim, tau) + info_nce_vm(sim.transpose(), tau);
}

// Analytic gradient of combined_loss with respect to sim.
inline Mat combined_loss_grad(const Mat& sim, double tau) {
  if (sim.rows() != sim.cols()) throw DataError("combined_loss_grad: square matrix required");
  if (!(tau > 0.0)) throw DataError("combined_loss_grad: tau must be positive");
  const Eigen::Index n = sim.rows();
  Mat g = detail::softmax_rows(sim / tau) + detail::softmax_rows(sim.transpose() / tau).transpose();
  g.diagonal().array() -= 2.0;
  return g / (tau * static_cast<double>(n));
}

// In-batch retrieval accuracy: fraction of rows whose strict argmax is the
// diagonal entry.
inline double topk1_retrieval(const Mat& sim) {
  if (sim.rows() != sim.cols() || sim.rows() == 0)
    throw DataError("topk1_retrieval: square matrix required");
  int correct = 0;
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    Eigen::Index best = 0;
    sim.row(i).maxCoeff(&best);
    bool unique = true;
    for (Eigen::Index j = 0; j < sim.cols(); ++j)
      if (j != best && sim(i, j) == sim(i, best)) unique = false;
    if (best == i && unique) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(sim.rows());
}

}  // namespace camsig::train
