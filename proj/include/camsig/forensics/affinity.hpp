#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "camsig/common.hpp"

namespace camsig::forensics {

using Mat = Eigen::MatrixXd;

// A[i][j] = e_i . e_j over unit-norm patch embeddings (columns of E).
inline Mat affinity(const Mat& embeddings, double norm_tol = 1e-3) {
  if (embeddings.cols() < 1) throw DataError("affinity: no embeddings");
  for (Eigen::Index j = 0; j < embeddings.cols(); ++j) {
    if (std::abs(embeddings.col(j).norm() - 1.0) > norm_tol)
      throw DataError("affinity: embedding " + std::to_string(j) + " is not unit-norm");
  }
  Mat a = embeddings.transpose() * embeddings;
  return (a + Mat(a.transpose())) / 2.0;  // exact symmetry
}

struct ImageScore {
  double phi = 0.0;      // sum of exponentiated affinities
  double phi_bar = 0.0;  // phi / (P^2 e^{1/tau}), in (0, 1]
};

// phi = sum_ij exp(A_ij / tau), evaluated as e^{1/tau} * mean(exp((A-1)/tau))
// so the exponent never exceeds zero for unit embeddings.
inline ImageScore image_score(const Mat& a, double tau) {
  if (a.rows() != a.cols() || a.rows() < 1) throw DataError("image_score: square matrix required");
  if (!(tau > 0.0)) throw DataError("image_score: tau must be positive");
  const double p2 = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
  const double phi_bar = ((a.array() - 1.0) / tau).exp().sum() / p2;
  ImageScore s;
  s.phi_bar = phi_bar;
  s.phi = phi_bar * p2 * std::exp(1.0 / tau);
  return s;
}

}  // namespace camsig::forensics
