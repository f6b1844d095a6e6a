#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "camsig/common.hpp"

namespace camsig::metrics {

// Average precision over a ranked list, positives = label != 0. Tied scores
// are treated as one group with trapezoidal interpolation across the group,
// i.e. the PR curve is integrated between the points reachable at distinct
// thresholds, starting from (recall 0, precision of the first group).
inline double average_precision(std::span<const double> scores,
                                std::span<const uint8_t> labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw DataError("average_precision: scores/labels size mismatch");
  std::vector<size_t> order(scores.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  size_t total_pos = 0;
  for (uint8_t l : labels) total_pos += l ? 1 : 0;
  if (total_pos == 0) throw DataError("average_precision: no positive labels");

  double ap = 0.0;
  double prev_recall = 0.0;
  double prev_precision = -1.0;  // set from the first group's density
  size_t tp = 0, seen = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    size_t group_tp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) ++group_tp;
      ++j;
    }
    const size_t group_n = j - i;
    if (prev_precision < 0.0)
      prev_precision = static_cast<double>(group_tp) / static_cast<double>(group_n);
    tp += group_tp;
    seen += group_n;
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * 0.5 * (precision + prev_precision);
    prev_recall = recall;
    prev_precision = precision;
    i = j;
  }
  return ap;
}

struct ScoredMap {
  Eigen::MatrixXd scores;
  Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask;  // nonzero = spliced

  bool valid() const {
    return scores.rows() == mask.rows() && scores.cols() == mask.cols() && scores.size() > 0;
  }
  bool both_classes() const {
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < mask.size(); ++i) (mask(i) ? pos : neg) = true;
    return pos && neg;
  }
};

namespace detail {
inline void flatten(const ScoredMap& m, std::vector<double>& s, std::vector<uint8_t>& l) {
  s.resize(m.scores.size());
  l.resize(m.scores.size());
  for (Eigen::Index i = 0; i < m.scores.size(); ++i) {
    s[i] = m.scores(i);
    l[i] = m.mask(i) ? 1 : 0;
  }
}
}  // namespace detail

// Permutation-invariant pixel AP: the better of treating high scores or low
// scores as the spliced class. nullopt when the ground truth is single-class.
inline std::optional<double> p_map(const ScoredMap& m) {
  if (!m.valid()) throw DataError("p_map: malformed scored map");
  if (!m.both_classes()) return std::nullopt;
  std::vector<double> s;
  std::vector<uint8_t> l;
  detail::flatten(m, s, l);
  std::vector<double> neg(s.size());
  for (size_t i = 0; i < s.size(); ++i) neg[i] = -s[i];
  return std::max(average_precision(s, l), average_precision(neg, l));
}

// Class-balanced IoU at the per-image optimal threshold, maximized over the
// two label assignments. Thresholds sweep every distinct score value plus the
// empty prediction.
inline std::optional<double> c_iou(const ScoredMap& m) {
  if (!m.valid()) throw DataError("c_iou: malformed scored map");
  if (!m.both_classes()) return std::nullopt;
  std::vector<double> s;
  std::vector<uint8_t> l;
  detail::flatten(m, s, l);
  const size_t n = s.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return s[a] > s[b]; });

  size_t total_pos = 0;
  for (uint8_t v : l) total_pos += v ? 1 : 0;
  const size_t total_neg = n - total_pos;

  double best = 0.0;
  size_t tp = 0, k = 0;
  // k = 0 is the empty prediction; then after each tied group, pred = top-k.
  // Both classes are present, so every IoU denominator below is positive.
  auto eval = [&](size_t pred_size, size_t tp_now) {
    const size_t fp = pred_size - tp_now;
    const size_t fn = total_pos - tp_now;
    const size_t tn = total_neg - fp;
    // orientation A: high scores predicted spliced
    const double iou_pos = static_cast<double>(tp_now) / static_cast<double>(total_pos + fp);
    const double iou_neg = static_cast<double>(tn) / static_cast<double>(total_neg + fn);
    best = std::max(best, 0.5 * (iou_pos + iou_neg));
    // orientation B: low scores predicted spliced (label permutation)
    const double iou_pos_b = static_cast<double>(fn) / static_cast<double>(total_pos + tn);
    const double iou_neg_b = static_cast<double>(fp) / static_cast<double>(total_neg + tp_now);
    best = std::max(best, 0.5 * (iou_pos_b + iou_neg_b));
  };
  eval(0, 0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && s[order[j]] == s[order[i]]) {
      if (l[order[j]]) ++tp;
      ++j;
    }
    k = j;
    eval(k, tp);
    i = j;
  }
  return best;
}

// Image-level detection: spliced is the positive class and lower consistency
// means more suspicious, so the detection score is the negated phi-bar.
inline double detection_map(std::span<const std::pair<double, bool>> scored_images) {
  bool pos = false, neg = false;
  for (const auto& [phi_bar, spliced] : scored_images) (spliced ? pos : neg) = true;
  if (!pos || !neg) throw DataError("detection_map: both classes required");
  std::vector<double> s;
  std::vector<uint8_t> l;
  s.reserve(scored_images.size());
  l.reserve(scored_images.size());
  for (const auto& [phi_bar, spliced] : scored_images) {
    s.push_back(-phi_bar);
    l.push_back(spliced ? 1 : 0);
  }
  return average_precision(s, l);
}

}  // namespace camsig::metrics
