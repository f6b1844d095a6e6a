#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "camsig/metrics/metrics.hpp"

using namespace camsig;
using namespace camsig::metrics;

namespace {

// Exhaustive-threshold AP oracle: recount precision/recall from scratch at
// every distinct score, then integrate the PR points trapezoidally starting
// from recall 0 at the first group's precision density.
double ap_oracle(const std::vector<double>& scores, const std::vector<uint8_t>& labels) {
  std::vector<double> distinct(scores);
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  size_t total_pos = 0;
  for (auto l : labels) total_pos += l ? 1 : 0;

  double ap = 0.0, prev_r = 0.0, prev_p = -1.0;
  for (double t : distinct) {
    size_t tp = 0, pred = 0;
    for (size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= t) {
        ++pred;
        if (labels[i]) ++tp;
      }
    // density of the first group alone
    if (prev_p < 0.0) {
      size_t gtp = 0, gn = 0;
      for (size_t i = 0; i < scores.size(); ++i)
        if (scores[i] == distinct.front()) {
          ++gn;
          if (labels[i]) ++gtp;
        }
      prev_p = static_cast<double>(gtp) / gn;
    }
    const double r = static_cast<double>(tp) / total_pos;
    const double p = static_cast<double>(tp) / pred;
    ap += (r - prev_r) * 0.5 * (p + prev_p);
    prev_r = r;
    prev_p = p;
  }
  return ap;
}

double p_map_oracle(const ScoredMap& m) {
  std::vector<double> s, neg;
  std::vector<uint8_t> l;
  for (Eigen::Index i = 0; i < m.scores.size(); ++i) {
    s.push_back(m.scores(i));
    neg.push_back(-m.scores(i));
    l.push_back(m.mask(i) ? 1 : 0);
  }
  return std::max(ap_oracle(s, l), ap_oracle(neg, l));
}

double c_iou_oracle(const ScoredMap& m) {
  std::vector<double> s;
  std::vector<uint8_t> l;
  for (Eigen::Index i = 0; i < m.scores.size(); ++i) {
    s.push_back(m.scores(i));
    l.push_back(m.mask(i) ? 1 : 0);
  }
  std::set<double> thresholds(s.begin(), s.end());
  std::vector<double> sweep(thresholds.begin(), thresholds.end());
  sweep.push_back(std::numeric_limits<double>::infinity());  // empty prediction
  double best = 0.0;
  for (double t : sweep) {
    for (int orient = 0; orient < 2; ++orient) {
      size_t inter_pos = 0, union_pos = 0, inter_neg = 0, union_neg = 0;
      for (size_t i = 0; i < s.size(); ++i) {
        const bool pred = orient == 0 ? s[i] >= t : s[i] < t;
        const bool gt = l[i] != 0;
        if (pred && gt) ++inter_pos;
        if (pred || gt) ++union_pos;
        if (!pred && !gt) ++inter_neg;
        if (!pred || !gt) ++union_neg;
      }
      const double iou_pos = union_pos ? double(inter_pos) / union_pos : 1.0;
      const double iou_neg = union_neg ? double(inter_neg) / union_neg : 1.0;
      best = std::max(best, 0.5 * (iou_pos + iou_neg));
    }
  }
  return best;
}

ScoredMap random_map(int rows, int cols, Rng& rng, int quantize_levels = 0) {
  ScoredMap m;
  m.scores.resize(rows, cols);
  m.mask.resize(rows, cols);
  for (Eigen::Index i = 0; i < m.scores.size(); ++i) {
    double v = rng.uniform();
    if (quantize_levels > 0)
      v = std::floor(v * quantize_levels) / quantize_levels;  // force ties
    m.scores(i) = v;
    m.mask(i) = rng.uniform() < 0.4 ? 1 : 0;
  }
  return m;
}

}  // namespace

TEST_SUITE("metrics_p_map") {
  TEST_CASE("scores equal to the mask give AP 1.0") {
    ScoredMap m;
    m.scores.resize(4, 4);
    m.mask.resize(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) {
      m.mask(i) = i % 3 == 0 ? 1 : 0;
      m.scores(i) = m.mask(i);
    }
    CHECK(*p_map(m) == doctest::Approx(1.0));
  }

  TEST_CASE("inverted scores are equally perfect (permutation invariance)") {
    ScoredMap m;
    m.scores.resize(4, 4);
    m.mask.resize(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) {
      m.mask(i) = i % 3 == 0 ? 1 : 0;
      m.scores(i) = 1.0 - m.mask(i);
    }
    CHECK(*p_map(m) == doctest::Approx(1.0));
  }

  TEST_CASE("single-class ground truth is reported as skipped") {
    ScoredMap m;
    m.scores = Eigen::MatrixXd::Random(3, 3);
    m.mask.setZero(3, 3);
    CHECK_FALSE(p_map(m).has_value());
    m.mask.setOnes(3, 3);
    CHECK_FALSE(p_map(m).has_value());
  }

  TEST_CASE("random maps match the exhaustive oracle within 1e-9") {
    Rng rng(21);
    for (int t = 0; t < 100; ++t) {
      const int rows = 2 + rng.uniform_int(11);
      const int cols = 2 + rng.uniform_int(11);
      auto m = random_map(rows, cols, rng, t % 3 == 0 ? 4 : 0);
      if (!m.both_classes()) continue;
      CHECK(*p_map(m) == doctest::Approx(p_map_oracle(m)).epsilon(1e-9));
    }
  }

  TEST_CASE("invariant under strictly monotone score transforms") {
    Rng rng(22);
    auto m = random_map(8, 8, rng);
    REQUIRE(m.both_classes());
    const double base = *p_map(m);
    ScoredMap warped = m;
    warped.scores = (2.0 * m.scores).array().exp();
    CHECK(*p_map(warped) == doctest::Approx(base).epsilon(1e-12));
  }

  TEST_CASE("invariant under prediction sign flips") {
    Rng rng(23);
    auto m = random_map(8, 8, rng);
    REQUIRE(m.both_classes());
    ScoredMap flipped = m;
    flipped.scores = -m.scores;
    CHECK(*p_map(flipped) == doctest::Approx(*p_map(m)).epsilon(1e-12));
  }
}

TEST_SUITE("metrics_c_iou") {
  TEST_CASE("perfect binary prediction scores 1.0") {
    ScoredMap m;
    m.scores.resize(4, 4);
    m.mask.resize(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) {
      m.mask(i) = i < 5 ? 1 : 0;
      m.scores(i) = m.mask(i) ? 0.9 : 0.1;
    }
    CHECK(*c_iou(m) == doctest::Approx(1.0));
  }

  TEST_CASE("constant scores match the exhaustive sweep oracle") {
    ScoredMap m;
    m.scores = Eigen::MatrixXd::Constant(4, 4, 0.5);
    m.mask.resize(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) m.mask(i) = i < 4 ? 1 : 0;
    CHECK(*c_iou(m) == doctest::Approx(c_iou_oracle(m)).epsilon(1e-12));
  }

  TEST_CASE("random maps match the exhaustive oracle exactly") {
    Rng rng(24);
    for (int t = 0; t < 100; ++t) {
      const int rows = 2 + rng.uniform_int(11);
      const int cols = 2 + rng.uniform_int(11);
      auto m = random_map(rows, cols, rng, t % 2 == 0 ? 3 : 0);
      if (!m.both_classes()) continue;
      CHECK(*c_iou(m) == doctest::Approx(c_iou_oracle(m)).epsilon(1e-12));
    }
  }

  TEST_CASE("single-class ground truth is skipped") {
    ScoredMap m;
    m.scores = Eigen::MatrixXd::Random(3, 3);
    m.mask.setZero(3, 3);
    CHECK_FALSE(c_iou(m).has_value());
  }

  TEST_CASE("invariant under ground-truth label swap") {
    Rng rng(25);
    for (int t = 0; t < 20; ++t) {
      auto m = random_map(6, 7, rng);
      if (!m.both_classes()) continue;
      ScoredMap swapped = m;
      for (Eigen::Index i = 0; i < swapped.mask.size(); ++i)
        swapped.mask(i) = swapped.mask(i) ? 0 : 1;
      CHECK(*c_iou(swapped) == doctest::Approx(*c_iou(m)).epsilon(1e-12));
    }
  }
}

TEST_SUITE("metrics_detection_map") {
  TEST_CASE("perfectly separated phi-bar values give mAP 1.0") {
    std::vector<std::pair<double, bool>> scored{
        {0.9, false}, {0.8, false}, {0.7, false}, {0.2, true}, {0.1, true}};
    CHECK(detection_map(scored) == doctest::Approx(1.0));
  }

  TEST_CASE("reversed separation scores below 0.5 on balanced data") {
    std::vector<std::pair<double, bool>> scored{
        {0.1, false}, {0.2, false}, {0.8, true}, {0.9, true}};
    // oracle: detection scores are -phi_bar
    std::vector<double> s;
    std::vector<uint8_t> l;
    for (auto& [phi, spliced] : scored) {
      s.push_back(-phi);
      l.push_back(spliced);
    }
    const double expect = ap_oracle(s, l);
    CHECK(detection_map(scored) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(detection_map(scored) < 0.5);
  }

  TEST_CASE("ties follow the grouped trapezoidal convention") {
    std::vector<std::pair<double, bool>> scored{
        {0.5, true}, {0.5, false}, {0.5, true}, {0.3, false}, {0.3, true}};
    std::vector<double> s{-0.5, -0.5, -0.5, -0.3, -0.3};
    std::vector<uint8_t> l{1, 0, 1, 0, 1};
    CHECK(detection_map(scored) == doctest::Approx(ap_oracle(s, l)).epsilon(1e-12));
  }

  TEST_CASE("single class is an error") {
    std::vector<std::pair<double, bool>> scored{{0.5, true}, {0.4, true}};
    CHECK_THROWS_AS(detection_map(scored), DataError);
  }
}
