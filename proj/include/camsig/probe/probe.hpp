#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "camsig/common.hpp"
#include "camsig/exif/quantize.hpp"
#include "camsig/exif/record.hpp"
#include "camsig/image/image.hpp"
#include "camsig/nn/model.hpp"

namespace camsig::probe {

using Mat = Eigen::MatrixXd;

enum class Preprocessing { Resize, CenterCrop };

inline const char* to_string(Preprocessing p) {
  return p == Preprocessing::Resize ? "resize" : "crop";
}

struct ProbeConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double weight_decay = 0.0;
  int batch_size = 256;  // paper-scale default is 1024; scaled down for small sets
  int epochs = 20;
  bool normalize_features = true;
  uint64_t seed = 17;
  int train_percent = 80;  // deterministic split by id hash
};

// Frozen features (one row per example) from the patch encoder's pooled
// pre-projection layer, with labels and a deterministic train/held-out split.
struct FeatureSet {
  Mat features;                 // n x F, L2-normalized rows
  std::vector<int> labels;
  std::vector<uint8_t> in_train;
  std::string preprocessing;

  int count() const { return static_cast<int>(features.rows()); }
};

inline uint8_t split_of(const std::string& id, int train_percent) {
  return fnv1a64(id) % 100 < static_cast<uint64_t>(train_percent) ? 1 : 0;
}

// Runs images through the frozen encoder after resize / center-crop
// preprocessing and collects pooled features.
inline FeatureSet extract_features(nn::DualEncoderModel& model,
                                   const std::vector<img::Image>& images,
                                   const std::vector<std::string>& ids,
                                   const std::vector<int>& labels, Preprocessing prep,
                                   int input_side, const ProbeConfig& cfg = {}) {
  if (images.empty() || images.size() != ids.size() || images.size() != labels.size())
    throw DataError("extract_features: images/ids/labels size mismatch");
  FeatureSet out;
  out.preprocessing = to_string(prep);
  out.labels = labels;
  out.in_train.resize(images.size());
  for (size_t i = 0; i < ids.size(); ++i) out.in_train[i] = split_of(ids[i], cfg.train_percent);

  const int n = static_cast<int>(images.size());
  out.features.resize(n, model.patch.feature_dim());
  const int chunk = 32;
  const int n_chunks = (n + chunk - 1) / chunk;
  parallel_for(n_chunks, [&](int c) {
    const int lo = c * chunk, hi = std::min(n, lo + chunk);
    std::vector<img::Image> block;
    block.reserve(hi - lo);
    for (int i = lo; i < hi; ++i) {
      const img::Image& im = images[i];
      if (prep == Preprocessing::Resize) {
        block.push_back(im.width == input_side && im.height == input_side
                            ? im
                            : img::resize_bilinear(im, input_side, input_side));
      } else {
        block.push_back(img::center_crop(im, input_side));
      }
    }
    nn::Tape tape;
    auto fwd = model.patch.forward(tape, model.pixels_to_input(block), hi - lo, input_side,
                                   input_side);
    const Mat& pooled = tape.val(fwd.pooled);  // F x B
    for (int i = lo; i < hi; ++i) {
      Eigen::RowVectorXd row = pooled.col(i - lo).transpose();
      if (cfg.normalize_features) {
        const double norm = row.norm();
        if (norm > 0) row /= norm;
      }
      out.features.row(i) = row;
    }
  });
  return out;
}

struct ProbeResult {
  Mat weights;              // K x F
  Eigen::VectorXd bias;     // K
  double train_accuracy = 0.0;
  double accuracy = 0.0;    // held-out top-1
  int n_train = 0;
  int n_eval = 0;
  int n_classes = 0;
};

// Single linear layer trained with Adam on frozen features; reports top-1
// accuracy on the held-out split.
inline ProbeResult train_linear_probe(const FeatureSet& set, int n_classes,
                                      const ProbeConfig& cfg = {}) {
  std::vector<int> train_idx, eval_idx;
  for (int i = 0; i < set.count(); ++i) (set.in_train[i] ? train_idx : eval_idx).push_back(i);
  if (train_idx.empty() || eval_idx.empty())
    throw DataError("train_linear_probe: empty train or eval split");
  {
    std::vector<int> seen;
    for (int i : train_idx) seen.push_back(set.labels[i]);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    if (seen.size() < 2) throw DataError("train_linear_probe: fewer than two classes in train");
  }

  const int f = static_cast<int>(set.features.cols());
  ProbeResult res;
  res.n_classes = n_classes;
  res.n_train = static_cast<int>(train_idx.size());
  res.n_eval = static_cast<int>(eval_idx.size());
  res.weights = Mat::Zero(n_classes, f);
  res.bias = Eigen::VectorXd::Zero(n_classes);

  Mat mw = Mat::Zero(n_classes, f), vw = Mat::Zero(n_classes, f);
  Eigen::VectorXd mb = Eigen::VectorXd::Zero(n_classes), vb = Eigen::VectorXd::Zero(n_classes);
  int t = 0;
  Rng rng(cfg.seed);
  const int batch = std::min<int>(cfg.batch_size, static_cast<int>(train_idx.size()));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train_idx);
    for (size_t start = 0; start + batch <= train_idx.size(); start += batch) {
      Mat xb(batch, f);
      std::vector<int> yb(batch);
      for (int k = 0; k < batch; ++k) {
        xb.row(k) = set.features.row(train_idx[start + k]);
        yb[k] = set.labels[train_idx[start + k]];
      }
      Mat z = xb * res.weights.transpose();  // B x K
      z.rowwise() += res.bias.transpose();
      for (int r = 0; r < batch; ++r) {
        const double mx = z.row(r).maxCoeff();
        z.row(r) = (z.row(r).array() - mx).exp();
        z.row(r) /= z.row(r).sum();
      }
      for (int r = 0; r < batch; ++r) z(r, yb[r]) -= 1.0;
      z /= static_cast<double>(batch);
      const Mat gw = z.transpose() * xb;
      const Eigen::VectorXd gb = z.colwise().sum().transpose();

      ++t;
      const double bc1 = 1.0 - std::pow(cfg.beta1, t);
      const double bc2 = 1.0 - std::pow(cfg.beta2, t);
      mw = cfg.beta1 * mw + (1 - cfg.beta1) * gw;
      vw = cfg.beta2 * vw + (1 - cfg.beta2) * gw.cwiseProduct(gw);
      mb = cfg.beta1 * mb + (1 - cfg.beta1) * gb;
      vb = cfg.beta2 * vb + (1 - cfg.beta2) * gb.cwiseProduct(gb);
      if (cfg.weight_decay > 0) res.weights -= cfg.lr * cfg.weight_decay * res.weights;
      res.weights.array() -= cfg.lr * (mw.array() / bc1) / ((vw.array() / bc2).sqrt() + 1e-8);
      res.bias.array() -= cfg.lr * (mb.array() / bc1) / ((vb.array() / bc2).sqrt() + 1e-8);
    }
  }

  auto accuracy_on = [&](const std::vector<int>& idx) {
    int correct = 0;
    for (int i : idx) {
      Eigen::VectorXd z = res.weights * set.features.row(i).transpose() + res.bias;
      Eigen::Index best = 0;
      z.maxCoeff(&best);
      if (static_cast<int>(best) == set.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / idx.size();
  };
  res.train_accuracy = accuracy_on(train_idx);
  res.accuracy = accuracy_on(eval_idx);
  return res;
}

// ---------------------------------------------------------------------------
// Probe suites

struct TagProbeReport {
  std::string tag;
  int n_classes = 0;
  int n_examples = 0;
  double accuracy = 0.0;
  std::string note;  // set when the tag was excluded
};

struct ExifProbeSuiteResult {
  std::vector<TagProbeReport> per_tag;
  double macro_average = 0.0;
  int tags_probed = 0;
};

// One linear probe per registry tag on quantized labels; dropped examples are
// excluded per tag. Macro average is the unweighted mean over probed tags.
inline ExifProbeSuiteResult exif_probe_suite(nn::DualEncoderModel& model,
                                             const std::vector<img::Image>& images,
                                             const std::vector<exif::ExifRecord>& records,
                                             const std::vector<std::string>& ids,
                                             Preprocessing prep, int input_side,
                                             const ProbeConfig& cfg = {},
                                             exif::QuantizerOptions qopts = {}) {
  if (images.size() != records.size() || images.size() != ids.size())
    throw DataError("exif_probe_suite: input size mismatch");
  ExifProbeSuiteResult out;

  std::vector<int> zero_labels(images.size(), 0);
  FeatureSet base = extract_features(model, images, ids, zero_labels, prep, input_side, cfg);

  double sum = 0.0;
  for (const auto& tag : model.registry.names()) {
    std::vector<std::string> values;
    for (const auto& rec : records) {
      const std::string* v = rec.value_of(tag);
      if (v) values.push_back(*v);
    }
    TagProbeReport rep;
    rep.tag = tag;
    if (values.size() < 4) {
      rep.note = "absent";
      out.per_tag.push_back(rep);
      continue;
    }
    exif::TagQuantizer quantizer;
    try {
      quantizer = exif::fit_quantizer(tag, values, model.registry.brand_merged(tag), qopts);
    } catch (const DataError&) {
      rep.note = "unusable";
      out.per_tag.push_back(rep);
      continue;
    }
    if (quantizer.n_classes() < 2) {
      rep.note = "single-class";
      out.per_tag.push_back(rep);
      continue;
    }
    FeatureSet tag_set;
    tag_set.preprocessing = base.preprocessing;
    std::vector<int> keep;
    for (size_t i = 0; i < records.size(); ++i) {
      const std::string* v = records[i].value_of(tag);
      if (!v) continue;
      auto cls = quantizer.quantize(*v);
      if (!cls) continue;  // dropped value
      keep.push_back(static_cast<int>(i));
      tag_set.labels.push_back(*cls);
      tag_set.in_train.push_back(base.in_train[i]);
    }
    tag_set.features.resize(keep.size(), base.features.cols());
    for (size_t k = 0; k < keep.size(); ++k) tag_set.features.row(k) = base.features.row(keep[k]);
    rep.n_examples = static_cast<int>(keep.size());
    rep.n_classes = static_cast<int>(quantizer.n_classes());
    try {
      rep.accuracy = train_linear_probe(tag_set, rep.n_classes, cfg).accuracy;
    } catch (const DataError&) {
      rep.note = "split-degenerate";
      out.per_tag.push_back(rep);
      continue;
    }
    sum += rep.accuracy;
    ++out.tags_probed;
    out.per_tag.push_back(rep);
  }
  out.macro_average = out.tags_probed > 0 ? sum / out.tags_probed : 0.0;
  return out;
}

// Real-vs-manipulated binary probe.
inline ProbeResult forensics_probe(nn::DualEncoderModel& model,
                                   const std::vector<img::Image>& real,
                                   const std::vector<img::Image>& fake, Preprocessing prep,
                                   int input_side, const ProbeConfig& cfg = {}) {
  std::vector<img::Image> images;
  std::vector<std::string> ids;
  std::vector<int> labels;
  for (size_t i = 0; i < real.size(); ++i) {
    images.push_back(real[i]);
    ids.push_back("real-" + std::to_string(i));
    labels.push_back(0);
  }
  for (size_t i = 0; i < fake.size(); ++i) {
    images.push_back(fake[i]);
    ids.push_back("fake-" + std::to_string(i));
    labels.push_back(1);
  }
  FeatureSet set = extract_features(model, images, ids, labels, prep, input_side, cfg);
  return train_linear_probe(set, 2, cfg);
}

}  // namespace camsig::probe
