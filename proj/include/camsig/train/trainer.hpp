#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "camsig/common.hpp"
#include "camsig/exif/record.hpp"
#include "camsig/exif/serialize.hpp"
#include "camsig/image/image.hpp"
#include "camsig/image/patch.hpp"
#include "camsig/nn/model.hpp"
#include "camsig/nn/optimizer.hpp"
#include "camsig/train/contrastive.hpp"

namespace camsig::train {

enum class SupervisionMode { FullExif, SingleTag, Description, CropClr };

inline const char* to_string(SupervisionMode m) {
  switch (m) {
    case SupervisionMode::FullExif: return "full-exif";
    case SupervisionMode::SingleTag: return "single-tag";
    case SupervisionMode::Description: return "description";
    case SupervisionMode::CropClr: return "cropclr";
  }
  return "?";
}

inline SupervisionMode supervision_from_string(const std::string& s) {
  if (s == "full-exif") return SupervisionMode::FullExif;
  if (s == "single-tag") return SupervisionMode::SingleTag;
  if (s == "description") return SupervisionMode::Description;
  if (s == "cropclr") return SupervisionMode::CropClr;
  throw DataError("unknown supervision mode: " + s);
}

// Text shown to the metadata encoder for one example, or nullopt when the
// example must be skipped (missing tag / missing caption).
inline std::optional<exif::CanonicalText> supervision_text(
    const exif::ExifRecord& record, SupervisionMode mode, const std::string& single_tag = {},
    const std::string& caption = {}, exif::SerializeFormat format = {}, Rng* rng = nullptr) {
  switch (mode) {
    case SupervisionMode::FullExif:
      if (record.empty()) return std::nullopt;
      return exif::serialize(record, format, rng);
    case SupervisionMode::SingleTag: {
      const std::string* value = record.value_of(single_tag);
      if (value == nullptr) return std::nullopt;
      exif::CanonicalText text;
      text.text = single_tag + ": " + *value;
      return text;
    }
    case SupervisionMode::Description: {
      if (caption.empty()) return std::nullopt;
      exif::CanonicalText text;
      text.text = caption;
      return text;
    }
    case SupervisionMode::CropClr:
      return std::nullopt;  // image-only mode has no text side
  }
  return std::nullopt;
}

struct TrainExample {
  std::string id;
  img::Image image;
  exif::ExifRecord record;
  std::string caption;
};

struct TrainConfig {
  double tau = 0.07;
  int batch_size = 64;
  int epochs = 10;
  double lr = 1e-3;
  double weight_decay = 1e-3;
  uint64_t seed = 1;
  int patch_side = 32;
  int min_tags = 10;
  SupervisionMode mode = SupervisionMode::FullExif;
  std::string single_tag;
  exif::TagOrder tag_order = exif::TagOrder::Fixed;
  exif::TagNames tag_names = exif::TagNames::With;
  int max_tokens = 256;
  int vocab_words = 512;
  std::vector<int> patch_channels{24, 48, 96};
  int embed_dim = 64;
  int text_dim = 64;
  int text_heads = 4;
  int text_layers = 2;
  int text_mlp = 128;
};

struct StepLog {
  int step = 0;
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainOutput {
  nn::DualEncoderModel model;
  std::vector<StepLog> steps;
  std::vector<std::pair<int, double>> epoch_retrieval;  // (epoch, top-1)
  std::vector<std::string> warnings;
  int examples_used = 0;
};

// Two distinct-origin crops of the same image (footprints may overlap).
inline std::optional<std::pair<img::PatchSpec, img::PatchSpec>> cropclr_pair(
    const img::Image& image, int side, Rng& rng) {
  if (image.width < side || image.height < side) return std::nullopt;
  if (image.width == side && image.height == side) return std::nullopt;  // one origin only
  const img::PatchSpec a = img::random_crop(image, side, rng);
  for (int attempt = 0; attempt < 32; ++attempt) {
    const img::PatchSpec b = img::random_crop(image, side, rng);
    if (b.x != a.x || b.y != a.y) return std::make_pair(a, b);
  }
  return std::nullopt;
}

namespace detail {

inline nn::PixelStats compute_pixel_stats(const std::vector<const TrainExample*>& examples) {
  nn::PixelStats stats;
  double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  size_t count = 0;
  const size_t max_images = 200;
  for (size_t i = 0; i < std::min(examples.size(), max_images); ++i) {
    const img::Image& im = examples[i]->image;
    for (int y = 0; y < im.height; y += 4)
      for (int x = 0; x < im.width; x += 4) {
        for (int c = 0; c < 3; ++c) {
          const double v = im.at(x, y, c) / 255.0;
          sum[c] += v;
          sq[c] += v * v;
        }
        ++count;
      }
  }
  if (count == 0) return stats;
  for (int c = 0; c < 3; ++c) {
    stats.mean[c] = sum[c] / count;
    const double var = std::max(1e-6, sq[c] / count - stats.mean[c] * stats.mean[c]);
    stats.stdev[c] = std::sqrt(var);
  }
  return stats;
}

}  // namespace detail

// Trains the dual encoder (or the image-only CropCLR variant) and returns the
// model plus the per-step loss log and per-epoch in-batch retrieval accuracy.
// Passing `resume_from` continues training that model: its tokenizer, pixel
// statistics, and architecture are kept, and step numbering carries on from
// the checkpoint's trained-step count.
inline TrainOutput train_model(const std::vector<TrainExample>& dataset, const TrainConfig& cfg,
                               const nn::DualEncoderModel* resume_from = nullptr) {
  if (cfg.batch_size < 2) throw DataError("train: batch size must be at least 2");
  TrainOutput out;

  // distinct-source rule: two entries for one image would create in-batch
  // false negatives
  {
    std::vector<std::string> ids;
    for (const auto& ex : dataset) ids.push_back(ex.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw DataError("train: duplicate source image ids in dataset");
  }

  // ---- select usable examples per supervision mode
  std::vector<const TrainExample*> usable;
  for (const auto& ex : dataset) {
    if (ex.image.width < cfg.patch_side || ex.image.height < cfg.patch_side) {
      out.warnings.push_back("skipped " + ex.id + ": image smaller than patch side");
      continue;
    }
    switch (cfg.mode) {
      case SupervisionMode::FullExif:
        if (!passes_training_filter(ex.record, cfg.min_tags)) {
          out.warnings.push_back("skipped " + ex.id + ": fails training filter");
          continue;
        }
        break;
      case SupervisionMode::SingleTag:
        if (!ex.record.has(cfg.single_tag)) {
          out.warnings.push_back("skipped " + ex.id + ": missing tag " + cfg.single_tag);
          continue;
        }
        break;
      case SupervisionMode::Description:
        if (ex.caption.empty()) {
          out.warnings.push_back("skipped " + ex.id + ": no caption");
          continue;
        }
        break;
      case SupervisionMode::CropClr:
        if (ex.image.width == cfg.patch_side && ex.image.height == cfg.patch_side) {
          out.warnings.push_back("skipped " + ex.id + ": too small for two crops");
          continue;
        }
        break;
    }
    usable.push_back(&ex);
  }
  if (usable.size() < 2) throw DataError("train: fewer than two usable examples");
  out.examples_used = static_cast<int>(usable.size());

  Rng rng(cfg.seed);

  // ---- tokenizer over fixed-order texts (same word set as any order)
  std::vector<std::string> fit_texts;
  if (cfg.mode != SupervisionMode::CropClr) {
    for (const TrainExample* ex : usable) {
      auto text = supervision_text(ex->record, cfg.mode, cfg.single_tag, ex->caption,
                                   exif::SerializeFormat{}, nullptr);
      if (text) fit_texts.push_back(text->text);
    }
  } else {
    fit_texts.push_back("cropclr");
  }
  // ---- model (fresh, or carried over from the resume checkpoint)
  nn::DualEncoderModel model;
  int step_offset = 0;
  if (resume_from != nullptr) {
    model = *resume_from;
    step_offset = model.steps_trained;
    if (model.patch_side != cfg.patch_side)
      throw DataError("train: resume checkpoint patch side differs from config");
  } else {
    std::vector<std::string> forced;
    for (const auto& name : exif::TagRegistry::default_registry().names())
      for (const auto& w : split(name, ' ')) forced.push_back(w);
    model.tokenizer = nn::Tokenizer::fit(fit_texts, forced, cfg.vocab_words);
    model.tau = cfg.tau;
    model.patch_side = cfg.patch_side;
    model.supervision = to_string(cfg.mode);
    model.pixel_stats = detail::compute_pixel_stats(usable);
    nn::PatchEncoderConfig pc;
    pc.channels = cfg.patch_channels;
    pc.embed_dim = cfg.embed_dim;
    nn::TextEncoderConfig tc;
    tc.vocab_size = model.tokenizer.vocab_size();
    tc.model_dim = cfg.text_dim;
    tc.heads = cfg.text_heads;
    tc.layers = cfg.text_layers;
    tc.mlp_dim = cfg.text_mlp;
    tc.max_len = cfg.max_tokens;
    tc.embed_dim = cfg.embed_dim;
    Rng init_rng = rng.fork(0xC0DE);
    model.patch = nn::PatchEncoder(pc, init_rng);
    model.text = nn::TextEncoder(tc, init_rng);
  }

  const int batch = std::min<int>(cfg.batch_size, static_cast<int>(usable.size()));
  const int steps_per_epoch =
      std::max(1, static_cast<int>(usable.size()) / std::max(1, batch));
  const int total_steps = step_offset + cfg.epochs * steps_per_epoch;

  nn::AdamW::Config ocfg;
  ocfg.lr = cfg.lr;
  ocfg.weight_decay = cfg.weight_decay;
  nn::AdamW optimizer(cfg.mode == SupervisionMode::CropClr ? model.patch.params()
                                                           : model.params(),
                      ocfg);

  const exif::SerializeFormat fmt{cfg.tag_order, cfg.tag_names};

  // deterministic eval batch for the per-epoch retrieval metric
  std::vector<const TrainExample*> eval_set(usable.begin(),
                                            usable.begin() + std::min<size_t>(batch, usable.size()));

  auto encode_text_batch = [&](const std::vector<const TrainExample*>& batch_ex,
                               exif::SerializeFormat format, Rng* order_rng, nn::Tape& tape) {
    std::vector<nn::TokenSeq> seqs;
    seqs.reserve(batch_ex.size());
    for (const TrainExample* ex : batch_ex) {
      auto text = supervision_text(ex->record, cfg.mode, cfg.single_tag, ex->caption, format,
                                   order_rng);
      seqs.push_back(model.tokenizer.encode(text->text, cfg.max_tokens));
    }
    return model.text.forward(tape, seqs);
  };

  int step = step_offset;
  std::vector<size_t> order(usable.size());
  std::iota(order.begin(), order.end(), size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (int bi = 0; bi < steps_per_epoch; ++bi) {
      std::vector<const TrainExample*> batch_ex;
      for (int k = 0; k < batch; ++k) batch_ex.push_back(usable[order[bi * batch + k]]);

      const double lr = nn::cosine_lr(cfg.lr, step, total_steps);
      nn::Tape tape;
      int loss_node = -1;
      if (cfg.mode == SupervisionMode::CropClr) {
        std::vector<img::Image> crops_a, crops_b;
        for (const TrainExample* ex : batch_ex) {
          auto pair = cropclr_pair(ex->image, cfg.patch_side, rng);
          if (!pair) continue;
          crops_a.push_back(img::extract_patch(ex->image, pair->first));
          crops_b.push_back(img::extract_patch(ex->image, pair->second));
        }
        if (crops_a.size() < 2) continue;
        auto ea = model.patch.forward(tape, model.pixels_to_input(crops_a),
                                      static_cast<int>(crops_a.size()), cfg.patch_side,
                                      cfg.patch_side);
        auto eb = model.patch.forward(tape, model.pixels_to_input(crops_b),
                                      static_cast<int>(crops_b.size()), cfg.patch_side,
                                      cfg.patch_side);
        loss_node = tape.info_nce(ea.embedding, eb.embedding, cfg.tau);
      } else {
        std::vector<img::Image> crops;
        for (const TrainExample* ex : batch_ex)
          crops.push_back(img::extract_patch(ex->image,
                                             img::random_crop(ex->image, cfg.patch_side, rng)));
        auto ev = model.patch.forward(tape, model.pixels_to_input(crops),
                                      static_cast<int>(crops.size()), cfg.patch_side,
                                      cfg.patch_side);
        const int em = encode_text_batch(batch_ex, fmt, &rng, tape);
        loss_node = tape.info_nce(ev.embedding, em, cfg.tau);
      }
      const double loss = tape.val(loss_node)(0, 0);
      if (!std::isfinite(loss)) throw DataError("train: loss diverged to non-finite");
      optimizer.zero_grad();
      tape.backward(loss_node);
      optimizer.step(lr);
      out.steps.push_back(StepLog{step, epoch, loss, lr});
      ++step;
    }

    // frozen-snapshot retrieval on the deterministic eval batch
    nn::Tape tape;
    Mat sim;
    if (cfg.mode == SupervisionMode::CropClr) {
      std::vector<img::Image> a, b;
      for (const TrainExample* ex : eval_set) {
        a.push_back(img::extract_patch(ex->image, {0, 0, cfg.patch_side}));
        b.push_back(img::extract_patch(
            ex->image, {ex->image.width - cfg.patch_side, ex->image.height - cfg.patch_side,
                        cfg.patch_side}));
      }
      auto ea = model.patch.forward(tape, model.pixels_to_input(a), static_cast<int>(a.size()),
                                    cfg.patch_side, cfg.patch_side);
      auto eb = model.patch.forward(tape, model.pixels_to_input(b), static_cast<int>(b.size()),
                                    cfg.patch_side, cfg.patch_side);
      sim = tape.val(ea.embedding).transpose() * tape.val(eb.embedding);
    } else {
      std::vector<img::Image> crops;
      for (const TrainExample* ex : eval_set) {
        const int cx = (ex->image.width - cfg.patch_side) / 2;
        const int cy = (ex->image.height - cfg.patch_side) / 2;
        crops.push_back(img::extract_patch(ex->image, {cx, cy, cfg.patch_side}));
      }
      auto ev = model.patch.forward(tape, model.pixels_to_input(crops),
                                    static_cast<int>(crops.size()), cfg.patch_side,
                                    cfg.patch_side);
      // evaluation always uses the deterministic fixed-order serialization
      const int em = encode_text_batch(eval_set, exif::SerializeFormat{}, nullptr, tape);
      sim = tape.val(ev.embedding).transpose() * tape.val(em);
    }
    out.epoch_retrieval.emplace_back(epoch, topk1_retrieval(sim));
  }

  model.steps_trained = step;
  out.model = std::move(model);
  return out;
}

}  // namespace camsig::train
