#pragma once

#include <string>
#include <vector>

#include "camsig/common.hpp"
#include "camsig/nn/graph.hpp"
#include "camsig/nn/tokenizer.hpp"

namespace camsig::nn {

// ---------------------------------------------------------------------------
// Patch encoder: stride-2 convolution stack -> GELU -> global average pool
// -> linear projection -> unit norm. The pooled activations (pre-projection)
// are the features used for linear probing.

struct PatchEncoderConfig {
  int in_channels = 3;
  std::vector<int> channels = {24, 48, 96};
  int kernel = 3;
  int embed_dim = 128;
};

class PatchEncoder {
 public:
  PatchEncoder() = default;

  PatchEncoder(const PatchEncoderConfig& cfg, Rng& rng) : cfg_(cfg) {
    int cin = cfg.in_channels;
    for (size_t l = 0; l < cfg.channels.size(); ++l) {
      const int cout = cfg.channels[l];
      const int fan_in = cin * cfg.kernel * cfg.kernel;
      conv_w_.emplace_back("patch.conv" + std::to_string(l) + ".w",
                           randn(cout, fan_in, std::sqrt(2.0 / fan_in), rng), true);
      conv_b_.emplace_back("patch.conv" + std::to_string(l) + ".b", Mat::Zero(cout, 1), false);
      cin = cout;
    }
    proj_w_ = Param("patch.proj.w", randn(cfg.embed_dim, cin, std::sqrt(1.0 / cin), rng), true);
    proj_b_ = Param("patch.proj.b", Mat::Zero(cfg.embed_dim, 1), false);
  }

  struct Out {
    int pooled;     // (C_last x N), pre-projection probe features
    int embedding;  // (D x N), unit columns
  };

  // pixels: (in_channels, batch * height * width), already normalized.
  Out forward(Tape& tape, const Mat& pixels, int batch, int height, int width) {
    int x = tape.input(pixels);
    return forward_node(tape, x, batch, height, width);
  }

  Out forward_node(Tape& tape, int x, int batch, int height, int width) {
    int h = height, w = width;
    int cin = cfg_.in_channels;
    for (size_t l = 0; l < conv_w_.size(); ++l) {
      ConvShape s{batch, cin, h, w, cfg_.channels[l], cfg_.kernel, 2, 1};
      x = tape.gelu(tape.conv2d(x, conv_w_[l], conv_b_[l], s));
      h = s.out_height();
      w = s.out_width();
      cin = cfg_.channels[l];
    }
    const int pooled = tape.gap(x, batch, h * w);
    const int emb = tape.l2_normalize_cols(tape.linear(tape.param(proj_w_), pooled,
                                                       tape.param(proj_b_)));
    return Out{pooled, emb};
  }

  std::vector<Param*> params() {
    std::vector<Param*> out;
    for (auto& p : conv_w_) out.push_back(&p);
    for (auto& p : conv_b_) out.push_back(&p);
    out.push_back(&proj_w_);
    out.push_back(&proj_b_);
    return out;
  }

  const PatchEncoderConfig& config() const { return cfg_; }
  int feature_dim() const { return cfg_.channels.back(); }

 private:
  static Mat randn(int rows, int cols, double sd, Rng& rng) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = sd * rng.normal();
    return m;
  }

  PatchEncoderConfig cfg_;
  std::vector<Param> conv_w_, conv_b_;
  Param proj_w_, proj_b_;
};

// ---------------------------------------------------------------------------
// Text encoder: token + learned positional embeddings, pre-norm transformer
// blocks, final layer norm; the end-of-sequence position is projected into
// the shared space and unit-normalized.

struct TextEncoderConfig {
  int vocab_size = 0;
  int model_dim = 64;
  int heads = 4;
  int layers = 2;
  int mlp_dim = 128;
  int max_len = 256;
  int embed_dim = 128;
};

class TextEncoder {
 public:
  TextEncoder() = default;

  TextEncoder(const TextEncoderConfig& cfg, Rng& rng) : cfg_(cfg) {
    const int E = cfg.model_dim;
    token_embed_ = Param("text.tok", randn(E, cfg.vocab_size, 0.02, rng), false);
    pos_embed_ = Param("text.pos", randn(E, cfg.max_len, 0.02, rng), false);
    const double wsd = std::sqrt(1.0 / E);
    for (int l = 0; l < cfg.layers; ++l) {
      Block b;
      const std::string pre = "text.block" + std::to_string(l) + ".";
      b.ln1_g = Param(pre + "ln1.g", Mat::Ones(E, 1), false);
      b.ln1_b = Param(pre + "ln1.b", Mat::Zero(E, 1), false);
      b.qkv_w = Param(pre + "qkv.w", randn(3 * E, E, wsd, rng), true);
      b.qkv_b = Param(pre + "qkv.b", Mat::Zero(3 * E, 1), false);
      b.att_w = Param(pre + "att.w", randn(E, E, wsd, rng), true);
      b.att_b = Param(pre + "att.b", Mat::Zero(E, 1), false);
      b.ln2_g = Param(pre + "ln2.g", Mat::Ones(E, 1), false);
      b.ln2_b = Param(pre + "ln2.b", Mat::Zero(E, 1), false);
      b.mlp1_w = Param(pre + "mlp1.w", randn(cfg.mlp_dim, E, wsd, rng), true);
      b.mlp1_b = Param(pre + "mlp1.b", Mat::Zero(cfg.mlp_dim, 1), false);
      b.mlp2_w = Param(pre + "mlp2.w", randn(E, cfg.mlp_dim, std::sqrt(1.0 / cfg.mlp_dim), rng),
                       true);
      b.mlp2_b = Param(pre + "mlp2.b", Mat::Zero(E, 1), false);
      blocks_.push_back(std::move(b));
    }
    lnf_g_ = Param("text.lnf.g", Mat::Ones(E, 1), false);
    lnf_b_ = Param("text.lnf.b", Mat::Zero(E, 1), false);
    proj_w_ = Param("text.proj.w", randn(cfg.embed_dim, E, wsd, rng), true);
    proj_b_ = Param("text.proj.b", Mat::Zero(cfg.embed_dim, 1), false);
  }

  // Returns the (D x N) unit-norm embedding node for a batch of sequences.
  int forward(Tape& tape, const std::vector<TokenSeq>& batch) {
    if (batch.empty()) throw DataError("text encoder: empty batch");
    std::vector<int> flat_ids;
    std::vector<int> offsets{0};
    std::vector<int> eos_positions;
    for (const auto& seq : batch) {
      if (seq.ids.empty()) throw DataError("text encoder: empty token sequence");
      if (seq.ids.back() != Tokenizer::kEos)
        throw DataError("text encoder: sequence must end with <eos>");
      if (seq.length() > cfg_.max_len)
        throw DataError("text encoder: sequence exceeds max length");
      flat_ids.insert(flat_ids.end(), seq.ids.begin(), seq.ids.end());
      eos_positions.push_back(static_cast<int>(flat_ids.size()) - 1);
      offsets.push_back(static_cast<int>(flat_ids.size()));
    }

    int x = tape.add_positional(tape.embedding(token_embed_, std::move(flat_ids)), pos_embed_,
                                offsets);
    for (auto& b : blocks_) {
      const int a = tape.layernorm_cols(x, tape.param(b.ln1_g), tape.param(b.ln1_b));
      const int qkv = tape.linear(tape.param(b.qkv_w), a, tape.param(b.qkv_b));
      const int att = tape.attention(qkv, offsets, cfg_.heads);
      x = tape.add(x, tape.linear(tape.param(b.att_w), att, tape.param(b.att_b)));
      const int m = tape.layernorm_cols(x, tape.param(b.ln2_g), tape.param(b.ln2_b));
      const int h = tape.gelu(tape.linear(tape.param(b.mlp1_w), m, tape.param(b.mlp1_b)));
      x = tape.add(x, tape.linear(tape.param(b.mlp2_w), h, tape.param(b.mlp2_b)));
    }
    const int y = tape.layernorm_cols(x, tape.param(lnf_g_), tape.param(lnf_b_));
    const int eos = tape.select_cols(y, eos_positions);
    return tape.l2_normalize_cols(
        tape.linear(tape.param(proj_w_), eos, tape.param(proj_b_)));
  }

  std::vector<Param*> params() {
    std::vector<Param*> out{&token_embed_, &pos_embed_};
    for (auto& b : blocks_) {
      for (Param* p : {&b.ln1_g, &b.ln1_b, &b.qkv_w, &b.qkv_b, &b.att_w, &b.att_b, &b.ln2_g,
                       &b.ln2_b, &b.mlp1_w, &b.mlp1_b, &b.mlp2_w, &b.mlp2_b})
        out.push_back(p);
    }
    for (Param* p : {&lnf_g_, &lnf_b_, &proj_w_, &proj_b_}) out.push_back(p);
    return out;
  }

  const TextEncoderConfig& config() const { return cfg_; }

 private:
  struct Block {
    Param ln1_g, ln1_b, qkv_w, qkv_b, att_w, att_b;
    Param ln2_g, ln2_b, mlp1_w, mlp1_b, mlp2_w, mlp2_b;
  };

  static Mat randn(int rows, int cols, double sd, Rng& rng) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = sd * rng.normal();
    return m;
  }

  TextEncoderConfig cfg_;
  Param token_embed_, pos_embed_;
  std::vector<Block> blocks_;
  Param lnf_g_, lnf_b_, proj_w_, proj_b_;
};

}  // namespace camsig::nn
