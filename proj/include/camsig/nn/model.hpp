#pragma once

#include <array>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "camsig/common.hpp"
#include "camsig/exif/registry.hpp"
#include "camsig/image/image.hpp"
#include "camsig/nn/encoders.hpp"
#include "camsig/nn/tokenizer.hpp"

namespace camsig::nn {

struct PixelStats {
  std::array<double, 3> mean{0.5, 0.5, 0.5};
  std::array<double, 3> stdev{0.25, 0.25, 0.25};
};

// The trained artifact: both encoders plus everything needed to reproduce
// their exact forward functions (tokenizer, pixel statistics, registry,
// temperature, patch geometry).
struct DualEncoderModel {
  PatchEncoder patch;
  TextEncoder text;
  Tokenizer tokenizer;
  PixelStats pixel_stats;
  exif::TagRegistry registry = exif::TagRegistry::default_registry();
  double tau = 0.07;
  int patch_side = 124;
  std::string supervision = "full-exif";
  int steps_trained = 0;

  std::vector<Param*> params() {
    auto out = patch.params();
    for (Param* p : text.params()) out.push_back(p);
    return out;
  }

  // Converts 8-bit RGB patches to the (3, N*S*S) normalized layout.
  Mat pixels_to_input(const std::vector<img::Image>& patches) const {
    if (patches.empty()) throw DataError("pixels_to_input: empty batch");
    const int h = patches[0].height, w = patches[0].width;
    Mat x(3, static_cast<Eigen::Index>(patches.size()) * h * w);
    for (size_t n = 0; n < patches.size(); ++n) {
      const auto& im = patches[n];
      if (im.width != w || im.height != h || im.channels != 3)
        throw DataError("pixels_to_input: inconsistent patch shapes");
      const Eigen::Index base = static_cast<Eigen::Index>(n) * h * w;
      for (int y = 0; y < h; ++y)
        for (int xp = 0; xp < w; ++xp)
          for (int c = 0; c < 3; ++c)
            x(c, base + static_cast<Eigen::Index>(y) * w + xp) =
                (im.at(xp, y, c) / 255.0 - pixel_stats.mean[c]) / pixel_stats.stdev[c];
    }
    return x;
  }
};

// ---------------------------------------------------------------------------
// Checkpoint file: magic + version, a JSON config block, then raw
// column-major double tensors. Round trips are bit-exact.

namespace ckpt_detail {
constexpr char kMagic[8] = {'C', 'A', 'M', 'S', 'I', 'G', 'C', 'K'};
constexpr uint32_t kVersion = 1;

inline void write_u64(std::ofstream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline uint64_t read_u64(std::ifstream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
}  // namespace ckpt_detail

inline void save_checkpoint(const std::string& path, DualEncoderModel& model) {
  nlohmann::json cfg;
  cfg["format_version"] = ckpt_detail::kVersion;
  cfg["tau"] = model.tau;
  cfg["patch_side"] = model.patch_side;
  cfg["supervision"] = model.supervision;
  cfg["steps_trained"] = model.steps_trained;
  cfg["pixel_mean"] = model.pixel_stats.mean;
  cfg["pixel_std"] = model.pixel_stats.stdev;
  cfg["registry"] = model.registry.names();
  // vocab entries include raw byte fallbacks, so they travel hex-encoded
  std::vector<std::string> vocab_hex;
  vocab_hex.reserve(model.tokenizer.vocab().size());
  for (const auto& piece : model.tokenizer.vocab()) vocab_hex.push_back(to_hex(piece));
  cfg["vocab_hex"] = vocab_hex;
  const auto& pc = model.patch.config();
  cfg["patch_encoder"] = {{"in_channels", pc.in_channels},
                          {"channels", pc.channels},
                          {"kernel", pc.kernel},
                          {"embed_dim", pc.embed_dim}};
  const auto& tc = model.text.config();
  cfg["text_encoder"] = {{"vocab_size", tc.vocab_size}, {"model_dim", tc.model_dim},
                         {"heads", tc.heads},           {"layers", tc.layers},
                         {"mlp_dim", tc.mlp_dim},       {"max_len", tc.max_len},
                         {"embed_dim", tc.embed_dim}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(ckpt_detail::kMagic, sizeof ckpt_detail::kMagic);
  const std::string cfg_str = cfg.dump();
  ckpt_detail::write_u64(out, cfg_str.size());
  out.write(cfg_str.data(), cfg_str.size());

  const auto params = model.params();
  ckpt_detail::write_u64(out, params.size());
  for (const Param* p : params) {
    ckpt_detail::write_u64(out, p->name.size());
    out.write(p->name.data(), p->name.size());
    ckpt_detail::write_u64(out, static_cast<uint64_t>(p->value.rows()));
    ckpt_detail::write_u64(out, static_cast<uint64_t>(p->value.cols()));
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double) * p->value.size()));
  }
  if (!out) throw DataError("checkpoint write failed: " + path);
}

inline DualEncoderModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, ckpt_detail::kMagic, sizeof magic) != 0)
    throw DataError("not a camsig checkpoint: " + path);
  const uint64_t cfg_len = ckpt_detail::read_u64(in);
  std::string cfg_str(cfg_len, '\0');
  in.read(cfg_str.data(), static_cast<std::streamsize>(cfg_len));
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(cfg_str);
  } catch (const nlohmann::json::exception&) {
    throw DataError("corrupt checkpoint config: " + path);
  }
  if (cfg.value("format_version", 0u) != ckpt_detail::kVersion)
    throw DataError("checkpoint version mismatch: " + path);

  DualEncoderModel model;
  model.tau = cfg.at("tau").get<double>();
  model.patch_side = cfg.at("patch_side").get<int>();
  model.supervision = cfg.at("supervision").get<std::string>();
  model.steps_trained = cfg.value("steps_trained", 0);
  model.pixel_stats.mean = cfg.at("pixel_mean").get<std::array<double, 3>>();
  model.pixel_stats.stdev = cfg.at("pixel_std").get<std::array<double, 3>>();
  model.registry = exif::TagRegistry(cfg.at("registry").get<std::vector<std::string>>());
  std::vector<std::string> vocab;
  for (const auto& hex : cfg.at("vocab_hex").get<std::vector<std::string>>())
    vocab.push_back(from_hex(hex));
  model.tokenizer = Tokenizer::from_vocab(std::move(vocab));

  PatchEncoderConfig pc;
  pc.in_channels = cfg["patch_encoder"].at("in_channels").get<int>();
  pc.channels = cfg["patch_encoder"].at("channels").get<std::vector<int>>();
  pc.kernel = cfg["patch_encoder"].at("kernel").get<int>();
  pc.embed_dim = cfg["patch_encoder"].at("embed_dim").get<int>();
  TextEncoderConfig tc;
  tc.vocab_size = cfg["text_encoder"].at("vocab_size").get<int>();
  tc.model_dim = cfg["text_encoder"].at("model_dim").get<int>();
  tc.heads = cfg["text_encoder"].at("heads").get<int>();
  tc.layers = cfg["text_encoder"].at("layers").get<int>();
  tc.mlp_dim = cfg["text_encoder"].at("mlp_dim").get<int>();
  tc.max_len = cfg["text_encoder"].at("max_len").get<int>();
  tc.embed_dim = cfg["text_encoder"].at("embed_dim").get<int>();
  Rng scratch(0);
  model.patch = PatchEncoder(pc, scratch);
  model.text = TextEncoder(tc, scratch);

  const uint64_t n_tensors = ckpt_detail::read_u64(in);
  std::map<std::string, Param*> by_name;
  for (Param* p : model.params()) by_name[p->name] = p;
  if (n_tensors != by_name.size())
    throw DataError("checkpoint tensor count mismatch: " + path);
  for (uint64_t i = 0; i < n_tensors; ++i) {
    const uint64_t name_len = ckpt_detail::read_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    const uint64_t rows = ckpt_detail::read_u64(in);
    const uint64_t cols = ckpt_detail::read_u64(in);
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("unknown checkpoint tensor: " + name);
    Param* p = it->second;
    if (static_cast<uint64_t>(p->value.rows()) != rows ||
        static_cast<uint64_t>(p->value.cols()) != cols)
      throw DataError("checkpoint tensor shape mismatch: " + name);
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
  }
  if (!in) throw DataError("truncated checkpoint: " + path);
  return model;
}

}  // namespace camsig::nn
