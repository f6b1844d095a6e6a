// camsig command-line workbench: corpus construction, dual-encoder training,
// zero-shot splice analysis, metric evaluation, and linear-probe benchmarks.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "camsig/cli/cache.hpp"
#include "camsig/cli/config.hpp"
#include "camsig/cli/manifest.hpp"
#include "camsig/cli/report.hpp"
#include "camsig/distortion/radial.hpp"
#include "camsig/exif/parse.hpp"
#include "camsig/forensics/engine.hpp"
#include "camsig/image/splice.hpp"
#include "camsig/metrics/metrics.hpp"
#include "camsig/probe/probe.hpp"
#include "camsig/synth/camera_sim.hpp"
#include "camsig/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace camsig;
using Clock = std::chrono::steady_clock;
using nlohmann::json;

namespace {

long elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

std::string default_cache_dir() {
  if (const char* env = std::getenv("CAMSIG_CACHE_DIR")) return env;
  return ".camsig-cache";
}

// ---------------------------------------------------------------------------
// synth-corpus: deterministic eight-camera corpus plus splice evaluation set

struct SynthArgs {
  std::string out;
  int images = 1024;
  int size = 192;
  int composites = 50;
  int pristine = 50;
  uint64_t seed = 2024;
  double splice_min = 0.12;
  double splice_max = 0.40;
};

int cmd_synth_corpus(const SynthArgs& a) {
  const auto t0 = Clock::now();
  fs::create_directories(a.out + "/train");
  fs::create_directories(a.out + "/eval");

  cli::Manifest train_manifest;
  for (int i = 0; i < a.images; ++i) {
    auto ex = synth::make_example(static_cast<uint64_t>(i), a.size, a.seed);
    char name[64];
    std::snprintf(name, sizeof name, "img_%05d", i);
    const std::string image_path = a.out + "/train/" + name + ".png";
    const std::string sidecar_path = a.out + "/train/" + name + ".tsv";
    img::write_png(image_path, ex.image);
    std::ofstream sidecar(sidecar_path);
    for (const auto& [tag, value] : ex.record.tags()) sidecar << tag << '\t' << value << '\n';
    cli::ManifestRow row;
    row.id = ex.id;
    row.image = image_path;
    row.sidecar = sidecar_path;
    row.caption = ex.caption;
    row.filtered = !exif::passes_training_filter(ex.record);
    train_manifest.rows.push_back(std::move(row));
  }
  train_manifest.save(a.out + "/train_manifest.tsv");

  // evaluation set: composites from held-out scene indices, plus pristine
  cli::Manifest eval_manifest;
  Rng rng(hash_combine(a.seed, 0x5011CE));
  const uint64_t eval_base = static_cast<uint64_t>(a.images) + 100000;
  for (int i = 0; i < a.composites; ++i) {
    const uint64_t host_idx = eval_base + static_cast<uint64_t>(i) * 2;
    uint64_t donor_idx = eval_base + static_cast<uint64_t>(i) * 2 + 1;
    if (donor_idx % 8 == host_idx % 8) ++donor_idx;  // force distinct cameras
    auto host = synth::make_example(host_idx, a.size, a.seed);
    auto donor = synth::make_example(donor_idx, a.size, a.seed);
    auto spliced = img::synth_splice(host.image, donor.image,
                                     i % 2 ? img::MaskShape::Rectangle : img::MaskShape::Ellipse,
                                     rng, a.splice_min, a.splice_max);
    char name[64];
    std::snprintf(name, sizeof name, "composite_%03d", i);
    const std::string image_path = a.out + "/eval/" + name + ".png";
    const std::string mask_path = a.out + "/eval/" + name + "_mask.png";
    img::write_png(image_path, spliced.composite);
    img::write_png(mask_path, spliced.mask);
    cli::ManifestRow row;
    row.id = name;
    row.image = image_path;
    row.mask = mask_path;
    row.label = "spliced";
    eval_manifest.rows.push_back(std::move(row));
  }
  for (int i = 0; i < a.pristine; ++i) {
    auto ex = synth::make_example(eval_base + 10000 + static_cast<uint64_t>(i), a.size, a.seed);
    char name[64];
    std::snprintf(name, sizeof name, "pristine_%03d", i);
    const std::string image_path = a.out + "/eval/" + name + ".png";
    img::write_png(image_path, ex.image);
    cli::ManifestRow row;
    row.id = name;
    row.image = image_path;
    row.label = "pristine";
    eval_manifest.rows.push_back(std::move(row));
  }
  eval_manifest.save(a.out + "/eval_manifest.tsv");

  json report{{"command", "synth-corpus"},
              {"images", a.images},
              {"composites", a.composites},
              {"pristine", a.pristine},
              {"image_size", a.size},
              {"seed", a.seed},
              {"timing", {{"elapsed_ms", elapsed_ms(t0)}}}};
  cli::write_json(a.out + "/synth_report.json", report);
  std::cout << "wrote " << a.images << " training images and "
            << a.composites + a.pristine << " evaluation images under " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// build-corpus: scan a directory, extract metadata, apply the training filter

int cmd_build_corpus(const std::string& source, const std::string& out_path) {
  if (!fs::is_directory(source)) throw DataError("not a directory: " + source);
  std::vector<std::string> images;
  for (const auto& entry : fs::directory_iterator(source)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".tif" || ext == ".tiff")
      images.push_back(entry.path().string());
  }
  std::sort(images.begin(), images.end());
  if (images.empty()) std::cerr << "warning: no images found under " << source << "\n";

  cli::Manifest manifest;
  for (const auto& image : images) {
    cli::ManifestRow row;
    row.id = fs::path(image).stem().string();
    row.image = image;
    // a sidecar next to the image wins over embedded metadata
    for (const char* ext : {".tsv", ".json", ".txt"}) {
      const std::string sidecar =
          (fs::path(image).parent_path() / (fs::path(image).stem().string() + ext)).string();
      if (fs::exists(sidecar)) {
        row.sidecar = sidecar;
        break;
      }
    }
    exif::ExifRecord record = exif::parse_exif(row.sidecar.empty() ? row.image : row.sidecar);
    row.filtered = !exif::passes_training_filter(record);
    manifest.rows.push_back(std::move(row));
  }
  manifest.save(out_path);
  int kept = 0;
  for (const auto& r : manifest.rows) kept += r.filtered ? 0 : 1;
  std::cout << "manifest: " << manifest.rows.size() << " rows, " << kept
            << " pass the training filter -> " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

train::TrainConfig config_to_train(const cli::Config& cfg) {
  train::TrainConfig t;
  t.tau = cfg.get_double("train.tau", t.tau);
  t.batch_size = cfg.get_int("train.batch", 64);
  t.epochs = cfg.get_int("train.epochs", 30);
  t.lr = cfg.get_double("train.lr", 2e-3);
  t.weight_decay = cfg.get_double("train.weight_decay", 1e-3);
  t.seed = cfg.get_u64("train.seed", 1);
  t.patch_side = cfg.get_int("train.patch_side", 40);
  t.min_tags = cfg.get_int("train.min_tags", 10);
  t.mode = train::supervision_from_string(cfg.get_string("train.mode", "full-exif"));
  t.single_tag = cfg.get_string("train.single_tag", "");
  t.tag_order = cfg.get_string("train.tag_order", "fixed") == "random"
                    ? exif::TagOrder::Random
                    : exif::TagOrder::Fixed;
  t.tag_names = cfg.get_string("train.tag_names", "with") == "without"
                    ? exif::TagNames::Without
                    : exif::TagNames::With;
  t.max_tokens = cfg.get_int("train.max_tokens", 128);
  t.vocab_words = cfg.get_int("train.vocab_words", 512);
  t.embed_dim = cfg.get_int("train.embed_dim", 64);
  t.text_dim = cfg.get_int("train.text_dim", 64);
  t.text_heads = cfg.get_int("train.text_heads", 4);
  t.text_layers = cfg.get_int("train.text_layers", 2);
  t.text_mlp = cfg.get_int("train.text_mlp", 128);
  const std::string channels = cfg.get_string("train.channels", "24,48,96");
  t.patch_channels.clear();
  for (const auto& c : split(channels, ','))
    if (!trim(c).empty()) t.patch_channels.push_back(std::stoi(trim(c)));
  return t;
}

std::vector<train::TrainExample> load_training_set(const cli::Manifest& manifest) {
  std::vector<const cli::ManifestRow*> rows;
  for (const auto& row : manifest.rows)
    if (!row.filtered) rows.push_back(&row);
  std::vector<train::TrainExample> out(rows.size());
  parallel_for(static_cast<int>(rows.size()), [&](int i) {
    const auto& row = *rows[i];
    train::TrainExample ex;
    ex.id = row.id;
    ex.image = img::read_png(row.image);
    ex.record = exif::parse_exif(row.sidecar.empty() ? row.image : row.sidecar);
    ex.caption = row.caption;
    out[i] = std::move(ex);
  });
  return out;
}

int cmd_train(const std::string& manifest_path, const std::string& out_ckpt,
              const std::string& log_path, const cli::Config& cfg,
              const std::string& resume_path) {
  const auto t0 = Clock::now();
  auto manifest = cli::Manifest::load(manifest_path);
  auto dataset = load_training_set(manifest);
  const train::TrainConfig tcfg = config_to_train(cfg);

  std::optional<nn::DualEncoderModel> resume;
  if (!resume_path.empty()) resume = nn::load_checkpoint(resume_path);
  auto result = train::train_model(dataset, tcfg, resume ? &*resume : nullptr);

  nn::save_checkpoint(out_ckpt, result.model);

  std::ostringstream log;
  log << "# camsig training log\n";
  for (const auto& w : result.warnings) log << "warning=" << w << '\n';
  size_t next_epoch_metric = 0;
  for (const auto& s : result.steps) {
    while (next_epoch_metric < result.epoch_retrieval.size() &&
           result.epoch_retrieval[next_epoch_metric].first < s.epoch) {
      const auto& [epoch, acc] = result.epoch_retrieval[next_epoch_metric++];
      log << "epoch=" << epoch << " retrieval_top1=" << fmt_trim(acc) << '\n';
    }
    char line[160];
    std::snprintf(line, sizeof line, "step=%d epoch=%d loss=%.9f lr=%.9f", s.step, s.epoch,
                  s.loss, s.lr);
    log << line << '\n';
  }
  for (; next_epoch_metric < result.epoch_retrieval.size(); ++next_epoch_metric) {
    const auto& [epoch, acc] = result.epoch_retrieval[next_epoch_metric];
    log << "epoch=" << epoch << " retrieval_top1=" << fmt_trim(acc) << '\n';
  }
  cli::write_text(log_path.empty() ? out_ckpt + ".log" : log_path, log.str());

  std::cout << "trained " << result.steps.size() << " steps on " << result.examples_used
            << " examples in " << elapsed_ms(t0) / 1000 << "s; final loss "
            << (result.steps.empty() ? 0.0 : result.steps.back().loss) << "; checkpoint -> "
            << out_ckpt << "\n";
  if (!result.epoch_retrieval.empty())
    std::cout << "final in-batch retrieval top-1: " << result.epoch_retrieval.back().second
              << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string checkpoint;
  std::string image;
  std::string dir;
  std::string out_root = "runs";
  std::string run_dir;
  std::string cache_dir = default_cache_dir();
  bool no_cache = false;
  int grid_n = 25;
};

json analyze_one(nn::DualEncoderModel& model, const std::string& image_path,
                 const std::string& out_dir, const cli::EmbeddingCache* cache,
                 uint64_t ckpt_hash, int grid_n) {
  const auto t0 = Clock::now();
  const img::Image image = img::read_png(image_path);
  if (image.channels != 3) {
    std::cerr << "skipping non-RGB image: " << image_path << "\n";
    return json{{"image", image_path},
                {"id", fs::path(image_path).stem().string()},
                {"skipped", "not an RGB image"}};
  }
  forensics::AnalysisConfig acfg;
  acfg.n_longest = grid_n;

  img::PatchGrid grid = img::build_grid(image.width, image.height, model.patch_side, grid_n);
  std::ostringstream grid_desc;
  grid_desc << "side=" << model.patch_side << ";n=" << grid_n << ";w=" << image.width
            << ";h=" << image.height;
  bool cache_hit = false;
  Eigen::MatrixXd embeddings;
  cli::EmbeddingCache::Key key;
  if (cache != nullptr) {
    key = cli::EmbeddingCache::make_key(cli::file_content_hash(image_path), grid_desc.str(),
                                        ckpt_hash);
    if (auto hit = cache->lookup(key)) {
      embeddings = std::move(*hit);
      cache_hit = true;
    }
  }
  if (!cache_hit) {
    embeddings = forensics::embed_grid_patches(model, image, grid);
    if (cache != nullptr) cache->store(key, embeddings);
  }
  auto res = forensics::analyze_embeddings(model, image, std::move(grid), embeddings, acfg);

  const std::string stem = fs::path(image_path).stem().string();
  const std::string response_path = out_dir + "/" + stem + "_response.png";
  const std::string mask_path = out_dir + "/" + stem + "_mask.png";
  const std::string overlay_path = out_dir + "/" + stem + "_overlay.png";
  img::write_png(response_path, cli::response_to_image(res.response));
  img::write_png(mask_path, res.mask);
  img::write_png(overlay_path, cli::overlay_response(image, res.response));

  return json{{"image", image_path},
              {"id", stem},
              {"phi", res.phi},
              {"phi_bar", res.phi_bar},
              {"splice_detected", res.splice_detected},
              {"ncut_objective", res.ncut_objective},
              {"n_patches", res.n_patches},
              {"grid",
               {{"rows", res.grid.rows},
                {"cols", res.grid.cols},
                {"side", res.grid.side},
                {"stride_x", res.grid.stride_x},
                {"stride_y", res.grid.stride_y}}},
              {"cache_hit", cache_hit},
              {"outputs",
               {{"response", response_path}, {"mask", mask_path}, {"overlay", overlay_path}}},
              {"timing", {{"elapsed_ms", elapsed_ms(t0)}}}};
}

int cmd_analyze(const AnalyzeArgs& a, const cli::Config& cfg) {
  const auto t0 = Clock::now();
  auto model = nn::load_checkpoint(a.checkpoint);
  const uint64_t ckpt_hash = cli::file_content_hash(a.checkpoint);

  std::vector<std::string> images;
  if (!a.image.empty()) images.push_back(a.image);
  if (!a.dir.empty()) {
    for (const auto& entry : fs::directory_iterator(a.dir))
      if (entry.is_regular_file() && entry.path().extension() == ".png")
        images.push_back(entry.path().string());
    std::sort(images.begin(), images.end());
  }
  if (images.empty()) throw UsageError("analyze: provide --image or --dir with PNG images");

  const std::string out_dir = cli::make_run_dir(a.out_root, cfg.hash(), a.run_dir);
  std::optional<cli::EmbeddingCache> cache;
  if (!a.no_cache) cache.emplace(a.cache_dir);

  json images_report = json::array();
  int detected = 0, skipped = 0;
  for (const auto& path : images) {
    json one = analyze_one(model, path, out_dir, cache ? &*cache : nullptr, ckpt_hash, a.grid_n);
    if (one.contains("skipped")) {
      ++skipped;
    } else {
      detected += one["splice_detected"].get<bool>() ? 1 : 0;
      std::cout << one["id"].get<std::string>() << ": phi_bar=" << one["phi_bar"].get<double>()
                << (one["splice_detected"].get<bool>() ? " [splice]" : " [clean]") << "\n";
    }
    images_report.push_back(std::move(one));
  }

  json report{{"command", "analyze"},
              {"checkpoint", a.checkpoint},
              {"grid_n", a.grid_n},
              {"images", images_report},
              {"summary",
               {{"n_images", images.size()},
                {"n_splice_detected", detected},
                {"n_skipped", skipped}}},
              {"timing", {{"elapsed_ms", elapsed_ms(t0)}}}};
  cli::write_json(out_dir + "/report.json", report);
  cli::write_text(out_dir + "/effective_config.txt", cfg.dump_effective());
  std::cout << "report -> " << out_dir << "/report.json\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate: localization metrics over response/mask pairs (+ detection mAP
// when an analyze report supplies phi_bar and the manifest labels rows)

int cmd_evaluate(const std::string& manifest_path, const std::string& analysis_path,
                 const std::string& out_path) {
  auto manifest = cli::Manifest::load(manifest_path);
  std::map<std::string, double> phi_bar_by_id;
  if (!analysis_path.empty()) {
    std::ifstream in(analysis_path);
    if (!in) throw DataError("cannot read analysis report: " + analysis_path);
    json report = json::parse(in, nullptr, false);
    if (report.is_discarded()) throw DataError("malformed analysis report: " + analysis_path);
    for (const auto& one : report.at("images"))
      if (one.contains("phi_bar"))
        phi_bar_by_id[one.at("id").get<std::string>()] = one.at("phi_bar").get<double>();
  }

  json rows = json::array();
  std::vector<double> pmaps, cious;
  std::vector<std::pair<double, bool>> detection;
  int skipped = 0;
  for (const auto& row : manifest.rows) {
    json entry{{"id", row.id}};
    if (!row.mask.empty() && !row.image.empty()) {
      // in evaluation manifests the image column holds the response map
      const img::Image response_png = img::read_png(row.image);
      const img::Image mask_png = img::read_png(row.mask);
      if (response_png.channels != 1 || mask_png.channels != 1)
        throw DataError("evaluate: response and mask must be single-channel: " + row.id);
      metrics::ScoredMap sm;
      sm.scores.resize(response_png.height, response_png.width);
      sm.mask.resize(mask_png.height, mask_png.width);
      for (int y = 0; y < response_png.height; ++y)
        for (int x = 0; x < response_png.width; ++x)
          sm.scores(y, x) = response_png.at(x, y, 0) / 255.0;
      for (int y = 0; y < mask_png.height; ++y)
        for (int x = 0; x < mask_png.width; ++x) sm.mask(y, x) = mask_png.at(x, y, 0) ? 1 : 0;
      const auto pm = metrics::p_map(sm);
      const auto ci = metrics::c_iou(sm);
      if (pm && ci) {
        pmaps.push_back(*pm);
        cious.push_back(*ci);
        entry["p_map"] = *pm;
        entry["c_iou"] = *ci;
      } else {
        ++skipped;
        entry["skipped"] = "single-class ground truth";
      }
    }
    if (!row.label.empty()) {
      auto it = phi_bar_by_id.find(row.id);
      if (it != phi_bar_by_id.end()) {
        detection.emplace_back(it->second, row.label == "spliced");
        entry["phi_bar"] = it->second;
        entry["label"] = row.label;
      }
    }
    rows.push_back(std::move(entry));
  }

  json aggregate;
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
  };
  if (!pmaps.empty()) {
    aggregate["mean_p_map"] = mean(pmaps);
    aggregate["mean_c_iou"] = mean(cious);
    aggregate["n_localized"] = pmaps.size();
  }
  aggregate["n_skipped_single_class"] = skipped;
  bool has_pos = false, has_neg = false;
  for (const auto& [phi, spliced] : detection) (spliced ? has_pos : has_neg) = true;
  const bool has_both = has_pos && has_neg;
  if (has_both) aggregate["detection_map"] = metrics::detection_map(detection);

  json report{{"command", "evaluate"}, {"rows", rows}, {"aggregate", aggregate}};
  cli::write_json(out_path, report);
  std::cout << "evaluated " << rows.size() << " rows";
  if (!pmaps.empty())
    std::cout << "; mean p-mAP " << aggregate["mean_p_map"].get<double>() << ", mean cIoU "
              << aggregate["mean_c_iou"].get<double>();
  if (has_both) std::cout << "; detection mAP " << aggregate["detection_map"].get<double>();
  std::cout << " -> " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// distortion-bench

int cmd_distortion_bench(const std::string& manifest_path, const std::string& checkpoint,
                         const std::string& out_path, int count, int square, int probe_side,
                         uint64_t seed) {
  const auto t0 = Clock::now();
  auto model = nn::load_checkpoint(checkpoint);
  auto manifest = cli::Manifest::load(manifest_path);

  std::vector<const cli::ManifestRow*> rows;
  for (const auto& r : manifest.rows)
    if (!r.image.empty()) rows.push_back(&r);
  if (rows.empty()) throw DataError("distortion-bench: manifest has no images");
  if (count > 0 && static_cast<int>(rows.size()) > count) rows.resize(count);

  std::vector<img::Image> distorted(rows.size());
  std::vector<int> labels(rows.size());
  std::vector<std::string> ids(rows.size());
  parallel_for(static_cast<int>(rows.size()), [&](int i) {
    img::Image im = img::read_png(rows[i]->image);
    if (im.channels != 3) throw DataError("distortion-bench: RGB image required");
    if (im.width != square || im.height != square) im = img::resize_bilinear(im, square, square);
    Rng rng = Rng(seed).fork(static_cast<uint64_t>(i));
    const auto params = distortion::sample_k1(rng);
    distorted[i] = distortion::distort_image(im, params);
    labels[i] = distortion::bin_k1(params.k1);
    ids[i] = rows[i]->id;
  });

  probe::ProbeConfig pcfg;
  pcfg.seed = seed;
  auto features = probe::extract_features(model, distorted, ids, labels,
                                          probe::Preprocessing::Resize, probe_side, pcfg);
  const auto result = probe::train_linear_probe(features, distortion::K1Binner::kBins, pcfg);

  // permutation baseline: shuffled labels should sit at chance
  probe::FeatureSet shuffled = features;
  Rng shuffle_rng(hash_combine(seed, 0xBA5E));
  shuffle_rng.shuffle(shuffled.labels);
  const auto baseline = probe::train_linear_probe(shuffled, distortion::K1Binner::kBins, pcfg);

  json report{{"command", "distortion-bench"},
              {"checkpoint", checkpoint},
              {"n_images", rows.size()},
              {"bins", distortion::K1Binner::kBins},
              {"square", square},
              {"probe_side", probe_side},
              {"accuracy", result.accuracy},
              {"train_accuracy", result.train_accuracy},
              {"chance", 1.0 / distortion::K1Binner::kBins},
              {"shuffled_accuracy", baseline.accuracy},
              {"n_train", result.n_train},
              {"n_eval", result.n_eval},
              {"timing", {{"elapsed_ms", elapsed_ms(t0)}}}};
  cli::write_json(out_path, report);
  std::cout << "distortion probe: accuracy " << result.accuracy << " (chance "
            << 1.0 / distortion::K1Binner::kBins << ", shuffled " << baseline.accuracy
            << ") -> " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// probe-exif

int cmd_probe_exif(const std::string& manifest_path, const std::string& checkpoint,
                   const std::string& out_path, const std::string& preprocessing,
                   uint64_t seed) {
  const auto t0 = Clock::now();
  auto model = nn::load_checkpoint(checkpoint);
  auto manifest = cli::Manifest::load(manifest_path);

  std::vector<const cli::ManifestRow*> rows;
  for (const auto& r : manifest.rows)
    if (!r.filtered && !r.image.empty()) rows.push_back(&r);
  if (rows.empty()) throw DataError("probe-exif: no usable manifest rows");

  std::vector<img::Image> images(rows.size());
  std::vector<exif::ExifRecord> records(rows.size());
  std::vector<std::string> ids(rows.size());
  parallel_for(static_cast<int>(rows.size()), [&](int i) {
    images[i] = img::read_png(rows[i]->image);
    records[i] = exif::parse_exif(rows[i]->sidecar.empty() ? rows[i]->image : rows[i]->sidecar);
    ids[i] = rows[i]->id;
  });

  probe::ProbeConfig pcfg;
  pcfg.seed = seed;
  const auto prep = preprocessing == "crop" ? probe::Preprocessing::CenterCrop
                                            : probe::Preprocessing::Resize;
  const auto suite =
      probe::exif_probe_suite(model, images, records, ids, prep, model.patch_side, pcfg);

  std::ostringstream table;
  table << "tag\tn_classes\tn_examples\taccuracy\tnote\n";
  json tags = json::array();
  for (const auto& rep : suite.per_tag) {
    table << rep.tag << '\t' << rep.n_classes << '\t' << rep.n_examples << '\t'
          << (rep.note.empty() ? fmt_trim(rep.accuracy) : std::string("-")) << '\t'
          << (rep.note.empty() ? "ok" : rep.note) << '\n';
    tags.push_back(json{{"tag", rep.tag},
                        {"n_classes", rep.n_classes},
                        {"n_examples", rep.n_examples},
                        {"accuracy", rep.accuracy},
                        {"note", rep.note}});
  }
  table << "macro_average\t-\t-\t" << fmt_trim(suite.macro_average) << "\t(" << suite.tags_probed
        << " tags)\n";
  cli::write_text(out_path + ".tsv", table.str());
  json report{{"command", "probe-exif"},
              {"checkpoint", checkpoint},
              {"preprocessing", preprocessing},
              {"tags", tags},
              {"macro_average", suite.macro_average},
              {"tags_probed", suite.tags_probed},
              {"timing", {{"elapsed_ms", elapsed_ms(t0)}}}};
  cli::write_json(out_path, report);
  std::cout << "probed " << suite.tags_probed << " tags; macro average " << suite.macro_average
            << " -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camsig: camera-signature embeddings and zero-shot image forensics"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth-corpus",
                                   "generate the synthetic eight-camera corpus and splice set");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--images", synth_args.images, "number of training images");
  synth->add_option("--size", synth_args.size, "image side length (multiple of 8)");
  synth->add_option("--composites", synth_args.composites, "number of spliced eval images");
  synth->add_option("--pristine", synth_args.pristine, "number of pristine eval images");
  synth->add_option("--seed", synth_args.seed, "generation seed");
  synth->add_option("--splice-min", synth_args.splice_min, "minimum splice area fraction");
  synth->add_option("--splice-max", synth_args.splice_max, "maximum splice area fraction");

  std::string source_dir, manifest_out;
  auto* build = app.add_subcommand("build-corpus", "scan images and write a training manifest");
  build->add_option("--source", source_dir, "directory of images (+ optional sidecars)")
      ->required();
  build->add_option("--out", manifest_out, "manifest output path")->required();

  std::string train_manifest, train_out, train_log, train_config, train_resume;
  std::vector<std::string> overrides;
  auto* train_cmd = app.add_subcommand("train", "train the dual encoder");
  train_cmd->add_option("--manifest", train_manifest, "training manifest")->required();
  train_cmd->add_option("--out", train_out, "checkpoint output path")->required();
  train_cmd->add_option("--log", train_log, "training log path (default: <out>.log)");
  train_cmd->add_option("--config", train_config, "key = value config file");
  train_cmd->add_option("--set", overrides, "config override key=value (repeatable)");
  train_cmd->add_option("--resume", train_resume, "checkpoint to continue training from");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "zero-shot splice detection and localization");
  analyze->add_option("--checkpoint", an.checkpoint, "trained checkpoint")->required();
  analyze->add_option("--image", an.image, "single image to analyze");
  analyze->add_option("--dir", an.dir, "directory of PNG images");
  analyze->add_option("--out", an.out_root, "run directory root");
  analyze->add_option("--run-dir", an.run_dir, "explicit run directory (skips timestamping)");
  analyze->add_option("--cache-dir", an.cache_dir, "embedding cache directory");
  analyze->add_flag("--no-cache", an.no_cache, "disable the embedding cache");
  analyze->add_option("--grid-n", an.grid_n, "patches along the longest dimension");

  std::string eval_manifest, eval_analysis, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "localization/detection metrics");
  evaluate
      ->add_option("--manifest", eval_manifest,
                   "rows: id, response map (image column), ground-truth mask, label")
      ->required();
  evaluate->add_option("--analysis", eval_analysis, "analyze report.json for phi_bar values");
  evaluate->add_option("--out", eval_out, "metrics report output")->required();

  std::string db_manifest, db_ckpt, db_out;
  int db_count = 0, db_square = 256, db_probe_side = 64;
  uint64_t db_seed = 5;
  auto* bench = app.add_subcommand("distortion-bench", "radial distortion 20-bin probe");
  bench->add_option("--manifest", db_manifest, "manifest of source images")->required();
  bench->add_option("--checkpoint", db_ckpt, "trained checkpoint")->required();
  bench->add_option("--out", db_out, "report output path")->required();
  bench->add_option("--count", db_count, "limit the number of images (0 = all)");
  bench->add_option("--square", db_square, "distortion render size");
  bench->add_option("--probe-side", db_probe_side, "encoder input side for features");
  bench->add_option("--seed", db_seed, "sampling seed");

  std::string pe_manifest, pe_ckpt, pe_out, pe_prep = "resize";
  uint64_t pe_seed = 5;
  auto* probe_cmd = app.add_subcommand("probe-exif", "per-tag linear probes on frozen features");
  probe_cmd->add_option("--manifest", pe_manifest, "corpus manifest with sidecars")->required();
  probe_cmd->add_option("--checkpoint", pe_ckpt, "trained checkpoint")->required();
  probe_cmd->add_option("--out", pe_out, "report output path (json; .tsv table alongside)")
      ->required();
  probe_cmd->add_option("--preprocessing", pe_prep, "resize | crop");
  probe_cmd->add_option("--seed", pe_seed, "probe seed");

  try {
    app.parse(argc, argv);
    if (*synth) return cmd_synth_corpus(synth_args);
    if (*build) return cmd_build_corpus(source_dir, manifest_out);
    if (*train_cmd) {
      cli::Config cfg;
      if (!train_config.empty()) cfg = cli::Config::load(train_config);
      for (const auto& kv : overrides) cfg.set_override(kv);
      return cmd_train(train_manifest, train_out, train_log, cfg, train_resume);
    }
    if (*analyze) {
      cli::Config cfg;
      cfg.set("analyze.grid_n", std::to_string(an.grid_n));
      cfg.set("analyze.checkpoint", an.checkpoint);
      return cmd_analyze(an, cfg);
    }
    if (*evaluate) return cmd_evaluate(eval_manifest, eval_analysis, eval_out);
    if (*bench)
      return cmd_distortion_bench(db_manifest, db_ckpt, db_out, db_count, db_square,
                                  db_probe_side, db_seed);
    if (*probe_cmd) return cmd_probe_exif(pe_manifest, pe_ckpt, pe_out, pe_prep, pe_seed);
    throw UsageError("no subcommand selected");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
