#include <chrono>
#include <cstdio>
#include "camsig/synth/camera_sim.hpp"
#include "camsig/train/trainer.hpp"
#include "camsig/forensics/engine.hpp"
#include "camsig/image/splice.hpp"
#include "camsig/metrics/metrics.hpp"

using namespace camsig;
using Clock = std::chrono::steady_clock;
static double secs(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

int main(int argc, char** argv) {
  int n_images = argc > 1 ? atoi(argv[1]) : 512;
  int img_size = argc > 2 ? atoi(argv[2]) : 160;
  int epochs   = argc > 3 ? atoi(argv[3]) : 6;
  int patch    = argc > 4 ? atoi(argv[4]) : 32;
  double lr    = argc > 5 ? atof(argv[5]) : 1e-3;

  auto t0 = Clock::now();
  auto corpus = synth::make_corpus(n_images, img_size, 2024);
  auto t1 = Clock::now();
  printf("corpus: %d images %dx%d in %.1fs\n", n_images, img_size, img_size, secs(t0, t1));

  train::TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.epochs = epochs;
  cfg.patch_side = patch;
  cfg.lr = lr;
  cfg.seed = 7;
  if (argc > 6) { cfg.patch_channels = {32, 64, 128}; }
  auto out = train::train_model(corpus, cfg);
  auto t2 = Clock::now();
  printf("train: %zu steps in %.1fs (%.2fs/step)\n", out.steps.size(), secs(t1, t2),
         secs(t1, t2) / out.steps.size());
  printf("loss: first=%.4f last=%.4f\n", out.steps.front().loss, out.steps.back().loss);
  for (auto& [e, r] : out.epoch_retrieval) printf("epoch %d retrieval %.3f\n", e, r);

  {  // factor-level diagnosis on the eval batch (center crops, fixed serialization)
    auto& model = out.model;
    std::vector<img::Image> crops;
    std::vector<nn::TokenSeq> seqs;
    const int B = 64;
    for (int i = 0; i < B; ++i) {
      auto& ex = corpus[i];
      const int cx = (ex.image.width - cfg.patch_side) / 2;
      const int cy = (ex.image.height - cfg.patch_side) / 2;
      crops.push_back(img::extract_patch(ex.image, {cx, cy, cfg.patch_side}));
      seqs.push_back(model.tokenizer.encode(exif::serialize(ex.record).text, 128));
    }
    nn::Tape tape;
    auto pe = model.patch.forward(tape, model.pixels_to_input(crops), B, cfg.patch_side, cfg.patch_side);
    int te = model.text.forward(tape, seqs);
    Eigen::MatrixXd sim = tape.val(pe.embedding).transpose() * tape.val(te);
    int cam_ok = 0, iso_ok = 0, exp_ok = 0, all_ok = 0;
    for (int i = 0; i < B; ++i) {
      Eigen::Index j;
      sim.row(i).maxCoeff(&j);
      auto g = [&](int k, const char* tag) { return *corpus[k].record.value_of(tag); };
      cam_ok += g(i, "Camera Make") == g(j, "Camera Make");
      iso_ok += g(i, "ISO Speed Ratings") == g(j, "ISO Speed Ratings");
      exp_ok += g(i, "Exposure Time") == g(j, "Exposure Time");
      all_ok += int(i) == int(j);
    }
    printf("factor diag: cam=%.3f iso=%.3f exp=%.3f exact=%.3f\n", cam_ok / 64.0,
           iso_ok / 64.0, exp_ok / 64.0, all_ok / 64.0);
  }

  // quick splice check on 6 composites
  auto& model = out.model;
  Rng rng(99);
  double ciou_sum = 0, pmap_sum = 0; int n_eval = 6;
  std::vector<double> phi_pristine, phi_comp;
  for (int i = 0; i < n_eval; ++i) {
    auto host = synth::make_example(1000 + i, img_size, 2024);
    auto donor = synth::make_example(2000 + i * 3 + 1, img_size, 2024); // different camera
    auto spl = img::synth_splice(host.image, donor.image,
                                 i % 2 ? img::MaskShape::Rectangle : img::MaskShape::Ellipse,
                                 rng, 0.12, 0.40);
    auto res = forensics::detect_and_localize(model, spl.composite);
    auto res_p = forensics::detect_and_localize(model, host.image);
    phi_comp.push_back(res.phi_bar);
    phi_pristine.push_back(res_p.phi_bar);
    metrics::ScoredMap sm;
    sm.scores = res.response;
    sm.mask.resize(spl.mask.height, spl.mask.width);
    for (int y = 0; y < spl.mask.height; ++y)
      for (int x = 0; x < spl.mask.width; ++x) sm.mask(y, x) = spl.mask.at(x, y, 0) ? 1 : 0;
    auto ci = metrics::c_iou(sm); auto pm = metrics::p_map(sm);
    printf("  composite %d: area=%.2f ciou=%.3f pmap=%.3f phib=%.4f (pristine %.4f) det=%d\n",
           i, spl.area_fraction, ci ? *ci : -1, pm ? *pm : -1, res.phi_bar, res_p.phi_bar,
           res.splice_detected);
    ciou_sum += ci ? *ci : 0; pmap_sum += pm ? *pm : 0;
  }
  auto t3 = Clock::now();
  printf("eval: %.1fs; mean ciou=%.3f mean pmap=%.3f\n", secs(t2, t3), ciou_sum / n_eval,
         pmap_sum / n_eval);
  return 0;
}
