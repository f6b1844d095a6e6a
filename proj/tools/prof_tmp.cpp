#include <chrono>
#include <cstdio>
#include "camsig/synth/camera_sim.hpp"
#include "camsig/train/trainer.hpp"
using namespace camsig;
using Clock = std::chrono::steady_clock;
static double ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}
int main() {
  Rng rng(1);
  // build a batch like the trainer does
  auto corpus = synth::make_corpus(64, 160, 2024);
  train::TrainConfig cfg;
  nn::PatchEncoderConfig pc; pc.channels = {24,48,96}; pc.embed_dim = 64;
  Rng irng(2);
  nn::PatchEncoder penc(pc, irng);
  nn::DualEncoderModel m;
  std::vector<std::string> texts;
  for (auto& ex : corpus) texts.push_back(exif::serialize(ex.record).text);
  m.tokenizer = nn::Tokenizer::fit(texts, {}, 512);
  nn::TextEncoderConfig tc; tc.vocab_size = m.tokenizer.vocab_size();
  tc.model_dim = 64; tc.heads = 4; tc.layers = 2; tc.mlp_dim = 128; tc.max_len = 256; tc.embed_dim = 64;
  nn::TextEncoder tenc(tc, irng);

  std::vector<img::Image> crops;
  std::vector<nn::TokenSeq> seqs;
  int total_tokens = 0;
  for (auto& ex : corpus) {
    crops.push_back(img::extract_patch(ex.image, img::random_crop(ex.image, 32, rng)));
    seqs.push_back(m.tokenizer.encode(exif::serialize(ex.record).text, 256));
    total_tokens += seqs.back().length();
  }
  printf("tokens total %d avg %.1f vocab %d\n", total_tokens, total_tokens / 64.0, tc.vocab_size);
  nn::Mat pixels = m.pixels_to_input(crops);

  for (int rep = 0; rep < 3; ++rep) {
    auto t0 = Clock::now();
    nn::Tape tape;
    auto pe = penc.forward(tape, pixels, 64, 32, 32);
    auto t1 = Clock::now();
    int te = tenc.forward(tape, seqs);
    auto t2 = Clock::now();
    int loss = tape.info_nce(pe.embedding, te, 0.07);
    for (auto* p : penc.params()) p->zero_grad();
    for (auto* p : tenc.params()) p->zero_grad();
    auto t3 = Clock::now();
    tape.backward(loss);
    auto t4 = Clock::now();
    printf("patch_fwd=%.0fms text_fwd=%.0fms backward=%.0fms total=%.0fms\n",
           ms(t0,t1), ms(t1,t2), ms(t3,t4), ms(t0,t4));
  }
  return 0;
}
