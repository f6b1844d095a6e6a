#pragma once

#include <cmath>
#include <vector>

#include "camsig/nn/graph.hpp"

namespace camsig::nn {

// Cosine annealing from the base rate to zero, no warmup.
inline double cosine_lr(double base_lr, int step, int total_steps) {
  if (total_steps <= 1) return base_lr;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps - 1);
  return base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * std::min(1.0, t)));
}

// Adam with decoupled weight decay. Decay only touches params flagged for it
// (weight matrices; biases and norm gains opt out).
class AdamW {
 public:
  struct Config {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
  };

  explicit AdamW(std::vector<Param*> params) : AdamW(std::move(params), Config{}) {}

  AdamW(std::vector<Param*> params, Config cfg)
      : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Param* p : params_) {
      m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void zero_grad() {
    for (Param* p : params_) p->zero_grad();
  }

  // One update with an explicit learning rate (callers drive the schedule).
  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (size_t i = 0; i < params_.size(); ++i) {
      Param& p = *params_[i];
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
      if (p.decay && cfg_.weight_decay > 0.0) p.value -= lr * cfg_.weight_decay * p.value;
      p.value.array() -=
          lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.eps);
    }
  }

  void step() { step(cfg_.lr); }

  int steps_taken() const { return t_; }
  const Config& config() const { return cfg_; }

 private:
  std::vector<Param*> params_;
  Config cfg_;
  std::vector<Mat> m_, v_;
  int t_ = 0;
};

}  // namespace camsig::nn
