#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "camsig/common.hpp"

// Reverse-mode autodiff over Eigen matrices. A Tape is rebuilt per step; ops
// append nodes eagerly and register backward closures that accumulate into
// parent gradients. Everything is double precision so finite-difference
// checks are meaningful.

namespace camsig::nn {

using Mat = Eigen::MatrixXd;

struct Param {
  std::string name;
  Mat value;
  Mat grad;
  bool decay = true;  // participates in decoupled weight decay

  Param() = default;
  Param(std::string n, Mat v, bool d = true)
      : name(std::move(n)), value(std::move(v)), grad(Mat::Zero(value.rows(), value.cols())),
        decay(d) {}

  void zero_grad() { grad.setZero(); }
};

struct ConvShape {
  int batch = 0;
  int in_channels = 0;
  int height = 0;
  int width = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 1;

  int out_height() const { return (height + 2 * pad - kernel) / stride + 1; }
  int out_width() const { return (width + 2 * pad - kernel) / stride + 1; }
};

class Tape {
 public:
  int input(Mat v) { return push(std::move(v), false, {}); }

  int param(Param& p) {
    const int id = push(p.value, true, {});
    Param* ptr = &p;
    nodes_[id].back = [id, ptr](Tape& t) { ptr->grad += t.grad(id); };
    return id;
  }

  const Mat& val(int id) const { return nodes_[id].val; }
  Mat& grad(int id) { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  // ---- arithmetic -----------------------------------------------------

  int add(int a, int b) {
    const int id = push(val(a) + val(b), needs_grad(a) || needs_grad(b), {});
    nodes_[id].back = [id, a, b](Tape& t) {
      if (t.needs_grad(a)) t.grad(a) += t.grad(id);
      if (t.needs_grad(b)) t.grad(b) += t.grad(id);
    };
    return id;
  }

  // bias is (R x 1), broadcast across columns
  int add_bias(int a, int bias) {
    const int id =
        push(val(a).colwise() + Eigen::VectorXd(val(bias).col(0)),
             needs_grad(a) || needs_grad(bias), {});
    nodes_[id].back = [id, a, bias](Tape& t) {
      if (t.needs_grad(a)) t.grad(a) += t.grad(id);
      if (t.needs_grad(bias)) t.grad(bias) += t.grad(id).rowwise().sum();
    };
    return id;
  }

  int scale(int a, double s) {
    const int id = push(val(a) * s, needs_grad(a), {});
    nodes_[id].back = [id, a, s](Tape& t) {
      if (t.needs_grad(a)) t.grad(a) += s * t.grad(id);
    };
    return id;
  }

  int matmul(int a, int b) {
    const int id = push(val(a) * val(b), needs_grad(a) || needs_grad(b), {});
    nodes_[id].back = [id, a, b](Tape& t) {
      if (t.needs_grad(a)) t.grad(a).noalias() += t.grad(id) * t.val(b).transpose();
      if (t.needs_grad(b)) t.grad(b).noalias() += t.val(a).transpose() * t.grad(id);
    };
    return id;
  }

  int linear(int weight, int x, int bias) { return add_bias(matmul(weight, x), bias); }

  // ---- nonlinearities -------------------------------------------------

  int gelu(int a) {
    const Mat& x = val(a);
    Mat y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) y(i) = x(i) * normal_cdf(x(i));
    const int id = push(std::move(y), needs_grad(a), {});
    nodes_[id].back = [id, a](Tape& t) {
      if (!t.needs_grad(a)) return;
      const Mat& x = t.val(a);
      const Mat& g = t.grad(id);
      Mat& ga = t.grad(a);
      for (Eigen::Index i = 0; i < x.size(); ++i)
        ga(i) += g(i) * (normal_cdf(x(i)) + x(i) * normal_pdf(x(i)));
    };
    return id;
  }

  // Per-column layer norm with learned gain/bias (both R x 1).
  int layernorm_cols(int x, int gain, int bias, double eps = 1e-5) {
    const Mat& X = val(x);
    const Eigen::Index R = X.rows(), C = X.cols();
    auto cache = std::make_shared<std::pair<Mat, Eigen::RowVectorXd>>();
    Mat& xhat = cache->first;
    Eigen::RowVectorXd& inv_sigma = cache->second;
    xhat.resize(R, C);
    inv_sigma.resize(C);
    for (Eigen::Index j = 0; j < C; ++j) {
      const double mu = X.col(j).mean();
      const double var = (X.col(j).array() - mu).square().mean();
      inv_sigma(j) = 1.0 / std::sqrt(var + eps);
      xhat.col(j) = (X.col(j).array() - mu) * inv_sigma(j);
    }
    Mat y = (xhat.array().colwise() * val(gain).col(0).array()).colwise() +
            val(bias).col(0).array();
    const int id = push(std::move(y), true, {});
    nodes_[id].back = [id, x, gain, bias, cache](Tape& t) {
      const Mat& g = t.grad(id);
      const Mat& xhat = cache->first;
      const Eigen::RowVectorXd& inv_sigma = cache->second;
      if (t.needs_grad(gain)) t.grad(gain) += (g.array() * xhat.array()).rowwise().sum().matrix();
      if (t.needs_grad(bias)) t.grad(bias) += g.rowwise().sum();
      if (t.needs_grad(x)) {
        const Eigen::Index R = xhat.rows(), C = xhat.cols();
        Mat gy = g.array().colwise() * t.val(gain).col(0).array();
        for (Eigen::Index j = 0; j < C; ++j) {
          const double mean_gy = gy.col(j).mean();
          const double mean_gy_xhat = (gy.col(j).array() * xhat.col(j).array()).mean();
          t.grad(x).col(j).array() +=
              inv_sigma(j) *
              (gy.col(j).array() - mean_gy - xhat.col(j).array() * mean_gy_xhat);
        }
        (void)R;
      }
    };
    return id;
  }

  // Per-column L2 normalization: y = x / sqrt(|x|^2 + eps).
  int l2_normalize_cols(int x, double eps = 1e-12) {
    const Mat& X = val(x);
    auto inv_norm = std::make_shared<Eigen::RowVectorXd>(
        (X.colwise().squaredNorm().array() + eps).rsqrt());
    Mat y = X.array().rowwise() * inv_norm->array();
    const int id = push(std::move(y), needs_grad(x), {});
    nodes_[id].back = [id, x, inv_norm](Tape& t) {
      if (!t.needs_grad(x)) return;
      const Mat& y = t.val(id);
      const Mat& g = t.grad(id);
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const double yg = y.col(j).dot(g.col(j));
        t.grad(x).col(j) += (*inv_norm)(j) * (g.col(j) - y.col(j) * yg);
      }
    };
    return id;
  }

  // ---- structural ops -------------------------------------------------

  int rows_block(int x, int r0, int nr) {
    const int id = push(val(x).middleRows(r0, nr), needs_grad(x), {});
    nodes_[id].back = [id, x, r0, nr](Tape& t) {
      if (t.needs_grad(x)) t.grad(x).middleRows(r0, nr) += t.grad(id);
    };
    return id;
  }

  int concat_cols(const std::vector<int>& parts) {
    Eigen::Index rows = val(parts.front()).rows(), cols = 0;
    bool ng = false;
    for (int p : parts) {
      cols += val(p).cols();
      ng = ng || needs_grad(p);
    }
    Mat y(rows, cols);
    Eigen::Index at = 0;
    for (int p : parts) {
      y.middleCols(at, val(p).cols()) = val(p);
      at += val(p).cols();
    }
    const int id = push(std::move(y), ng, {});
    auto parts_copy = std::make_shared<std::vector<int>>(parts);
    nodes_[id].back = [id, parts_copy](Tape& t) {
      Eigen::Index at = 0;
      for (int p : *parts_copy) {
        const Eigen::Index n = t.val(p).cols();
        if (t.needs_grad(p)) t.grad(p) += t.grad(id).middleCols(at, n);
        at += n;
      }
    };
    return id;
  }

  // Gather arbitrary columns (used for end-of-sequence positions).
  int select_cols(int x, std::vector<int> indices) {
    const Mat& X = val(x);
    Mat y(X.rows(), static_cast<Eigen::Index>(indices.size()));
    for (size_t k = 0; k < indices.size(); ++k) y.col(k) = X.col(indices[k]);
    const int id = push(std::move(y), needs_grad(x), {});
    auto idx = std::make_shared<std::vector<int>>(std::move(indices));
    nodes_[id].back = [id, x, idx](Tape& t) {
      if (!t.needs_grad(x)) return;
      for (size_t k = 0; k < idx->size(); ++k)
        t.grad(x).col((*idx)[k]) += t.grad(id).col(static_cast<Eigen::Index>(k));
    };
    return id;
  }

  // Token embedding lookup straight from a parameter table (E x V).
  int embedding(Param& table, std::vector<int> ids) {
    Mat y(table.value.rows(), static_cast<Eigen::Index>(ids.size()));
    for (size_t t = 0; t < ids.size(); ++t) {
      if (ids[t] < 0 || ids[t] >= table.value.cols())
        throw DataError("embedding: token id out of range");
      y.col(t) = table.value.col(ids[t]);
    }
    const int id = push(std::move(y), true, {});
    auto idx = std::make_shared<std::vector<int>>(std::move(ids));
    Param* ptr = &table;
    nodes_[id].back = [id, idx, ptr](Tape& t) {
      for (size_t k = 0; k < idx->size(); ++k)
        ptr->grad.col((*idx)[k]) += t.grad(id).col(static_cast<Eigen::Index>(k));
    };
    return id;
  }

  // Adds learned positional encodings (E x Lmax) to a packed batch of
  // sequences; offsets[s] is the first column of sample s, size S+1.
  int add_positional(int x, Param& pos, std::vector<int> offsets) {
    Mat y = val(x);
    for (size_t s = 0; s + 1 < offsets.size(); ++s) {
      const int len = offsets[s + 1] - offsets[s];
      if (len > pos.value.cols()) throw DataError("add_positional: sequence exceeds max length");
      y.middleCols(offsets[s], len) += pos.value.leftCols(len);
    }
    const int id = push(std::move(y), true, {});
    auto offs = std::make_shared<std::vector<int>>(std::move(offsets));
    Param* ptr = &pos;
    nodes_[id].back = [id, x, offs, ptr](Tape& t) {
      if (t.needs_grad(x)) t.grad(x) += t.grad(id);
      for (size_t s = 0; s + 1 < offs->size(); ++s) {
        const int len = (*offs)[s + 1] - (*offs)[s];
        ptr->grad.leftCols(len) += t.grad(id).middleCols((*offs)[s], len);
      }
    };
    return id;
  }

  // ---- composite ops --------------------------------------------------

  // Batched 2D convolution. Input layout (Cin, N*H*W), column index
  // n*H*W + y*W + x; output (Cout, N*Ho*Wo) in the same layout. The whole
  // batch is lowered into one im2col matrix so each pass is a single GEMM.
  int conv2d(int x, Param& weight, Param& bias, const ConvShape& s) {
    if (val(x).rows() != s.in_channels ||
        val(x).cols() != static_cast<Eigen::Index>(s.batch) * s.height * s.width)
      throw DataError("conv2d: input layout does not match shape");
    const int ho = s.out_height(), wo = s.out_width();
    const Eigen::Index spatial = static_cast<Eigen::Index>(ho) * wo;
    const int K = s.in_channels * s.kernel * s.kernel;
    auto cols = std::make_shared<Mat>(Mat::Zero(K, s.batch * spatial));
    const Mat& X = val(x);
    parallel_for(s.batch, [&](int n) { im2col(X, n, s, *cols, n * spatial); });
    Mat out = weight.value * (*cols);
    out.colwise() += Eigen::VectorXd(bias.value.col(0));
    const int id = push(std::move(out), true, {});
    Param* wp = &weight;
    Param* bp = &bias;
    ConvShape shape = s;
    nodes_[id].back = [id, x, wp, bp, shape, cols, spatial](Tape& t) {
      const Mat& g = t.grad(id);
      bp->grad += g.rowwise().sum();
      wp->grad.noalias() += g * cols->transpose();
      if (t.needs_grad(x)) {
        const Mat gm = wp->value.transpose() * g;
        Mat& gx = t.grad(x);
        parallel_for(shape.batch, [&](int n) { col2im(gm, n, shape, gx, n * spatial); });
      }
    };
    return id;
  }

  // Global average pooling over each sample's spatial block:
  // (C, N*HW) -> (C, N).
  int gap(int x, int batch, int spatial) {
    const Mat& X = val(x);
    if (X.cols() != static_cast<Eigen::Index>(batch) * spatial)
      throw DataError("gap: input layout does not match shape");
    Mat y(X.rows(), batch);
    for (int n = 0; n < batch; ++n)
      y.col(n) = X.middleCols(static_cast<Eigen::Index>(n) * spatial, spatial).rowwise().mean();
    const int id = push(std::move(y), needs_grad(x), {});
    nodes_[id].back = [id, x, batch, spatial](Tape& t) {
      if (!t.needs_grad(x)) return;
      const double inv = 1.0 / spatial;
      for (int n = 0; n < batch; ++n)
        t.grad(x)
            .middleCols(static_cast<Eigen::Index>(n) * spatial, spatial)
            .colwise() += Eigen::VectorXd(t.grad(id).col(n) * inv);
    };
    return id;
  }

  // Multi-head self-attention over a packed batch. qkv holds rows
  // [Q; K; V] (3E x total_tokens); offsets delimit samples. Samples touch
  // disjoint column ranges, so they run in parallel.
  int attention(int qkv, std::vector<int> offsets, int heads) {
    const Mat& QKV = val(qkv);
    const int E = static_cast<int>(QKV.rows()) / 3;
    if (E % heads != 0) throw DataError("attention: heads must divide model width");
    const int dh = E / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const int n_samples = static_cast<int>(offsets.size()) - 1;
    auto probs = std::make_shared<std::vector<Mat>>(n_samples * heads);
    Mat out = Mat::Zero(E, QKV.cols());
    parallel_for(n_samples, [&](int s) {
      const int o = offsets[s], T = offsets[s + 1] - offsets[s];
      for (int h = 0; h < heads; ++h) {
        const auto Q = QKV.block(h * dh, o, dh, T);
        const auto Kb = QKV.block(E + h * dh, o, dh, T);
        const auto V = QKV.block(2 * E + h * dh, o, dh, T);
        Mat S = (Q.transpose() * Kb) * scale;  // T x T, rows are queries
        for (Eigen::Index r = 0; r < S.rows(); ++r) {
          const double mx = S.row(r).maxCoeff();
          S.row(r) = (S.row(r).array() - mx).exp();
          S.row(r) /= S.row(r).sum();
        }
        out.block(h * dh, o, dh, T).noalias() = V * S.transpose();
        (*probs)[s * heads + h] = std::move(S);
      }
    });
    const int id = push(std::move(out), needs_grad(qkv), {});
    auto offs = std::make_shared<std::vector<int>>(std::move(offsets));
    nodes_[id].back = [id, qkv, offs, heads, probs](Tape& t) {
      if (!t.needs_grad(qkv)) return;
      const Mat& QKV = t.val(qkv);
      const int E = static_cast<int>(QKV.rows()) / 3;
      const int dh = E / heads;
      const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
      const int n_samples = static_cast<int>(offs->size()) - 1;
      parallel_for(n_samples, [&](int s) {
        const int o = (*offs)[s], T = (*offs)[s + 1] - (*offs)[s];
        for (int h = 0; h < heads; ++h) {
          const Mat& P = (*probs)[s * heads + h];
          const auto Q = QKV.block(h * dh, o, dh, T);
          const auto Kb = QKV.block(E + h * dh, o, dh, T);
          const auto V = QKV.block(2 * E + h * dh, o, dh, T);
          const auto gO = t.grad(id).block(h * dh, o, dh, T);
          Mat gV = gO * P;                    // dh x T
          Mat gP = gO.transpose() * V;        // T x T
          Mat gS(T, T);
          for (int r = 0; r < T; ++r) {
            const double dot = gP.row(r).dot(P.row(r));
            gS.row(r) = P.row(r).array() * (gP.row(r).array() - dot);
          }
          t.grad(qkv).block(h * dh, o, dh, T).noalias() += Kb * gS.transpose() * scale;
          t.grad(qkv).block(E + h * dh, o, dh, T).noalias() += Q * gS * scale;
          t.grad(qkv).block(2 * E + h * dh, o, dh, T) += gV;
        }
      });
    };
    return id;
  }

  // Symmetric InfoNCE between unit embeddings (D x N each): mean row-wise
  // cross entropy of sim/tau plus mean column-wise, diagonal as targets.
  int info_nce(int v_emb, int m_emb, double tau) {
    if (tau <= 0.0) throw DataError("info_nce: tau must be positive");
    const Mat sim = val(v_emb).transpose() * val(m_emb);
    if (!sim.allFinite()) throw DataError("info_nce: non-finite similarities");
    const Eigen::Index N = sim.rows();
    if (N < 2) throw DataError("info_nce: batch size must be at least 2");
    auto cache = std::make_shared<std::pair<Mat, Mat>>(softmax_rows(sim / tau),
                                                       softmax_rows(sim.transpose() / tau));
    double loss = 0.0;
    for (Eigen::Index i = 0; i < N; ++i)
      loss += -std::log(std::max(cache->first(i, i), 1e-300)) -
              std::log(std::max(cache->second(i, i), 1e-300));
    Mat y(1, 1);
    y(0, 0) = loss / static_cast<double>(N);
    const int id = push(std::move(y), needs_grad(v_emb) || needs_grad(m_emb), {});
    nodes_[id].back = [id, v_emb, m_emb, tau, cache](Tape& t) {
      const double g = t.grad(id)(0, 0);
      const Mat& Pr = cache->first;
      const Mat& Pc = cache->second;
      const Eigen::Index N = Pr.rows();
      Mat dsim = Pr + Pc.transpose();
      dsim.diagonal().array() -= 2.0;
      dsim *= g / (tau * static_cast<double>(N));
      if (t.needs_grad(v_emb)) t.grad(v_emb).noalias() += t.val(m_emb) * dsim.transpose();
      if (t.needs_grad(m_emb)) t.grad(m_emb).noalias() += t.val(v_emb) * dsim;
    };
    return id;
  }

  // Scalar probe: sum(x .* w) for a fixed weight matrix (testing helper).
  int weighted_sum(int x, Mat w) {
    Mat y(1, 1);
    y(0, 0) = (val(x).array() * w.array()).sum();
    const int id = push(std::move(y), needs_grad(x), {});
    auto wp = std::make_shared<Mat>(std::move(w));
    nodes_[id].back = [id, x, wp](Tape& t) {
      if (t.needs_grad(x)) t.grad(x) += t.grad(id)(0, 0) * (*wp);
    };
    return id;
  }

  // ---- engine ----------------------------------------------------------

  void backward(int root) {
    for (int i = 0; i <= root; ++i)
      if (nodes_[i].needs_grad)
        nodes_[i].grad = Mat::Zero(nodes_[i].val.rows(), nodes_[i].val.cols());
    nodes_[root].grad = Mat::Ones(nodes_[root].val.rows(), nodes_[root].val.cols());
    for (int i = root; i >= 0; --i)
      if (nodes_[i].back && nodes_[i].needs_grad) nodes_[i].back(*this);
  }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat val;
    Mat grad;
    bool needs_grad = false;
    std::function<void(Tape&)> back;
  };

  int push(Mat v, bool needs, std::function<void(Tape&)> back) {
    nodes_.push_back(Node{std::move(v), Mat(), needs, std::move(back)});
    return static_cast<int>(nodes_.size()) - 1;
  }

  static double normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)); }
  static double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) * 0.3989422804014326779399460599344;
  }

  static Mat softmax_rows(const Mat& z) {
    Mat p(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const double mx = z.row(r).maxCoeff();
      p.row(r) = (z.row(r).array() - mx).exp();
      p.row(r) /= p.row(r).sum();
    }
    return p;
  }

  static void im2col(const Mat& X, int n, const ConvShape& s, Mat& M, Eigen::Index col0) {
    const int ho = s.out_height(), wo = s.out_width();
    const Eigen::Index base = static_cast<Eigen::Index>(n) * s.height * s.width;
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        const Eigen::Index col = col0 + static_cast<Eigen::Index>(oy) * wo + ox;
        for (int ky = 0; ky < s.kernel; ++ky) {
          const int sy = oy * s.stride + ky - s.pad;
          if (sy < 0 || sy >= s.height) continue;
          for (int kx = 0; kx < s.kernel; ++kx) {
            const int sx = ox * s.stride + kx - s.pad;
            if (sx < 0 || sx >= s.width) continue;
            const Eigen::Index src = base + static_cast<Eigen::Index>(sy) * s.width + sx;
            // channel-contiguous copy: input columns hold all channels
            M.block((static_cast<Eigen::Index>(ky) * s.kernel + kx) * s.in_channels, col,
                    s.in_channels, 1) = X.col(src);
          }
        }
      }
  }

  static void col2im(const Mat& gm, int n, const ConvShape& s, Mat& gx, Eigen::Index col0) {
    const int ho = s.out_height(), wo = s.out_width();
    const Eigen::Index base = static_cast<Eigen::Index>(n) * s.height * s.width;
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        const Eigen::Index col = col0 + static_cast<Eigen::Index>(oy) * wo + ox;
        for (int ky = 0; ky < s.kernel; ++ky) {
          const int sy = oy * s.stride + ky - s.pad;
          if (sy < 0 || sy >= s.height) continue;
          for (int kx = 0; kx < s.kernel; ++kx) {
            const int sx = ox * s.stride + kx - s.pad;
            if (sx < 0 || sx >= s.width) continue;
            const Eigen::Index dst = base + static_cast<Eigen::Index>(sy) * s.width + sx;
            gx.col(dst) += gm.block(
                (static_cast<Eigen::Index>(ky) * s.kernel + kx) * s.in_channels, col,
                s.in_channels, 1);
          }
        }
      }
  }

  std::vector<Node> nodes_;
};

}  // namespace camsig::nn
