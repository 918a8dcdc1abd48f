#include "dnaplan/predictor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dnaplan/error.hpp"
#include "dnaplan/kernels.hpp"

namespace dnaplan::predictor {

namespace {

using kernels::MatrixView;
using kernels::MutableMatrixView;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dims(const RegressorParams& p, std::size_t d_in) {
  if (d_in != p.d_in()) {
    throw InvalidInput("embedding has dimension " + std::to_string(d_in) + ", model expects " +
                       std::to_string(p.d_in()));
  }
}

MatrixView view(const DenseLayer& l) { return {l.weight.data(), l.out, l.in}; }
MutableMatrixView mview(DenseLayer& l) { return {l.weight.data(), l.out, l.in}; }

// Activations of one batch, kept for the backward pass.
struct BatchState {
  std::size_t rows = 0;
  std::vector<double> z1, a1, z2, a2, y;
  std::vector<double> keep1, keep2;  // dropout scale per unit: 0 or 1/(1-p)
};

void forward_batch(const RegressorParams& p, std::span<const double> x, std::size_t rows, bool training,
                   std::mt19937_64* rng, BatchState& st) {
  const auto& [l1, l2, l3] = p.layers;
  st.rows = rows;
  st.z1.assign(rows * l1.out, 0.0);
  st.z2.assign(rows * l2.out, 0.0);
  st.y.assign(rows * l3.out, 0.0);
  const bool drop = training && p.dropout > 0.0;
  const double scale = drop ? 1.0 / (1.0 - p.dropout) : 1.0;

  auto activate = [&](const std::vector<double>& z, std::vector<double>& a, std::vector<double>& keep) {
    a.resize(z.size());
    keep.assign(z.size(), 1.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (drop) keep[i] = uniform01(*rng) >= p.dropout ? scale : 0.0;
      a[i] = (z[i] > 0.0 ? z[i] : 0.0) * keep[i];
    }
  };

  kernels::affine_forward(view(l1), l1.bias, {x.data(), rows, l1.in}, {st.z1.data(), rows, l1.out});
  activate(st.z1, st.a1, st.keep1);
  kernels::affine_forward(view(l2), l2.bias, {st.a1.data(), rows, l2.in}, {st.z2.data(), rows, l2.out});
  activate(st.z2, st.a2, st.keep2);
  kernels::affine_forward(view(l3), l3.bias, {st.a2.data(), rows, l3.in}, {st.y.data(), rows, l3.out});
}

// Accumulates parameter gradients given dL/dY for every row.
void backward_batch(const RegressorParams& p, std::span<const double> x, const BatchState& st,
                    std::vector<double>& dy, Gradient& g) {
  const auto& [l1, l2, l3] = p.layers;
  const std::size_t rows = st.rows;
  std::vector<double> d2(rows * l2.out), d1(rows * l1.out);

  kernels::affine_backward_params({dy.data(), rows, l3.out}, {st.a2.data(), rows, l3.in}, mview(g.layers[2]),
                                  g.layers[2].bias);
  kernels::affine_backward_input(view(l3), {dy.data(), rows, l3.out}, {d2.data(), rows, l3.in});
  for (std::size_t i = 0; i < d2.size(); ++i) d2[i] *= st.z2[i] > 0.0 ? st.keep2[i] : 0.0;

  kernels::affine_backward_params({d2.data(), rows, l2.out}, {st.a1.data(), rows, l2.in}, mview(g.layers[1]),
                                  g.layers[1].bias);
  kernels::affine_backward_input(view(l2), {d2.data(), rows, l2.out}, {d1.data(), rows, l2.in});
  for (std::size_t i = 0; i < d1.size(); ++i) d1[i] *= st.z1[i] > 0.0 ? st.keep1[i] : 0.0;

  kernels::affine_backward_params({d1.data(), rows, l1.out}, {x.data(), rows, l1.in}, mview(g.layers[0]),
                                  g.layers[0].bias);
}

Gradient zero_like(const RegressorParams& p) {
  Gradient g = p;
  for (auto& l : g.layers) {
    std::fill(l.weight.begin(), l.weight.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  return g;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

RegressorParams::RegressorParams(Widths w, double dropout_rate)
    : layers{DenseLayer(w.d_in, w.h1), DenseLayer(w.h1, w.h2), DenseLayer(w.h2, w.d_out)}, dropout(dropout_rate) {}

std::size_t RegressorParams::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.param_count();
  return n;
}

void RegressorParams::check() const {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.in == 0 || l.out == 0 || l.weight.size() != l.in * l.out || l.bias.size() != l.out) {
      throw InvalidInput("layer " + std::to_string(k) + " has inconsistent shape");
    }
    if (k > 0 && layers[k - 1].out != l.in) {
      throw InvalidInput("layer " + std::to_string(k) + " input width does not match previous output");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(l.weight.begin(), l.weight.end(), finite) || !std::all_of(l.bias.begin(), l.bias.end(), finite)) {
      throw InvalidInput("layer " + std::to_string(k) + " has non-finite parameters");
    }
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw InvalidInput("dropout must lie in [0, 1)");
  }
}

RegressorParams init_params(Widths w, double dropout, std::uint64_t seed) {
  RegressorParams p(w, dropout);
  std::mt19937_64 rng(seed);
  for (auto& l : p.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in));
    for (double& v : l.weight) v = (2.0 * uniform01(rng) - 1.0) * limit;
  }
  return p;
}

std::vector<double> forward(const RegressorParams& params, std::span<const double> embedding, bool training,
                            std::mt19937_64* rng) {
  check_dims(params, embedding.size());
  if (training && params.dropout > 0.0 && rng == nullptr) {
    throw DomainError("training-mode forward needs a random engine for dropout");
  }
  BatchState st;
  forward_batch(params, embedding, 1, training, rng, st);
  return st.y;
}

double cosine_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw InvalidInput("cosine_loss: length mismatch");
  }
  const double np = std::sqrt(dot(pred, pred));
  const double nt = std::sqrt(dot(target, target));
  if (np == 0.0 || nt == 0.0) {
    throw DomainError("cosine_loss: zero-norm vector");
  }
  return 1.0 - dot(pred, target) / (np * nt);
}

std::vector<double> cosine_loss_grad(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw InvalidInput("cosine_loss_grad: length mismatch");
  }
  const double pp = dot(pred, pred);
  const double np = std::sqrt(pp);
  const double nt = std::sqrt(dot(target, target));
  if (np == 0.0 || nt == 0.0) {
    throw DomainError("cosine_loss_grad: zero-norm vector");
  }
  const double pt = dot(pred, target);
  std::vector<double> g(pred.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = -(target[i] / (np * nt) - pt * pred[i] / (pp * np * nt));
  }
  return g;
}

Gradient backward(const RegressorParams& params, std::span<const double> embedding, std::span<const double> target) {
  check_dims(params, embedding.size());
  if (target.size() != params.d_out()) {
    throw InvalidInput("target length does not match model output");
  }
  BatchState st;
  forward_batch(params, embedding, 1, false, nullptr, st);
  auto dy = cosine_loss_grad(st.y, target);
  Gradient g = zero_like(params);
  backward_batch(params, embedding, st, dy, g);
  return g;
}

TrainResult train(std::span<const Sample> dataset, const TrainConfig& cfg) {
  if (dataset.empty()) {
    throw InvalidInput("train: empty dataset");
  }
  if (!(cfg.learning_rate > 0.0) || !(cfg.dropout >= 0.0 && cfg.dropout < 1.0) || cfg.batch_size == 0 ||
      !(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0)) {
    throw InvalidInput("train: invalid configuration");
  }
  Widths w = cfg.widths;
  w.d_in = dataset.front().embedding.size();
  w.d_out = dataset.front().dna.size();
  for (const auto& s : dataset) {
    if (s.embedding.size() != w.d_in || s.dna.size() != w.d_out) {
      throw InvalidInput("train: inconsistent sample dimensions");
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_hold = static_cast<std::size_t>(std::floor(cfg.holdout_fraction * static_cast<double>(dataset.size())));
  if (n_hold >= dataset.size()) n_hold = dataset.size() - 1;
  std::vector<std::size_t> holdout(order.begin(), order.begin() + static_cast<long>(n_hold));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(n_hold), order.end());

  TrainResult result;
  result.params = init_params(w, cfg.dropout, rng());
  result.train_size = train_idx.size();
  result.holdout_size = holdout.size();
  auto& p = result.params;

  Gradient m = zero_like(p), v = zero_like(p);
  std::uint64_t step = 0;
  BatchState st;
  std::vector<double> xb, dy;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, train_idx.size() - start);
      xb.resize(rows * w.d_in);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto& e = dataset[train_idx[start + r]].embedding;
        std::copy(e.begin(), e.end(), xb.begin() + static_cast<long>(r * w.d_in));
      }
      forward_batch(p, xb, rows, true, &rng, st);

      dy.assign(rows * w.d_out, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        std::span<const double> pred(st.y.data() + r * w.d_out, w.d_out);
        const auto& target = dataset[train_idx[start + r]].dna;
        if (dot(pred, pred) == 0.0) {
          epoch_loss += 1.0;
          continue;
        }
        epoch_loss += cosine_loss(pred, target);
        const auto g = cosine_loss_grad(pred, target);
        for (std::size_t i = 0; i < w.d_out; ++i) dy[r * w.d_out + i] = g[i] / static_cast<double>(rows);
      }

      Gradient grad = zero_like(p);
      backward_batch(p, xb, st, dy, grad);

      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      auto update = [&](std::vector<double>& theta, const std::vector<double>& gr, std::vector<double>& m1,
                        std::vector<double>& m2) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
          m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * gr[i];
          m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * gr[i] * gr[i];
          theta[i] -= cfg.learning_rate * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + cfg.adam_eps);
        }
      };
      for (std::size_t k = 0; k < 3; ++k) {
        update(p.layers[k].weight, grad.layers[k].weight, m.layers[k].weight, v.layers[k].weight);
        update(p.layers[k].bias, grad.layers[k].bias, m.layers[k].bias, v.layers[k].bias);
      }
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(train_idx.size()));
  }

  std::vector<double> cos;
  cos.reserve(holdout.size());
  for (std::size_t i : holdout) {
    cos.push_back(cosine(forward(p, dataset[i].embedding), dataset[i].dna));
  }
  if (!cos.empty()) {
    result.holdout_mean_cosine = std::accumulate(cos.begin(), cos.end(), 0.0) / static_cast<double>(cos.size());
    std::sort(cos.begin(), cos.end());
    const std::size_t h = cos.size() / 2;
    result.holdout_median_cosine = cos.size() % 2 == 1 ? cos[h] : 0.5 * (cos[h - 1] + cos[h]);
  }
  return result;
}

BenchmarkReport benchmark(const RegressorParams& params, std::size_t trials, std::uint64_t seed) {
  params.check();
  BenchmarkReport r;
  r.param_count = params.param_count();
  for (const auto& l : params.layers) r.flops += 2 * l.in * l.out;
  r.trials = trials;
  if (trials == 0) return r;

  std::mt19937_64 rng(seed);
  std::vector<double> e(params.d_in());
  for (double& x : e) x = 2.0 * uniform01(rng) - 1.0;
  double sink = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < trials; ++i) {
    sink += forward(params, e)[0];
  }
  const auto t1 = std::chrono::steady_clock::now();
  r.mean_latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(trials);
  if (std::isnan(sink)) r.mean_latency_ms = std::nan("");
  return r;
}

std::vector<Sample> synthetic_dataset(std::size_t pairs, std::size_t d_in, std::span<const double> grid,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Hidden projections defining the embedding -> shape map.
  std::array<std::vector<double>, 4> proj;
  for (auto& row : proj) {
    row.resize(d_in);
    for (double& v : row) v = (2.0 * uniform01(rng) - 1.0) * std::sqrt(3.0 / static_cast<double>(d_in));
  }
  std::vector<Sample> out(pairs);
  for (auto& s : out) {
    s.embedding.resize(d_in);
    for (double& v : s.embedding) v = 2.0 * uniform01(rng) - 1.0;
    const double amp = std::exp(0.5 * std::tanh(dot(proj[0], s.embedding)));
    const double rate = 1.0 + 5.0 * sigmoid(2.0 * dot(proj[1], s.embedding));
    const double mix = sigmoid(2.0 * dot(proj[2], s.embedding));
    const double power = 1.0 + 3.0 * sigmoid(2.0 * dot(proj[3], s.embedding));
    s.dna.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid[i];
      s.dna[i] = amp * (mix * std::expm1(rate * t) / std::expm1(rate) + (1.0 - mix) * std::pow(t, power));
    }
  }
  return out;
}

std::vector<double> clamp_prediction(std::span<const double> raw, double floor) {
  std::vector<double> out(raw.begin(), raw.end());
  for (double& v : out) {
    if (!(v >= floor)) v = floor;
  }
  return out;
}

}  // namespace dnaplan::predictor
