#pragma once

// Condition-embedding -> DNA regressor: three affine layers with ReLU (and
// training-time inverted dropout) after the first two, trained with a cosine
// loss so that predictions keep the target's shape regardless of scale.

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dnaplan::predictor {

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;    // out

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim)
      : in(in_dim), out(out_dim), weight(in_dim * out_dim, 0.0), bias(out_dim, 0.0) {}

  [[nodiscard]] std::size_t param_count() const { return weight.size() + bias.size(); }
};

struct Widths {
  std::size_t d_in = 16;
  std::size_t h1 = 256;
  std::size_t h2 = 256;
  std::size_t d_out = 100;
};

/// Desk-scale widths used for training runs.
inline constexpr Widths kDeskWidths{16, 256, 256, 100};
/// Widths matching the reported predictor size (0.96M parameters, 1.93M FLOPs).
inline constexpr Widths kReferenceWidths{3584, 256, 128, 100};

struct RegressorParams {
  std::array<DenseLayer, 3> layers;
  double dropout = 0.1;

  RegressorParams() = default;
  explicit RegressorParams(Widths w, double dropout_rate = 0.1);

  [[nodiscard]] std::size_t d_in() const { return layers[0].in; }
  [[nodiscard]] std::size_t d_out() const { return layers[2].out; }
  [[nodiscard]] std::size_t param_count() const;
  /// Throws InvalidInput on inconsistent shapes or non-finite parameters.
  void check() const;
};

/// Same layout as the parameters.
using Gradient = RegressorParams;

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 40;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double holdout_fraction = 0.1;
  Widths widths = kDeskWidths;
};

struct Sample {
  std::vector<double> embedding;
  std::vector<double> dna;
};

struct TrainResult {
  RegressorParams params;
  std::vector<double> loss_history;  // mean training loss per epoch
  double holdout_mean_cosine = 0.0;
  double holdout_median_cosine = 0.0;
  std::size_t train_size = 0;
  std::size_t holdout_size = 0;
};

struct BenchmarkReport {
  std::size_t param_count = 0;
  std::size_t flops = 0;  // 2 * sum(in * out)
  double mean_latency_ms = 0.0;
  std::size_t trials = 0;
};

/// He-uniform weights, zero biases.
RegressorParams init_params(Widths w, double dropout, std::uint64_t seed);

/// Inference when training is false. Training mode draws dropout masks from rng.
std::vector<double> forward(const RegressorParams& params, std::span<const double> embedding, bool training = false,
                            std::mt19937_64* rng = nullptr);

/// 1 - cos(pred, target).
double cosine_loss(std::span<const double> pred, std::span<const double> target);
/// d(cosine_loss)/d(pred).
std::vector<double> cosine_loss_grad(std::span<const double> pred, std::span<const double> target);

/// Exact gradient of cosine_loss(forward(params, e), target) in inference mode.
Gradient backward(const RegressorParams& params, std::span<const double> embedding, std::span<const double> target);

TrainResult train(std::span<const Sample> dataset, const TrainConfig& cfg);

BenchmarkReport benchmark(const RegressorParams& params, std::size_t trials, std::uint64_t seed = 0);

/// Smooth random map from embeddings to decaying DNA curves on `grid`.
std::vector<Sample> synthetic_dataset(std::size_t pairs, std::size_t d_in, std::span<const double> grid,
                                      std::uint64_t seed);

/// Floors raw predictions so they form a valid DNA profile.
std::vector<double> clamp_prediction(std::span<const double> raw, double floor = 1e-12);

}  // namespace dnaplan::predictor
