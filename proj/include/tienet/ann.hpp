#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tienet/grid.hpp"

namespace tienet {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

/// Two-layer perceptron on row vectors:
///   y = tanh(x W1 + B1) W2 + B2
/// with W1 of shape M x H and W2 of shape H x M.
struct Network {
  Matrix w1;
  RowVector b1;
  Matrix w2;
  RowVector b2;

  std::size_t inputs() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t hidden() const { return static_cast<std::size_t>(w1.cols()); }
  bool all_finite() const;

  bool operator==(const Network& other) const;
};

/// Same layout as Network, holding dL/dtheta.
struct Gradients {
  Matrix w1;
  RowVector b1;
  Matrix w2;
  RowVector b2;
};

/// W1 is the rectangular identity (ones on the main diagonal), W2 = W1^T and
/// both biases are zero, so the untrained network computes tanh on the first
/// min(M, H) components.
Network init_network(std::size_t inputs, std::size_t hidden);

std::vector<double> forward(const Network& net, std::span<const double> x);

/// Rows of `x` are examples.
Matrix forward_batch(const Network& net, const Matrix& x);

/// sum_i (target_i - y_i)^2
double loss(std::span<const double> y, std::span<const double> target);

/// Exact gradient of loss(forward(net, x), target).
Gradients backward(const Network& net, std::span<const double> x,
                   std::span<const double> target);

struct BatchResult {
  Gradients grads;      // mean of the per-example gradients
  double mean_loss = 0; // mean of the per-example losses, before any update
};

/// Batched backpropagation. The mean over examples is folded into the GEMMs,
/// so the reduction order is fixed by Eigen's (single-threaded) blocking and
/// repeated calls are bit-identical.
BatchResult backward_batch(const Network& net, const Matrix& x, const Matrix& target);

/// theta <- theta - rate * grad for every parameter.
Network apply_update(const Network& net, const Gradients& grads, double rate);
void apply_update_in_place(Network& net, const Gradients& grads, double rate);

struct TrainingPair {
  std::vector<double> input;   // retrieved phase, flattened row-major
  std::vector<double> target;  // exact phase
};

/// How the per-example cost enters the gradient step.
enum class CostReduction {
  /// Sum of squared residuals, exactly as loss(). Only stable for small rates.
  Sum,
  /// Sum of squared residuals divided by M, so that the step size does not
  /// grow with the number of pixels.
  PixelMean,
};

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 50;
  std::size_t batch_size = 50;
  std::size_t batch_count = 100;
  std::uint64_t shuffle_seed = 0;
  CostReduction reduction = CostReduction::PixelMean;

  /// Factor applied to the loss() gradient before the update.
  double gradient_scale(std::size_t inputs) const;
  void validate() const;
};

struct TrainResult {
  Network net;
  std::vector<double> loss_history;  // mean per-example loss of each epoch
};

/// Every epoch reshuffles the pairs with a Fisher-Yates pass driven by
/// derive_seed(shuffle_seed, streams::shuffle, epoch), splits them into
/// batch_count batches of batch_size and applies one update per batch.
/// loss_history holds the mean loss() per example (sum form, whatever the
/// reduction). Throws Divergence as soon as the loss stops being finite.
TrainResult train(Network net, std::span<const TrainingPair> pairs, const TrainConfig& cfg);

ScalarField adjust(const Network& net, const ScalarField& retrieved);

// ANN1 checkpoint, little-endian:
//   "ANN1" | u32 M | u32 H | W1 (M*H f64) | B1 (H) | W2 (H*M) | B2 (M)
// Matrices are row-major.
std::vector<std::uint8_t> encode_ann1(const Network& net);
Network decode_ann1(const std::vector<std::uint8_t>& bytes);
void save_network(const std::filesystem::path& path, const Network& net);
Network load_network(const std::filesystem::path& path);

}  // namespace tienet
