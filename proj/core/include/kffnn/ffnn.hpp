#pragma once

#include <span>
#include <vector>

#include "kffnn/activation.hpp"
#include "kffnn/linalg.hpp"
#include "kffnn/rng.hpp"
#include "kffnn/train_config.hpp"

namespace kffnn {

/// One-hidden-layer network without biases. w_ih is d_in x H, w_ho is H x 1.
struct FfnnModel {
  Matrix w_ih;
  Matrix w_ho;
  double lambda = 1.0;
  OutputActivation output = OutputActivation::Linear;

  std::size_t input_dim() const noexcept { return w_ih.rows(); }
  std::size_t hidden_dim() const noexcept { return w_ih.cols(); }

  /// Checks shapes, finiteness and lambda > 0.
  void validate() const;

  static FfnnModel zeros(std::size_t input_dim, std::size_t hidden, double lambda = 1.0,
                         OutputActivation output = OutputActivation::Linear);

  /// Draws w_ih then w_ho, row-major, from rng.
  static FfnnModel random(std::size_t input_dim, const TrainConfig& cfg, Rng& rng);

  friend bool operator==(const FfnnModel&, const FfnnModel&) = default;
};

struct FfnnForward {
  Vector hidden;
  double output = 0.0;
};

struct FfnnGradients {
  Matrix w_ih;
  Matrix w_ho;
};

/// A single (features, target) training pair.
struct Sample {
  Vector features;
  double target = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

FfnnForward ffnn_forward(const FfnnModel& model, std::span<const double> features);

/// Squared error (output - target)^2.
double ffnn_loss(double output, double target) noexcept;

/// Exact gradient of ffnn_loss with respect to every weight.
FfnnGradients ffnn_backward(const FfnnModel& model, std::span<const double> features,
                            double target);

double ffnn_mean_loss(const FfnnModel& model, std::span<const Sample> samples);

/// Per-sample descent w <- w - eta * grad over every sample, for cfg.epochs
/// epochs. When epoch_loss is given it receives the mean loss over the whole
/// dataset after each epoch. Throws DivergenceError on non-finite weights.
FfnnModel ffnn_train(std::span<const Sample> samples, const TrainConfig& cfg,
                     std::vector<double>* epoch_loss = nullptr);

/// Same, starting from the given weights instead of a seeded initialisation.
/// The seed still drives shuffling.
FfnnModel ffnn_train(FfnnModel initial, std::span<const Sample> samples,
                     const TrainConfig& cfg, std::vector<double>* epoch_loss = nullptr);

}  // namespace kffnn
