#pragma once

#include <span>
#include <vector>

#include "kffnn/activation.hpp"
#include "kffnn/ffnn.hpp"
#include "kffnn/linalg.hpp"
#include "kffnn/rng.hpp"
#include "kffnn/train_config.hpp"

namespace kffnn {

/// Elman network with sigmoid hidden units and a single output read from the
/// last hidden state. w_ih is d_in x H, w_hh is H x H (row = source unit),
/// w_ho is H x 1.
struct RnnModel {
  Matrix w_ih;
  Matrix w_hh;
  Matrix w_ho;
  double lambda = 1.0;
  OutputActivation output = OutputActivation::Linear;

  std::size_t input_dim() const noexcept { return w_ih.rows(); }
  std::size_t hidden_dim() const noexcept { return w_ih.cols(); }

  void validate() const;

  static RnnModel zeros(std::size_t input_dim, std::size_t hidden, double lambda = 1.0,
                        OutputActivation output = OutputActivation::Linear);

  /// Draws w_ih, w_ho, then w_hh. The first two draws match FfnnModel::random
  /// for the same rng state, so shared layers start from identical weights.
  static RnnModel random(std::size_t input_dim, const TrainConfig& cfg, Rng& rng);

  /// The feed-forward network sharing w_ih and w_ho.
  FfnnModel feedforward_part() const;

  friend bool operator==(const RnnModel&, const RnnModel&) = default;
};

/// Hidden states h^1..h^T (h^0 = 0 is implicit) and the final output.
struct RnnTrace {
  std::vector<Vector> hidden_states;
  std::vector<Vector> inputs;
  double output = 0.0;
};

struct RnnGradients {
  Matrix w_ih;
  Matrix w_hh;
  Matrix w_ho;
};

/// A whole clip: one feature vector per time step and one target.
struct SequenceSample {
  std::vector<Vector> steps;
  double target = 0.0;
};

RnnTrace rnn_forward(const RnnModel& model, std::span<const Vector> sequence);

/// Backpropagation through time with the error injected only at t = T.
RnnGradients rnn_bptt(const RnnModel& model, std::span<const Vector> sequence, double target);

double rnn_mean_loss(const RnnModel& model, std::span<const SequenceSample> samples);

/// Per-clip descent on all three weight sets. Sequences may differ in length.
RnnModel rnn_train(std::span<const SequenceSample> samples, const TrainConfig& cfg,
                   std::vector<double>* epoch_loss = nullptr);
RnnModel rnn_train(RnnModel initial, std::span<const SequenceSample> samples,
                   const TrainConfig& cfg, std::vector<double>* epoch_loss = nullptr);

}  // namespace kffnn
