#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "kffnn/activation.hpp"
#include "kffnn/linalg.hpp"
#include "kffnn/rnn.hpp"
#include "kffnn/rng.hpp"
#include "kffnn/train_config.hpp"

namespace kffnn {

enum class Gate : std::size_t { Input = 0, Forget = 1, Output = 2, Candidate = 3 };
inline constexpr std::size_t kGateCount = 4;
const char* to_string(Gate g) noexcept;

enum class Direction { Forward, Bidirectional };

/// Single-layer LSTM cell in the usual formulation:
///   i = sig(x Wx_i + h Wh_i + b_i)     f = sig(x Wx_f + h Wh_f + b_f)
///   o = sig(x Wx_o + h Wh_o + b_o)     g = tanh(x Wx_g + h Wh_g + b_g)
///   c' = f * c + i * g                 h' = o * tanh(c')
/// Gates use the plain logistic function; no peepholes.
struct LstmCell {
  std::array<Matrix, kGateCount> wx;    // d_in x H
  std::array<Matrix, kGateCount> wh;    // H x H
  std::array<Matrix, kGateCount> bias;  // 1 x H

  std::size_t input_dim() const noexcept { return wx[0].rows(); }
  std::size_t hidden_dim() const noexcept { return wx[0].cols(); }

  static LstmCell zeros(std::size_t input_dim, std::size_t hidden);

  friend bool operator==(const LstmCell&, const LstmCell&) = default;
};

/// LSTM regressor. Forward models read h^T; bidirectional models concatenate
/// the forward cell's h^T with the backward cell's state after it has consumed
/// the sequence in reverse (its summary of t = 1), and project 2H -> 1.
struct LstmModel {
  LstmCell forward;
  std::optional<LstmCell> backward;
  Matrix w_ho;  // H x 1, or 2H x 1 when bidirectional
  double lambda = 1.0;
  OutputActivation output = OutputActivation::Linear;

  Direction direction() const noexcept {
    return backward ? Direction::Bidirectional : Direction::Forward;
  }
  std::size_t input_dim() const noexcept { return forward.input_dim(); }
  std::size_t hidden_dim() const noexcept { return forward.hidden_dim(); }

  void validate() const;

  static LstmModel zeros(std::size_t input_dim, std::size_t hidden, Direction direction,
                         double lambda = 1.0,
                         OutputActivation output = OutputActivation::Linear);

  /// Gate weights uniform in [-r, r] with r = 1/sqrt(d_in + H) unless
  /// cfg.init_range is set; biases start at zero.
  static LstmModel random(std::size_t input_dim, const TrainConfig& cfg, Direction direction,
                          Rng& rng);

  friend bool operator==(const LstmModel&, const LstmModel&) = default;
};

struct LstmForward {
  Vector forward_summary;   // forward h^T
  Vector backward_summary;  // empty for forward-only models
  double output = 0.0;
};

/// Same shape as the model, holding dLoss/dWeight.
struct LstmGradients {
  LstmCell forward;
  std::optional<LstmCell> backward;
  Matrix w_ho;
};

LstmForward lstm_forward(const LstmModel& model, std::span<const Vector> sequence);
LstmGradients lstm_backward(const LstmModel& model, std::span<const Vector> sequence,
                            double target);
double lstm_mean_loss(const LstmModel& model, std::span<const SequenceSample> samples);

LstmModel lstm_train(std::span<const SequenceSample> samples, const TrainConfig& cfg,
                     std::vector<double>* epoch_loss = nullptr);
LstmModel lstm_train(LstmModel initial, std::span<const SequenceSample> samples,
                     const TrainConfig& cfg, std::vector<double>* epoch_loss = nullptr);

/// Bidirectional counterparts; blstm_forward requires a bidirectional model.
LstmForward blstm_forward(const LstmModel& model, std::span<const Vector> sequence);
LstmModel blstm_train(std::span<const SequenceSample> samples, const TrainConfig& cfg,
                      std::vector<double>* epoch_loss = nullptr);

}  // namespace kffnn
