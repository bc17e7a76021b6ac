#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "kffnn/activation.hpp"

namespace kffnn {

/// Hyperparameters shared by every trainer. Training is plain per-sample
/// steepest descent: no momentum, mini-batches or regularisation.
struct TrainConfig {
  double eta = 0.01;
  std::size_t epochs = 200;
  double lambda = 1.0;
  std::uint64_t seed = 42;
  /// Weights start uniform in [-r, r]. Unset means r = 1/sqrt(fan_in) per layer.
  std::optional<double> init_range;
  bool shuffle_each_epoch = true;
  std::size_t hidden = 21;
  OutputActivation output = OutputActivation::Linear;
  /// Global-norm cap on each per-sample gradient. Unset disables clipping.
  std::optional<double> grad_clip;

  /// Throws ContractError on eta <= 0, epochs == 0, lambda <= 0, hidden == 0,
  /// init_range <= 0 or grad_clip <= 0.
  void validate() const;
};

}  // namespace kffnn
