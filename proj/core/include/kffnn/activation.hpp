#pragma once

#include <cmath>
#include <string_view>

namespace kffnn {

enum class OutputActivation { Linear, Sigmoid };

/// Logistic squashing 1 / (1 + exp(-lambda * x)); lambda sets the steepness.
inline double sigmoid(double x, double lambda = 1.0) noexcept {
  return 1.0 / (1.0 + std::exp(-lambda * x));
}

/// Checked variant for user-facing calls; throws ContractError if lambda <= 0.
double sigmoid_checked(double x, double lambda);

const char* to_string(OutputActivation a) noexcept;
/// Accepts "linear" or "sigmoid"; throws ContractError otherwise.
OutputActivation parse_output_activation(std::string_view name);

}  // namespace kffnn
