#include "kffnn/rng.hpp"

#include <cmath>
#include <numbers>

#include "kffnn/activation.hpp"
#include "kffnn/error.hpp"
#include "kffnn/train_config.hpp"

namespace kffnn {

namespace {

constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() noexcept {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix(state_);
}

double Rng::uniform01() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  require(lo < hi, "uniform: requires lo < hi");
  return lo + (hi - lo) * uniform01();
}

std::uint64_t Rng::below(std::uint64_t n) {
  require(n > 0, "below: n must be positive");
  const auto k = static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

double Rng::gaussian() noexcept {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
  return mix(base ^ mix(salt + 0x9E3779B97F4A7C15ULL));
}

double sigmoid_checked(double x, double lambda) {
  require(lambda > 0.0, "sigmoid: lambda must be positive");
  return sigmoid(x, lambda);
}

const char* to_string(OutputActivation a) noexcept {
  return a == OutputActivation::Linear ? "linear" : "sigmoid";
}

OutputActivation parse_output_activation(std::string_view name) {
  if (name == "linear") return OutputActivation::Linear;
  if (name == "sigmoid") return OutputActivation::Sigmoid;
  throw ContractError("unknown output activation '" + std::string(name) +
                      "' (expected linear or sigmoid)");
}

void TrainConfig::validate() const {
  require(eta > 0.0, "train config: eta must be positive");
  require(epochs >= 1, "train config: epochs must be at least 1");
  require(lambda > 0.0, "train config: lambda must be positive");
  require(hidden >= 1, "train config: hidden size must be at least 1");
  require(!init_range || *init_range > 0.0, "train config: init_range must be positive");
  require(!grad_clip || *grad_clip > 0.0, "train config: grad_clip must be positive");
}

}  // namespace kffnn
