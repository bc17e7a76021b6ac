#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kffnn/error.hpp"
#include "kffnn/linalg.hpp"
#include "kffnn/rng.hpp"

namespace kffnn::detail {

inline double init_bound(std::optional<double> init_range, std::size_t fan_in) {
  return init_range ? *init_range : 1.0 / std::sqrt(static_cast<double>(fan_in));
}

inline void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (double& w : m.data()) w = rng.uniform(-bound, bound);
}

/// Visiting order for one epoch. Fisher-Yates from the back with below(i + 1).
inline void shuffle_order(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
}

inline std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

/// Scales the gradient set down so its global L2 norm is at most cap.
inline void clip_global_norm(std::initializer_list<Matrix*> grads, double cap) {
  double sq = 0.0;
  for (const Matrix* g : grads)
    for (double x : g->data()) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > cap)) return;
  const double scale = cap / norm;
  for (Matrix* g : grads)
    for (double& x : g->data()) x *= scale;
}

[[noreturn]] inline void diverged(const char* what, std::size_t epoch, std::size_t sample) {
  throw DivergenceError(std::string(what) + " diverged at epoch " + std::to_string(epoch + 1) +
                        ", sample " + std::to_string(sample) +
                        ": non-finite loss or weights (learning rate too large?)");
}

}  // namespace kffnn::detail
