#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kffnn/linalg.hpp"
#include "kffnn/models.hpp"

namespace kffnn::gradcheck {

using LossFn = std::function<double()>;

/// Central differences (L(w + h) - L(w - h)) / 2h for every entry of every
/// parameter. Each weight is restored to its exact original value. Throws
/// std::runtime_error naming the weight if a perturbed loss is not finite.
std::vector<Matrix> fd_gradient(std::span<const ParamRef> params, const LossFn& loss,
                                double step = 1e-6);

struct WeightLocation {
  std::string matrix;
  std::size_t row = 0;
  std::size_t col = 0;
};

/// A partial passes when its relative error is within rel or its absolute
/// error is within abs. Relative error is |a - n| / max(|a|, |n|).
struct Tolerance {
  double rel = 1e-5;
  double abs = 1e-8;
};

struct GradReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  /// Entry with the largest min(rel/tol.rel, abs/tol.abs); > 1 means failing.
  WeightLocation worst_weight;
  double worst_score = 0.0;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::size_t trials = 0;
  bool passed = true;

  /// Folds another report into this one.
  void merge(const GradReport& other);
};

/// Compares analytic gradients (in parameters() order) with numeric ones.
GradReport compare(std::span<const ParamRef> params, std::span<const Matrix* const> analytic,
                   std::span<const Matrix> numeric, const Tolerance& tol = {});

enum class ModelKind { Ffnn, Rnn, Lstm, Blstm };
std::string_view to_string(ModelKind k) noexcept;
/// Throws ContractError on unknown names.
ModelKind parse_model_kind(std::string_view name);

struct CheckOptions {
  double step = 1e-6;
  Tolerance tolerance{};
  /// Applied to the analytic gradients before comparison; test fixtures use
  /// it to inject faults.
  std::function<void(std::vector<Matrix>&)> tamper;
};

/// Random (model, sample) instances compared against fd_gradient. FFNN trials
/// alternate between 21-21-1 and 4-2-1 shapes; recurrent trials draw T in
/// [1, 12]. Failures are reported, never thrown.
GradReport check(ModelKind kind, std::size_t trials, std::uint64_t seed,
                 const CheckOptions& options = {});

/// Loss of an RNN evaluated by an explicitly unrolled T-layer feed-forward
/// network whose layers share (tie) one stacked [w_ih; w_hh] matrix. This is
/// an independent implementation of the recurrence used only as an oracle.
double unrolled_loss(const RnnModel& model, std::span<const Vector> sequence, double target);

/// Finite-difference gradient of unrolled_loss with respect to the tied RNN
/// weights, in parameters(RnnModel&) order.
std::vector<Matrix> unrolled_fd_gradient(const RnnModel& model,
                                         std::span<const Vector> sequence, double target,
                                         double step = 1e-6);

std::string format_report(ModelKind kind, const GradReport& report);

}  // namespace kffnn::gradcheck
