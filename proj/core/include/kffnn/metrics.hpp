#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kffnn/clip.hpp"
#include "kffnn/envelope.hpp"
#include "kffnn/models.hpp"

namespace kffnn {

/// (1/N) sum (pred - truth)^2. Throws on empty or mismatched input.
double mse(std::span<const double> pred, std::span<const double> truth);

/// Sample Pearson correlation. nullopt when either side has zero variance.
/// Throws on mismatched lengths or fewer than two points.
std::optional<double> pcc(std::span<const double> pred, std::span<const double> truth);

/// One clip-level value. FfnnModel requires an envelope and reconstructs from
/// per-segment outputs; recurrent models ignore the envelope.
double predict_clip(const AnyModel& model, const Clip& clip, const Envelope* env,
                    double epsilon = 1e-9);

std::vector<double> predict_dataset(const AnyModel& model, const Dataset& ds,
                                    const Envelope* env, double epsilon = 1e-9);

struct EvalReport {
  std::string system;
  std::size_t train_size = 0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  std::optional<double> pcc;
  std::size_t n_test = 0;
  /// Set when training diverged; mse/pcc are then meaningless.
  bool failed = false;
};

EvalReport evaluate_clip_level(const AnyModel& model, const Dataset& test, const Envelope* env,
                               double epsilon = 1e-9);

inline constexpr const char* kReportCsvHeader = "system,train_size,seed,mse,pcc,n_test";

/// "system,train_size,seed,mse,pcc,n_test" with 17 significant digits.
/// Undefined pcc prints as "NA"; failed rows print "diverged" in both metric
/// columns.
std::string to_csv_row(const EvalReport& r);

}  // namespace kffnn
