#pragma once

#include <span>
#include <vector>

#include "kffnn/clip.hpp"
#include "kffnn/envelope.hpp"
#include "kffnn/ffnn.hpp"

namespace kffnn {

/// Per-segment training pairs (g_i, f(i) * label) in temporal order.
std::vector<Sample> infuse_labels(const Clip& clip, const Envelope& env);

/// infuse_labels over every clip, concatenated in clip order.
std::vector<Sample> infuse_dataset(const Dataset& ds, const Envelope& env);

enum class Reconstruction {
  Mean,  ///< mean of predictions[i] / f(i) over segments with f(i) > epsilon
  Sum,   ///< sum of the same terms; kept for literal reproduction only
};

/// Recovers one clip-level value from per-segment predictions by undoing the
/// envelope. Segments with f(i) <= epsilon are skipped; throws ContractError
/// if none remain.
double reconstruct_clip(std::span<const double> predictions, const Envelope& env,
                        double epsilon = 1e-9, Reconstruction mode = Reconstruction::Mean);

}  // namespace kffnn
