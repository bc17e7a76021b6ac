#pragma once

#include <filesystem>
#include <iosfwd>

#include "kffnn/models.hpp"

namespace kffnn {

/// Flat text model format:
///
///   kffnn-model 1
///   kind <ffnn|rnn|lstm|blstm>
///   input_dim <d>
///   hidden <H>
///   lambda <value>
///   output <linear|sigmoid>
///   block <name> <rows> <cols>
///   <rows*cols whitespace-separated reals, row-major>
///   ...
///
/// Blocks appear in parameters() order. Reals use 17 significant digits so a
/// save/load round trip is exact.
void save_model(const AnyModel& model, std::ostream& out);
void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(std::istream& in);
AnyModel load_model(const std::filesystem::path& path);

}  // namespace kffnn
