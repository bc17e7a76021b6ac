#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "kffnn/clip.hpp"
#include "kffnn/envelope.hpp"
#include "kffnn/rnn.hpp"

namespace kffnn {

/// Synthetic fade-envelope clips. Per clip, in this draw order:
///   n     = n_min + below(n_max - n_min + 1)
///   label = uniform in [0, 5)  (or the skewed law, see below)
///   u     = d coordinates uniform in [0, 1), scaled to unit L2 norm
///   segment i, coordinate j: f(i) * label * u_j + noise_sigma * gaussian()
/// Skewed labels are clamp(1.5 + 0.6 * gaussian(), 0, 5).
Dataset generate_synthetic(const GenerationMeta& params);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

struct SplitSpec {
  std::vector<std::size_t> train_sizes;
  double test_fraction = 0.1;
  /// Absolute held-out count; overrides test_fraction when set.
  std::optional<std::size_t> test_count;
  std::uint64_t seed = 0;
};

/// One shuffled permutation: the first test clips form a fixed held-out set,
/// and training set k is the first train_sizes[k] of the rest, so smaller
/// training sets are prefixes of larger ones.
std::vector<TrainTestSplit> split(const Dataset& ds, const SplitSpec& spec);

/// One JSON object per line: {"id", "label", "segments": [[d reals], ...]}.
/// Reals are written with 17 significant digits.
void save_jsonl(const Dataset& ds, std::ostream& out);
void save_jsonl(const Dataset& ds, const std::filesystem::path& path);
Dataset load_jsonl(std::istream& in);
Dataset load_jsonl(const std::filesystem::path& path);

/// Sidecar next to a JSONL file ("<path>.meta.json").
std::filesystem::path meta_path_for(const std::filesystem::path& jsonl);
void save_meta(const GenerationMeta& meta, const std::filesystem::path& path);
GenerationMeta load_meta(const std::filesystem::path& path);

/// Clips as (sequence, label) pairs for the recurrent trainers.
std::vector<SequenceSample> to_sequences(const Dataset& ds);

/// Label histogram with unit-width bins over [0, 5]; last bin includes 5.
std::vector<std::size_t> label_histogram(const Dataset& ds, std::size_t bins = 10);

std::string_view to_string(LabelDistribution d) noexcept;
LabelDistribution parse_label_distribution(std::string_view name);

}  // namespace kffnn
