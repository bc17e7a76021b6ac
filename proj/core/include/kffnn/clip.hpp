#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kffnn/envelope.hpp"
#include "kffnn/linalg.hpp"

namespace kffnn {

/// One 1-second slice of a clip. index is 1-based.
struct Segment {
  Vector features;
  std::size_t index = 1;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Clip {
  std::string id;
  std::vector<Segment> segments;
  double label = 0.0;

  std::size_t length() const noexcept { return segments.size(); }
  /// Segment feature vectors in temporal order.
  std::vector<Vector> sequence() const;

  friend bool operator==(const Clip&, const Clip&) = default;
};

enum class LabelDistribution { Uniform, Skewed };

/// Parameters a synthetic dataset was generated from.
struct GenerationMeta {
  std::size_t count = 0;
  std::size_t n_min = 8;
  std::size_t n_max = 12;
  std::size_t dim = 21;
  Envelope envelope = Envelope::constant();
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  LabelDistribution labels = LabelDistribution::Uniform;

  friend bool operator==(const GenerationMeta&, const GenerationMeta&) = default;
};

struct Dataset {
  std::vector<Clip> clips;
  std::size_t feature_dim = 0;
  std::optional<GenerationMeta> meta;

  std::size_t size() const noexcept { return clips.size(); }
  bool empty() const noexcept { return clips.empty(); }

  /// Uniform dimension, unique ids, finite labels and features, 1-based
  /// consecutive segment indices. Throws ContractError.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace kffnn
