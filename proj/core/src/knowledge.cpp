#include "kffnn/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "kffnn/error.hpp"

namespace kffnn {

namespace {

struct Shoulders {
  double edge;   // f(1), f(n)
  double inner;  // f(2), f(n-1)
};

Shoulders shoulders(EnvelopeKind kind) {
  switch (kind) {
    case EnvelopeKind::Fn1: return {0.75, 0.9};
    case EnvelopeKind::Fn2: return {0.3, 0.6};
    case EnvelopeKind::Fn3: return {0.1, 0.2};
    default: return {1.0, 1.0};
  }
}

}  // namespace

Envelope Envelope::custom(std::vector<double> values) {
  require(!values.empty(), "custom envelope: no values");
  for (double v : values) require(std::isfinite(v), "custom envelope: values must be finite");
  Envelope e(EnvelopeKind::Custom);
  e.values_ = std::move(values);
  return e;
}

Envelope Envelope::from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "constant" || lower == "ffnn") return constant();
  if (lower == "fn1") return fn1();
  if (lower == "fn2") return fn2();
  if (lower == "fn3") return fn3();
  if (lower == "linear") return linear();
  throw ContractError("unknown envelope '" + std::string(name) +
                      "' (expected constant, fn1, fn2, fn3 or linear)");
}

Envelope Envelope::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open envelope file '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::istringstream fields(line);
  std::vector<double> values;
  std::string token;
  while (fields >> token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
      throw FormatError("envelope file '" + path.string() + "': bad number '" + token + "'");
    values.push_back(v);
  }
  if (values.empty()) throw FormatError("envelope file '" + path.string() + "' is empty");
  return custom(std::move(values));
}

std::string Envelope::name() const {
  switch (kind_) {
    case EnvelopeKind::Constant: return "constant";
    case EnvelopeKind::Fn1: return "fn1";
    case EnvelopeKind::Fn2: return "fn2";
    case EnvelopeKind::Fn3: return "fn3";
    case EnvelopeKind::Linear: return "linear";
    case EnvelopeKind::Custom: return "custom";
  }
  return "?";
}

double Envelope::operator()(std::size_t i, std::size_t n) const {
  if (i < 1 || i > n)
    throw ContractError("envelope: index " + std::to_string(i) + " outside 1.." +
                        std::to_string(n));
  switch (kind_) {
    case EnvelopeKind::Constant:
      return 1.0;
    case EnvelopeKind::Fn1:
    case EnvelopeKind::Fn2:
    case EnvelopeKind::Fn3: {
      if (n < 4)
        throw ContractError("envelope " + name() + ": needs at least 4 segments, got " +
                            std::to_string(n));
      const auto s = shoulders(kind_);
      if (i == 1 || i == n) return s.edge;
      if (i == 2 || i == n - 1) return s.inner;
      return 1.0;
    }
    case EnvelopeKind::Linear:
      require(n >= 2, "envelope linear: needs at least 2 segments");
      return static_cast<double>(i - 1) / static_cast<double>(n - 1);
    case EnvelopeKind::Custom:
      if (n != values_.size())
        throw ContractError("custom envelope has " + std::to_string(values_.size()) +
                            " values but the clip has " + std::to_string(n) + " segments");
      return values_[i - 1];
  }
  return 1.0;
}

std::vector<double> Envelope::values(std::size_t n) const {
  std::vector<double> out(n);
  for (std::size_t i = 1; i <= n; ++i) out[i - 1] = (*this)(i, n);
  return out;
}

double envelope_eval(const Envelope& env, std::size_t i, std::size_t n) { return env(i, n); }

std::vector<Sample> infuse_labels(const Clip& clip, const Envelope& env) {
  const std::size_t n = clip.segments.size();
  require(n >= 1, "infuse_labels: clip '" + clip.id + "' has no segments");
  require(std::isfinite(clip.label), "infuse_labels: clip '" + clip.id + "' label not finite");
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i)
    out.push_back({clip.segments[i - 1].features, env(i, n) * clip.label});
  return out;
}

std::vector<Sample> infuse_dataset(const Dataset& ds, const Envelope& env) {
  std::vector<Sample> out;
  for (const auto& clip : ds.clips) {
    auto pairs = infuse_labels(clip, env);
    out.insert(out.end(), std::make_move_iterator(pairs.begin()),
               std::make_move_iterator(pairs.end()));
  }
  return out;
}

double reconstruct_clip(std::span<const double> predictions, const Envelope& env, double epsilon,
                        Reconstruction mode) {
  require(!predictions.empty(), "reconstruct_clip: no predictions");
  require(epsilon >= 0.0, "reconstruct_clip: epsilon must be non-negative");
  const std::size_t n = predictions.size();
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double f = env(i, n);
    if (!(f > epsilon)) continue;
    sum += predictions[i - 1] / f;
    ++used;
  }
  require(used > 0, "reconstruct_clip: every segment excluded by the envelope (f <= epsilon)");
  return mode == Reconstruction::Mean ? sum / static_cast<double>(used) : sum;
}

}  // namespace kffnn
