#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kffnn {

enum class EnvelopeKind { Constant, Fn1, Fn2, Fn3, Linear, Custom };

/// Temporal prior f(1..n) over the segments of a clip.
///
///   Constant  1, 1, ..., 1
///   Fn1       0.75, 0.9, 1, ..., 1, 0.9, 0.75
///   Fn2       0.3,  0.6, 1, ..., 1, 0.6, 0.3
///   Fn3       0.1,  0.2, 1, ..., 1, 0.2, 0.1
///   Linear    (i - 1) / (n - 1)
///   Custom    explicit values, n fixed by the list
///
/// The Fn family shapes the first two and last two segments and needs n >= 4.
class Envelope {
 public:
  static Envelope constant() { return Envelope(EnvelopeKind::Constant); }
  static Envelope fn1() { return Envelope(EnvelopeKind::Fn1); }
  static Envelope fn2() { return Envelope(EnvelopeKind::Fn2); }
  static Envelope fn3() { return Envelope(EnvelopeKind::Fn3); }
  static Envelope linear() { return Envelope(EnvelopeKind::Linear); }
  static Envelope custom(std::vector<double> values);

  /// "constant", "fn1", "fn2", "fn3" or "linear" (case-insensitive).
  static Envelope from_name(std::string_view name);

  /// Reads one line of whitespace-separated reals.
  static Envelope load(const std::filesystem::path& path);

  EnvelopeKind kind() const noexcept { return kind_; }
  const std::vector<double>& custom_values() const noexcept { return values_; }
  std::string name() const;

  /// f(i) for 1 <= i <= n.
  double operator()(std::size_t i, std::size_t n) const;

  /// f(1..n) as a list.
  std::vector<double> values(std::size_t n) const;

  friend bool operator==(const Envelope&, const Envelope&) = default;

 private:
  explicit Envelope(EnvelopeKind kind) : kind_(kind) {}

  EnvelopeKind kind_;
  std::vector<double> values_;
};

/// Free-function form of Envelope::operator().
double envelope_eval(const Envelope& env, std::size_t i, std::size_t n);

}  // namespace kffnn
