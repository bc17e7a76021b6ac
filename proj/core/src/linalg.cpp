#include "kffnn/linalg.hpp"

#include <cmath>
#include <string>

#include "kffnn/error.hpp"

namespace kffnn {

namespace {

std::string shape(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows * cols, "matrix data length " + std::to_string(data_.size()) +
                                           " does not match shape " + shape(rows, cols));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) noexcept {
  for (auto& x : data_) x = value;
}

bool Matrix::all_finite() const noexcept { return kffnn::all_finite(data_); }

Vector matvec(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size())
    throw ContractError("matvec: matrix " + shape(m.rows(), m.cols()) +
                        " times vector of length " + std::to_string(v.size()));
  Vector out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
  return out;
}

Vector matvec_transposed(const Matrix& m, std::span<const double> v) {
  Vector out(m.cols(), 0.0);
  accumulate_matvec_transposed(m, v, out);
  return out;
}

void accumulate_matvec_transposed(const Matrix& m, std::span<const double> v,
                                  std::span<double> out) {
  if (m.rows() != v.size() || m.cols() != out.size())
    throw ContractError("matvec_transposed: matrix " + shape(m.rows(), m.cols()) +
                        " with vector of length " + std::to_string(v.size()) + " into " +
                        std::to_string(out.size()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double x = v[r];
    if (x == 0.0) continue;
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += x * row[c];
  }
}

void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b, double scale) {
  if (m.rows() != a.size() || m.cols() != b.size())
    throw ContractError("add_outer: target " + shape(m.rows(), m.cols()) + " vs " +
                        shape(a.size(), b.size()));
  for (std::size_t r = 0; r < a.size(); ++r) {
    const double x = scale * a[r];
    if (x == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < b.size(); ++c) row[c] += x * b[c];
  }
}

void axpy(double scale, const Matrix& src, Matrix& dst) {
  if (src.rows() != dst.rows() || src.cols() != dst.cols())
    throw ContractError("axpy: shape " + shape(src.rows(), src.cols()) + " vs " +
                        shape(dst.rows(), dst.cols()));
  auto d = dst.data();
  const auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "add: length mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

bool all_finite(std::span<const double> v) noexcept {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace kffnn
