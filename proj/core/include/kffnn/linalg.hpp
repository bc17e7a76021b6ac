#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kffnn {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  void fill(double value) noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// m * v. Requires m.cols() == v.size().
Vector matvec(const Matrix& m, std::span<const double> v);

/// transpose(m) * v. Requires m.rows() == v.size(). Weight matrices are stored
/// fan_in x fan_out, so layer pre-activations use this form.
Vector matvec_transposed(const Matrix& m, std::span<const double> v);

/// out += transpose(m) * v, no allocation.
void accumulate_matvec_transposed(const Matrix& m, std::span<const double> v,
                                  std::span<double> out);

/// m += scale * outer(a, b). Requires m is a.size() x b.size().
void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b,
               double scale = 1.0);

/// dst += scale * src, elementwise over equal shapes.
void axpy(double scale, const Matrix& src, Matrix& dst);

Vector add(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
bool all_finite(std::span<const double> v) noexcept;

}  // namespace kffnn
