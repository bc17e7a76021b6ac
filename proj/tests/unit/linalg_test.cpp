#include <gtest/gtest.h>

#include <cmath>

#include "kffnn/activation.hpp"
#include "kffnn/error.hpp"
#include "kffnn/linalg.hpp"
#include "test_util.hpp"

using namespace kffnn;

TEST(Matvec, IdentityLeavesVectorUnchanged) {
  EXPECT_EQ(matvec(Matrix::identity(3), Vector{1, 2, 3}), (Vector{1, 2, 3}));
}

TEST(Matvec, ZeroMatrixGivesZeros) {
  EXPECT_EQ(matvec(Matrix(2, 3), Vector{4, -5, 6}), (Vector{0, 0}));
}

TEST(Matvec, HandComputedProduct) {
  const Matrix m(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(matvec(m, Vector{1, 1}), (Vector{3, 7}));
  EXPECT_EQ(matvec_transposed(m, Vector{1, 1}), (Vector{4, 6}));
}

TEST(Matvec, DimensionMismatchThrows) {
  EXPECT_THROW(matvec(Matrix(2, 3), Vector{1, 2}), ContractError);
  EXPECT_THROW(matvec_transposed(Matrix(2, 3), Vector{1, 2, 3}), ContractError);
}

TEST(Matvec, DistributesOverAddition) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = fixture::random_matrix(rng, 7, 5, 3.0);
    const auto u = fixture::random_vector(rng, 5, -3, 3);
    const auto v = fixture::random_vector(rng, 5, -3, 3);
    const auto lhs = matvec(m, add(u, v));
    const auto mu = matvec(m, u);
    const auto mv = matvec(m, v);
    for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs[i], mu[i] + mv[i], 1e-12);
  }
}

TEST(Linalg, AddOuterAndAxpy) {
  Matrix m(2, 3);
  add_outer(m, Vector{1, 2}, Vector{1, 0, -1}, 2.0);
  EXPECT_EQ(m, Matrix(2, 3, {2, 0, -2, 4, 0, -4}));
  Matrix acc(2, 3, 1.0);
  axpy(-0.5, m, acc);
  EXPECT_EQ(acc, Matrix(2, 3, {0, 1, 2, -1, 1, 3}));
  EXPECT_THROW(axpy(1.0, Matrix(3, 2), acc), ContractError);
}

TEST(Linalg, AccumulateMatvecTransposedAdds) {
  const Matrix m(2, 2, {1, 2, 3, 4});
  Vector out{10, 20};
  accumulate_matvec_transposed(m, Vector{1, 1}, out);
  EXPECT_EQ(out, (Vector{14, 26}));
}

TEST(Linalg, DotNormFinite) {
  EXPECT_DOUBLE_EQ(dot(Vector{1, 2, 3}, Vector{4, 5, 6}), 32.0);
  EXPECT_DOUBLE_EQ(norm2(Vector{3, 4}), 5.0);
  EXPECT_TRUE(all_finite(Vector{1, 2}));
  EXPECT_FALSE(all_finite(Vector{1, NAN}));
  Matrix m(1, 2);
  m(0, 1) = INFINITY;
  EXPECT_FALSE(m.all_finite());
}

TEST(Matrix, ConstructionChecksDataLength) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ContractError);
  const Matrix m(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m(1, 0), 4.0);
  EXPECT_EQ(m.row(1)[2], 6.0);
}

TEST(Sigmoid, ReferenceValues) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(1e9), 1.0, 1e-12);
  EXPECT_NEAR(sigmoid(1.0), 0.7310585786300049, 1e-15);
  EXPECT_NEAR(sigmoid(1.0, 2.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(Sigmoid, SymmetryAndMonotonicity) {
  double prev = 0.0;
  for (double x = -30.0; x <= 30.0; x += 0.25) {
    EXPECT_NEAR(sigmoid(x) + sigmoid(-x), 1.0, 1e-12) << x;
    EXPECT_GE(sigmoid(x), prev);
    prev = sigmoid(x);
  }
}

TEST(Sigmoid, CheckedRejectsNonPositiveLambda) {
  EXPECT_THROW(sigmoid_checked(1.0, 0.0), ContractError);
  EXPECT_THROW(sigmoid_checked(1.0, -1.0), ContractError);
  EXPECT_DOUBLE_EQ(sigmoid_checked(1.0, 1.0), sigmoid(1.0));
}

TEST(OutputActivation, ParseRoundTrip) {
  for (auto a : {OutputActivation::Linear, OutputActivation::Sigmoid})
    EXPECT_EQ(parse_output_activation(to_string(a)), a);
  EXPECT_THROW(parse_output_activation("tanh"), ContractError);
}
