#include <gtest/gtest.h>

#include <cmath>

#include "kffnn/error.hpp"
#include "kffnn/ffnn.hpp"
#include "kffnn/gradcheck.hpp"
#include "test_util.hpp"

using namespace kffnn;

namespace {

// Straight transcription of the forward equations, kept separate from the
// library's loop structure.
double reference_forward(const FfnnModel& m, const Vector& g) {
  double out = 0.0;
  for (std::size_t k = 0; k < m.hidden_dim(); ++k) {
    double z = 0.0;
    for (std::size_t j = 0; j < m.input_dim(); ++j) z += g[j] * m.w_ih(j, k);
    out += m.w_ho(k, 0) / (1.0 + std::exp(-m.lambda * z));
  }
  return m.output == OutputActivation::Sigmoid ? 1.0 / (1.0 + std::exp(-m.lambda * out)) : out;
}

FfnnModel random_model(Rng& rng, std::size_t d, std::size_t h, OutputActivation out,
                       double lambda = 1.0) {
  FfnnModel m = FfnnModel::zeros(d, h, lambda, out);
  m.w_ih = fixture::random_matrix(rng, d, h);
  m.w_ho = fixture::random_matrix(rng, h, 1);
  return m;
}

}  // namespace

TEST(FfnnForward, ZeroWeightsSigmoidOutput) {
  const auto m = FfnnModel::zeros(4, 3, 1.0, OutputActivation::Sigmoid);
  const auto f = ffnn_forward(m, Vector{1, -2, 3, 4});
  EXPECT_EQ(f.hidden, (Vector{0.5, 0.5, 0.5}));
  EXPECT_EQ(f.output, 0.5);
}

TEST(FfnnForward, ZeroWeightsLinearOutput) {
  const auto m = FfnnModel::zeros(4, 3);
  EXPECT_EQ(ffnn_forward(m, Vector{1, -2, 3, 4}).output, 0.0);
}

TEST(FfnnForward, MatchesIndependentForward) {
  Rng rng(7);
  for (auto out : {OutputActivation::Linear, OutputActivation::Sigmoid}) {
    const auto m = random_model(rng, 4, 2, out, 1.3);
    const auto g = fixture::random_vector(rng, 4);
    EXPECT_NEAR(ffnn_forward(m, g).output, reference_forward(m, g), 1e-14);
  }
}

TEST(FfnnForward, DimensionMismatchThrows) {
  const auto m = FfnnModel::zeros(4, 2);
  EXPECT_THROW(ffnn_forward(m, Vector{1, 2, 3}), ContractError);
  EXPECT_THROW(ffnn_backward(m, Vector{1, 2, 3}, 0.0), ContractError);
}

TEST(FfnnLoss, ReferenceValues) {
  EXPECT_EQ(ffnn_loss(0.5, 0.5), 0.0);
  EXPECT_EQ(ffnn_loss(1.0, 0.0), 1.0);
  EXPECT_NEAR(ffnn_loss(0.3, 0.8), 0.25, 1e-15);
}

TEST(FfnnBackward, ZeroErrorGivesZeroGradient) {
  Rng rng(2);
  for (auto out : {OutputActivation::Linear, OutputActivation::Sigmoid}) {
    const auto m = random_model(rng, 5, 3, out);
    const auto g = fixture::random_vector(rng, 5);
    const auto grads = ffnn_backward(m, g, ffnn_forward(m, g).output);
    for (double x : grads.w_ih.data()) EXPECT_EQ(x, 0.0);
    for (double x : grads.w_ho.data()) EXPECT_EQ(x, 0.0);
  }
}

TEST(FfnnBackward, SingleWeightNetworkMatchesHandDerivative) {
  const double w1 = 0.7, w2 = -1.3, x = 0.9, t = 0.4, lambda = 1.5;
  const double h = 1.0 / (1.0 + std::exp(-lambda * w1 * x));

  FfnnModel lin = FfnnModel::zeros(1, 1, lambda);
  lin.w_ih(0, 0) = w1;
  lin.w_ho(0, 0) = w2;
  const double o = w2 * h;
  auto g = ffnn_backward(lin, Vector{x}, t);
  EXPECT_NEAR(g.w_ho(0, 0), 2 * (o - t) * h, 1e-15);
  EXPECT_NEAR(g.w_ih(0, 0), 2 * (o - t) * w2 * lambda * h * (1 - h) * x, 1e-15);

  FfnnModel sig = lin;
  sig.output = OutputActivation::Sigmoid;
  const double os = 1.0 / (1.0 + std::exp(-lambda * w2 * h));
  const double dz = 2 * (os - t) * lambda * os * (1 - os);
  g = ffnn_backward(sig, Vector{x}, t);
  EXPECT_NEAR(g.w_ho(0, 0), dz * h, 1e-15);
  EXPECT_NEAR(g.w_ih(0, 0), dz * w2 * lambda * h * (1 - h) * x, 1e-15);
}

TEST(FfnnBackward, AgreesWithCentralDifferences) {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto out = trial % 2 ? OutputActivation::Sigmoid : OutputActivation::Linear;
    auto m = random_model(rng, 21, 21, out);
    const auto g = fixture::random_vector(rng, 21);
    const double t = rng.uniform(0.0, 2.0);
    const auto analytic = ffnn_backward(m, g, t);
    const auto params = parameters(m);
    const auto numeric = gradcheck::fd_gradient(
        params, [&] { return ffnn_loss(ffnn_forward(m, g).output, t); });
    const auto report = gradcheck::compare(params, gradient_list(analytic), numeric);
    EXPECT_TRUE(report.passed) << gradcheck::format_report(gradcheck::ModelKind::Ffnn, report);
  }
}

TEST(FfnnBackward, SmallStepNeverIncreasesLoss) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_model(rng, 6, 4, trial % 2 ? OutputActivation::Sigmoid
                                              : OutputActivation::Linear);
    const auto g = fixture::random_vector(rng, 6);
    const double t = rng.uniform(0.0, 2.0);
    const double before = ffnn_loss(ffnn_forward(m, g).output, t);
    const auto grads = ffnn_backward(m, g, t);
    axpy(-1e-4, grads.w_ih, m.w_ih);
    axpy(-1e-4, grads.w_ho, m.w_ho);
    EXPECT_LE(ffnn_loss(ffnn_forward(m, g).output, t), before + 1e-10);
  }
}

TEST(FfnnTrain, OneStepIsBackwardThenDescent) {
  Rng rng(8);
  const auto init = random_model(rng, 3, 2, OutputActivation::Linear);
  const std::vector<Sample> data{{{0.2, -0.4, 0.9}, 1.5}};
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.eta = 0.05;
  const auto trained = ffnn_train(init, data, cfg);
  auto expected = init;
  const auto grads = ffnn_backward(init, data[0].features, data[0].target);
  axpy(-cfg.eta, grads.w_ih, expected.w_ih);
  axpy(-cfg.eta, grads.w_ho, expected.w_ho);
  EXPECT_EQ(trained, expected);
}

TEST(FfnnTrain, RejectsBadConfigAndData) {
  const std::vector<Sample> data{{{1.0, 2.0}, 1.0}};
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(ffnn_train(data, cfg), ContractError);
  cfg = {};
  cfg.eta = 0.0;
  EXPECT_THROW(ffnn_train(data, cfg), ContractError);
  EXPECT_THROW(ffnn_train(std::vector<Sample>{}, TrainConfig{}), ContractError);
  const std::vector<Sample> ragged{{{1.0, 2.0}, 1.0}, {{1.0}, 0.0}};
  EXPECT_THROW(ffnn_train(ragged, TrainConfig{}), ContractError);
}

TEST(FfnnTrain, SameSeedIsBitwiseReproducible) {
  Rng rng(1);
  std::vector<Sample> data;
  for (int i = 0; i < 20; ++i) data.push_back({fixture::random_vector(rng, 5), rng.uniform(0, 5)});
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.hidden = 6;
  cfg.seed = 42;
  EXPECT_EQ(ffnn_train(data, cfg), ffnn_train(data, cfg));
  auto other = cfg;
  other.seed = 43;
  EXPECT_NE(ffnn_train(data, cfg), ffnn_train(data, other));
}

TEST(FfnnTrain, OrderMattersWithoutShuffling) {
  const std::vector<Sample> ab{{{0.5, -0.2}, 1.0}, {{-0.3, 0.8}, 3.0}};
  const std::vector<Sample> ba{ab[1], ab[0]};
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.hidden = 3;
  cfg.shuffle_each_epoch = false;
  EXPECT_NE(ffnn_train(ab, cfg), ffnn_train(ba, cfg));
}

TEST(FfnnTrain, SinglePairLossDecreasesMonotonically) {
  const std::vector<Sample> data{{{0.3, -0.7, 0.1, 0.9}, 2.0}};
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.hidden = 4;
  std::vector<double> losses;
  ffnn_train(data, cfg, &losses);
  ASSERT_EQ(losses.size(), cfg.epochs);
  for (std::size_t e = 1; e < losses.size(); ++e) EXPECT_LE(losses[e], losses[e - 1]) << e;
  EXPECT_LT(losses.back(), 0.01 * losses.front());
}

TEST(FfnnTrain, InitialisationRespectsFanInBound) {
  TrainConfig cfg;
  cfg.hidden = 9;
  Rng rng(3);
  const auto m = FfnnModel::random(16, cfg, rng);
  for (double x : m.w_ih.data()) EXPECT_LE(std::abs(x), 0.25);
  for (double x : m.w_ho.data()) EXPECT_LE(std::abs(x), 1.0 / 3.0);
  cfg.init_range = 0.01;
  Rng rng2(3);
  for (double x : FfnnModel::random(16, cfg, rng2).w_ih.data()) EXPECT_LE(std::abs(x), 0.01);
}

TEST(FfnnTrain, HugeLearningRateReportsDivergence) {
  const std::vector<Sample> data{{{50.0, -40.0}, 1e6}, {{-30.0, 60.0}, -1e6}};
  TrainConfig cfg;
  cfg.eta = 1e3;
  cfg.epochs = 50;
  cfg.hidden = 3;
  EXPECT_THROW(ffnn_train(data, cfg), DivergenceError);
}

TEST(FfnnModel, ValidateCatchesBadShapes) {
  auto m = FfnnModel::zeros(3, 2);
  EXPECT_NO_THROW(m.validate());
  m.w_ho = Matrix(3, 1);
  EXPECT_THROW(m.validate(), ContractError);
  m = FfnnModel::zeros(3, 2);
  m.lambda = 0.0;
  EXPECT_THROW(m.validate(), ContractError);
  m = FfnnModel::zeros(3, 2);
  m.w_ih(0, 0) = NAN;
  EXPECT_THROW(m.validate(), ContractError);
}
