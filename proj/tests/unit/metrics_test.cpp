#include <gtest/gtest.h>

#include <cmath>

#include "kffnn/error.hpp"
#include "kffnn/knowledge.hpp"
#include "kffnn/metrics.hpp"
#include "test_util.hpp"

using namespace kffnn;

namespace {

using V = std::vector<double>;

// Single-segment clips whose only feature is the label.
Dataset copy_task(const V& labels) {
  Dataset ds;
  ds.feature_dim = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Clip c;
    c.id = "clip-" + std::to_string(i);
    c.label = labels[i];
    c.segments.push_back({{labels[i]}, 1});
    ds.clips.push_back(c);
  }
  return ds;
}

}  // namespace

TEST(Mse, ReferenceValues) {
  EXPECT_EQ(mse(V{1, 2, 3}, V{1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(mse(V{2, 3, 4}, V{1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(mse(V{0, 2}, V{1, 1}), 1.0);
  EXPECT_THROW(mse(V{}, V{}), ContractError);
  EXPECT_THROW(mse(V{1}, V{1, 2}), ContractError);
}

TEST(Pcc, ReferenceValues) {
  const V x{1, 4, 2, 8, 5};
  V neg;
  for (double v : x) neg.push_back(-v);
  EXPECT_NEAR(*pcc(x, x), 1.0, 1e-15);
  EXPECT_NEAR(*pcc(neg, x), -1.0, 1e-15);
  EXPECT_NEAR(*pcc(V{1, 2, 3}, V{1, 3, 2}), 0.5, 1e-15);
  EXPECT_FALSE(pcc(V{2, 2, 2}, V{1, 2, 3}).has_value());
  EXPECT_FALSE(pcc(V{1, 2, 3}, V{0, 0, 0}).has_value());
  EXPECT_THROW(pcc(V{1}, V{1}), ContractError);
  EXPECT_THROW(pcc(V{1, 2}, V{1, 2, 3}), ContractError);
}

TEST(Metrics, RandomPairProperties) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(50);
    const auto x = fixture::random_vector(rng, n, -5, 5);
    const auto y = fixture::random_vector(rng, n, -5, 5);
    EXPECT_EQ(mse(x, y), mse(y, x));
    const double a = rng.uniform(0.1, 10.0), b = rng.uniform(-10, 10);
    V ax;
    for (double v : x) ax.push_back(a * v + b);
    const double r = *pcc(x, y);
    EXPECT_NEAR(*pcc(ax, y), r, 1e-12);
    EXPECT_NEAR(*pcc(y, ax), r, 1e-12);
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Evaluate, PerfectRecurrentFixtureScoresZeroAndOne) {
  Rng rng(31);
  auto model = RnnModel::zeros(2, 3);
  model.w_ih = fixture::random_matrix(rng, 2, 3);
  model.w_hh = fixture::random_matrix(rng, 3, 3);
  model.w_ho = fixture::random_matrix(rng, 3, 1);
  Dataset ds;
  ds.feature_dim = 2;
  for (int k = 0; k < 6; ++k) {
    Clip c;
    c.id = std::to_string(k);
    for (std::size_t i = 1; i <= 4; ++i) c.segments.push_back({fixture::random_vector(rng, 2), i});
    ds.clips.push_back(c);
  }
  const auto preds = predict_dataset(AnyModel(model), ds, nullptr);
  for (std::size_t k = 0; k < ds.size(); ++k) ds.clips[k].label = preds[k];
  const auto r = evaluate_clip_level(AnyModel(model), ds, nullptr);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_NEAR(*r.pcc, 1.0, 1e-12);
}

TEST(Evaluate, KffnnWithExactSegmentOutputsScoresZero) {
  // Zero input weights make every hidden unit 0.5, so the output is
  // 0.5 * sum(w_ho) for every segment: a constant prediction of 2.0 here.
  auto model = FfnnModel::zeros(1, 2);
  model.w_ho(0, 0) = 2.0;
  model.w_ho(1, 0) = 2.0;
  const auto ds = copy_task({2.0, 2.0, 2.0});
  const Envelope env = Envelope::constant();
  const auto r = evaluate_clip_level(AnyModel(model), ds, &env);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_FALSE(r.pcc.has_value());
  EXPECT_EQ(r.n_test, 3u);
}

TEST(Evaluate, ThreeClipHandComputation) {
  // Constant per-segment output 0.5 * (w0 + w1) = 1.5 under Fn2 reconstructs
  // to 1.5 * mean(1 / f(i)) for each clip length.
  auto model = FfnnModel::zeros(1, 2);
  model.w_ho(0, 0) = 1.0;
  model.w_ho(1, 0) = 2.0;
  Dataset ds;
  ds.feature_dim = 1;
  const std::size_t lengths[] = {4, 5, 6};
  const double labels[] = {3.0, 2.0, 2.5};
  for (int k = 0; k < 3; ++k) {
    Clip c;
    c.id = "c" + std::to_string(k);
    c.label = labels[k];
    for (std::size_t i = 1; i <= lengths[k]; ++i) c.segments.push_back({{0.0}, i});
    ds.clips.push_back(c);
  }
  // mean(1/f): n=4 -> (2/0.3 + 2/0.6)/4 = 2.5; n=5 -> (10 + 1)/5 = 2.2;
  // n=6 -> (10 + 2)/6 = 2.
  const V preds{1.5 * 2.5, 1.5 * 2.2, 1.5 * 2.0};
  const Envelope env = Envelope::fn2();
  const auto got = predict_dataset(AnyModel(model), ds, &env);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(got[k], preds[k], 1e-12);
  const auto r = evaluate_clip_level(AnyModel(model), ds, &env);
  const double e0 = preds[0] - 3.0, e1 = preds[1] - 2.0, e2 = preds[2] - 2.5;
  EXPECT_NEAR(r.mse, (e0 * e0 + e1 * e1 + e2 * e2) / 3.0, 1e-12);
  // Predictions 3.75, 3.3, 3.0 against 3, 2, 2.5.
  const double mp = (3.75 + 3.3 + 3.0) / 3, mt = 2.5;
  double sxy = 0, sxx = 0, syy = 0;
  for (int k = 0; k < 3; ++k) {
    sxy += (preds[k] - mp) * (labels[k] - mt);
    sxx += (preds[k] - mp) * (preds[k] - mp);
    syy += (labels[k] - mt) * (labels[k] - mt);
  }
  EXPECT_NEAR(*r.pcc, sxy / std::sqrt(sxx * syy), 1e-12);
}

TEST(Evaluate, ConstantEnvelopeEqualsMeanOfSegmentOutputs) {
  Rng rng(23);
  auto model = FfnnModel::zeros(3, 4);
  model.w_ih = fixture::random_matrix(rng, 3, 4);
  model.w_ho = fixture::random_matrix(rng, 4, 1);
  Dataset ds;
  ds.feature_dim = 3;
  for (int k = 0; k < 5; ++k) {
    Clip c;
    c.id = std::to_string(k);
    c.label = k;
    for (std::size_t i = 1; i <= 6; ++i) c.segments.push_back({fixture::random_vector(rng, 3), i});
    ds.clips.push_back(c);
  }
  const Envelope env = Envelope::constant();
  const auto preds = predict_dataset(AnyModel(model), ds, &env);
  for (std::size_t k = 0; k < ds.size(); ++k) {
    double s = 0.0;
    for (const auto& seg : ds.clips[k].segments) s += ffnn_forward(model, seg.features).output;
    EXPECT_NEAR(preds[k], s / 6.0, 1e-14);
  }
}

TEST(Evaluate, FeedForwardNeedsEnvelope) {
  const auto ds = copy_task({1.0, 2.0});
  EXPECT_THROW(evaluate_clip_level(AnyModel(FfnnModel::zeros(1, 2)), ds, nullptr),
               ContractError);
}

TEST(Evaluate, DimensionMismatchThrows) {
  const auto ds = copy_task({1.0, 2.0});
  EXPECT_THROW(evaluate_clip_level(AnyModel(RnnModel::zeros(3, 2)), ds, nullptr),
               ContractError);
}

TEST(Report, CsvRowFormat) {
  EvalReport r{"kffnn-fn1", 200, 3, 0.25, 0.5, 100, false};
  EXPECT_EQ(to_csv_row(r), "kffnn-fn1,200,3,0.25,0.5,100");
  r.pcc.reset();
  EXPECT_EQ(to_csv_row(r), "kffnn-fn1,200,3,0.25,NA,100");
  r.failed = true;
  EXPECT_EQ(to_csv_row(r), "kffnn-fn1,200,3,diverged,diverged,100");
  EXPECT_STREQ(kReportCsvHeader, "system,train_size,seed,mse,pcc,n_test");
}
