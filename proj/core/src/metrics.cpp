#include "kffnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "kffnn/error.hpp"
#include "kffnn/knowledge.hpp"

namespace kffnn {

namespace {

bool constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

std::string real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> truth) {
  require(pred.size() == truth.size(), "mse: length mismatch");
  require(!pred.empty(), "mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    s += e * e;
  }
  return s / static_cast<double>(pred.size());
}

std::optional<double> pcc(std::span<const double> pred, std::span<const double> truth) {
  require(pred.size() == truth.size(), "pcc: length mismatch");
  require(pred.size() >= 2, "pcc: need at least two points");
  if (constant(pred) || constant(truth)) return std::nullopt;
  const double mp = mean_of(pred);
  const double mt = mean_of(truth);
  double cov = 0.0, vp = 0.0, vt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double a = pred[i] - mp;
    const double b = truth[i] - mt;
    cov += a * b;
    vp += a * a;
    vt += b * b;
  }
  if (vp == 0.0 || vt == 0.0) return std::nullopt;
  return std::clamp(cov / std::sqrt(vp * vt), -1.0, 1.0);
}

double predict_clip(const AnyModel& model, const Clip& clip, const Envelope* env,
                    double epsilon) {
  require(!clip.segments.empty(), "predict: clip '" + clip.id + "' has no segments");
  if (const auto* ffnn = std::get_if<FfnnModel>(&model)) {
    require(env != nullptr, "predict: feed-forward models need an envelope to reconstruct clips");
    std::vector<double> outputs;
    outputs.reserve(clip.segments.size());
    for (const auto& seg : clip.segments) outputs.push_back(ffnn_forward(*ffnn, seg.features).output);
    return reconstruct_clip(outputs, *env, epsilon);
  }
  const auto seq = clip.sequence();
  if (const auto* rnn = std::get_if<RnnModel>(&model)) return rnn_forward(*rnn, seq).output;
  return lstm_forward(std::get<LstmModel>(model), seq).output;
}

std::vector<double> predict_dataset(const AnyModel& model, const Dataset& ds, const Envelope* env,
                                    double epsilon) {
  require(ds.feature_dim == model_input_dim(model),
          "predict: dataset has " + std::to_string(ds.feature_dim) +
              " features but the model expects " + std::to_string(model_input_dim(model)));
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& clip : ds.clips) out.push_back(predict_clip(model, clip, env, epsilon));
  return out;
}

EvalReport evaluate_clip_level(const AnyModel& model, const Dataset& test, const Envelope* env,
                               double epsilon) {
  require(!test.empty(), "evaluate: empty test set");
  const auto pred = predict_dataset(model, test, env, epsilon);
  std::vector<double> truth;
  truth.reserve(test.size());
  for (const auto& clip : test.clips) truth.push_back(clip.label);

  EvalReport r;
  r.system = std::string(model_kind_name(model));
  r.n_test = test.size();
  r.mse = mse(pred, truth);
  if (pred.size() >= 2) r.pcc = pcc(pred, truth);
  return r;
}

std::string to_csv_row(const EvalReport& r) {
  std::string row = r.system + ',' + std::to_string(r.train_size) + ',' + std::to_string(r.seed) + ',';
  if (r.failed) {
    row += "diverged,diverged";
  } else {
    row += real(r.mse);
    row += ',';
    row += r.pcc ? real(*r.pcc) : std::string("NA");
  }
  row += ',' + std::to_string(r.n_test);
  return row;
}

}  // namespace kffnn
