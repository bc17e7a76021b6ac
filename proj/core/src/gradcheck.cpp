#include "kffnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "kffnn/error.hpp"
#include "kffnn/rng.hpp"

namespace kffnn::gradcheck {

std::vector<Matrix> fd_gradient(std::span<const ParamRef> params, const LossFn& loss,
                                double step) {
  require(step > 0.0, "fd_gradient: step must be positive");
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (const auto& p : params) {
    Matrix& w = *p.matrix;
    Matrix g(w.rows(), w.cols());
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        const double original = w(r, c);
        w(r, c) = original + step;
        const double plus = loss();
        w(r, c) = original - step;
        const double minus = loss();
        w(r, c) = original;
        if (!std::isfinite(plus) || !std::isfinite(minus))
          throw std::runtime_error("fd_gradient: non-finite loss when perturbing " + p.name +
                                   "(" + std::to_string(r) + "," + std::to_string(c) + ")");
        g(r, c) = (plus - minus) / (2.0 * step);
      }
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

void GradReport::merge(const GradReport& other) {
  max_rel_err = std::max(max_rel_err, other.max_rel_err);
  max_abs_err = std::max(max_abs_err, other.max_abs_err);
  if (other.worst_score > worst_score || checked == 0) {
    worst_score = other.worst_score;
    worst_weight = other.worst_weight;
  }
  checked += other.checked;
  failures += other.failures;
  trials += other.trials;
  passed = passed && other.passed;
}

GradReport compare(std::span<const ParamRef> params, std::span<const Matrix* const> analytic,
                   std::span<const Matrix> numeric, const Tolerance& tol) {
  require(params.size() == analytic.size() && params.size() == numeric.size(),
          "gradcheck: gradient lists do not match the parameter list");
  GradReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Matrix& a = *analytic[p];
    const Matrix& n = numeric[p];
    require(a.rows() == n.rows() && a.cols() == n.cols(),
            "gradcheck: shape mismatch for " + params[p].name);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (std::size_t c = 0; c < a.cols(); ++c) {
        const double abs_err = std::abs(a(r, c) - n(r, c));
        const double scale = std::max(std::abs(a(r, c)), std::abs(n(r, c)));
        const double rel_err = scale > 0.0 ? abs_err / scale : 0.0;
        const double score = std::min(rel_err / tol.rel, abs_err / tol.abs);
        report.max_abs_err = std::max(report.max_abs_err, abs_err);
        report.max_rel_err = std::max(report.max_rel_err, rel_err);
        if (report.checked == 0 || score > report.worst_score) {
          report.worst_score = score;
          report.worst_weight = {params[p].name, r, c};
        }
        ++report.checked;
        if (!(rel_err <= tol.rel || abs_err <= tol.abs)) {
          ++report.failures;
          report.passed = false;
        }
      }
    }
  }
  return report;
}

std::string_view to_string(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::Ffnn: return "ffnn";
    case ModelKind::Rnn: return "rnn";
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Blstm: return "blstm";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "ffnn") return ModelKind::Ffnn;
  if (name == "rnn") return ModelKind::Rnn;
  if (name == "lstm") return ModelKind::Lstm;
  if (name == "blstm") return ModelKind::Blstm;
  throw ContractError("unknown model kind '" + std::string(name) +
                      "' (expected ffnn, rnn, lstm or blstm)");
}

namespace {

Vector random_vector(std::size_t n, Rng& rng) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

std::vector<Vector> random_sequence(std::size_t steps, std::size_t dim, Rng& rng) {
  std::vector<Vector> seq;
  for (std::size_t t = 0; t < steps; ++t) seq.push_back(random_vector(dim, rng));
  return seq;
}

TrainConfig instance_config(std::size_t hidden, std::size_t trial, double init_range, Rng& rng) {
  TrainConfig cfg;
  cfg.hidden = hidden;
  cfg.init_range = init_range;
  cfg.lambda = rng.uniform(0.5, 1.5);
  cfg.output = (trial / 2) % 2 == 0 ? OutputActivation::Linear : OutputActivation::Sigmoid;
  return cfg;
}

template <typename Model, typename Grads>
GradReport finish_trial(Model& model, const Grads& analytic, const LossFn& loss,
                        const CheckOptions& options) {
  const auto params = parameters(model);
  const auto numeric = fd_gradient(params, loss, options.step);
  std::vector<Matrix> grads;
  for (const Matrix* g : gradient_list(analytic)) grads.push_back(*g);
  if (options.tamper) options.tamper(grads);
  std::vector<const Matrix*> ptrs;
  for (const auto& g : grads) ptrs.push_back(&g);
  auto report = compare(params, ptrs, numeric, options.tolerance);
  report.trials = 1;
  return report;
}

GradReport ffnn_trial(std::size_t trial, Rng& rng, const CheckOptions& options) {
  const bool large = trial % 2 == 0;
  const std::size_t dim = large ? 21 : 4;
  auto cfg = instance_config(large ? 21 : 2, trial, 1.0, rng);
  auto model = FfnnModel::random(dim, cfg, rng);
  const auto g = random_vector(dim, rng);
  const double target = rng.uniform(0.0, 2.0);
  const auto analytic = ffnn_backward(model, g, target);
  LossFn loss = [&] { return ffnn_loss(ffnn_forward(model, g).output, target); };
  return finish_trial(model, analytic, loss, options);
}

GradReport rnn_trial(std::size_t trial, Rng& rng, const CheckOptions& options) {
  const bool large = trial % 2 == 0;
  const std::size_t dim = large ? 21 : 4;
  auto cfg = instance_config(large ? 21 : 2, trial, 0.5, rng);
  auto model = RnnModel::random(dim, cfg, rng);
  const std::size_t steps = 1 + static_cast<std::size_t>(rng.below(12));
  const auto seq = random_sequence(steps, dim, rng);
  const double target = rng.uniform(0.0, 2.0);
  const auto analytic = rnn_bptt(model, seq, target);
  LossFn loss = [&] { return ffnn_loss(rnn_forward(model, seq).output, target); };
  return finish_trial(model, analytic, loss, options);
}

GradReport lstm_trial(std::size_t trial, Rng& rng, const CheckOptions& options,
                      Direction direction) {
  const bool large = trial % 2 == 0;
  const std::size_t dim = large ? 6 : 4;
  auto cfg = instance_config(large ? 4 : 2, trial, 0.8, rng);
  auto model = LstmModel::random(dim, cfg, direction, rng);
  // Nonzero biases so the bias paths are exercised.
  for (auto& p : parameters(model))
    if (p.name.find(".b.") != std::string::npos)
      for (double& b : p.matrix->data()) b = rng.uniform(-0.5, 0.5);
  const std::size_t steps = 1 + static_cast<std::size_t>(rng.below(12));
  const auto seq = random_sequence(steps, dim, rng);
  const double target = rng.uniform(0.0, 2.0);
  const auto analytic = lstm_backward(model, seq, target);
  LossFn loss = [&] { return ffnn_loss(lstm_forward(model, seq).output, target); };
  return finish_trial(model, analytic, loss, options);
}

}  // namespace

GradReport check(ModelKind kind, std::size_t trials, std::uint64_t seed,
                 const CheckOptions& options) {
  require(trials >= 1, "gradcheck: trials must be at least 1");
  Rng rng(seed);
  GradReport total;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    GradReport r;
    switch (kind) {
      case ModelKind::Ffnn: r = ffnn_trial(trial, rng, options); break;
      case ModelKind::Rnn: r = rnn_trial(trial, rng, options); break;
      case ModelKind::Lstm: r = lstm_trial(trial, rng, options, Direction::Forward); break;
      case ModelKind::Blstm: r = lstm_trial(trial, rng, options, Direction::Bidirectional); break;
    }
    total.merge(r);
  }
  return total;
}

double unrolled_loss(const RnnModel& model, std::span<const Vector> sequence, double target) {
  const std::size_t d = model.w_ih.rows();
  const std::size_t hidden = model.w_ih.cols();
  // Tied weights: every unrolled layer maps [x_t; h_{t-1}] through the same
  // (d + H) x H matrix.
  Matrix stacked(d + hidden, hidden);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < hidden; ++k) stacked(j, k) = model.w_ih(j, k);
  for (std::size_t j = 0; j < hidden; ++j)
    for (std::size_t k = 0; k < hidden; ++k) stacked(d + j, k) = model.w_hh(j, k);

  std::vector<const Matrix*> layers(sequence.size(), &stacked);
  Vector state(hidden, 0.0);
  Vector layer_input(d + hidden);
  for (std::size_t t = 0; t < layers.size(); ++t) {
    require(sequence[t].size() == d, "unrolled_loss: step dimension mismatch");
    std::copy(sequence[t].begin(), sequence[t].end(), layer_input.begin());
    std::copy(state.begin(), state.end(), layer_input.begin() + static_cast<std::ptrdiff_t>(d));
    const Matrix& w = *layers[t];
    for (std::size_t k = 0; k < hidden; ++k) {
      double pre = 0.0;
      for (std::size_t j = 0; j < d + hidden; ++j) pre += layer_input[j] * w(j, k);
      state[k] = 1.0 / (1.0 + std::exp(-model.lambda * pre));
    }
  }
  double z = 0.0;
  for (std::size_t k = 0; k < hidden; ++k) z += state[k] * model.w_ho(k, 0);
  const double o =
      model.output == OutputActivation::Linear ? z : 1.0 / (1.0 + std::exp(-model.lambda * z));
  return (o - target) * (o - target);
}

std::vector<Matrix> unrolled_fd_gradient(const RnnModel& model, std::span<const Vector> sequence,
                                         double target, double step) {
  RnnModel copy = model;
  const auto params = parameters(copy);
  return fd_gradient(params, [&] { return unrolled_loss(copy, sequence, target); }, step);
}

std::string format_report(ModelKind kind, const GradReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "gradcheck %s: %s\n"
                "  trials          %zu\n"
                "  partials        %zu (%zu failing)\n"
                "  max rel error   %.3e\n"
                "  max abs error   %.3e\n"
                "  worst weight    %s(%zu,%zu) score %.3g\n",
                std::string(to_string(kind)).c_str(), r.passed ? "PASS" : "FAIL", r.trials,
                r.checked, r.failures, r.max_rel_err, r.max_abs_err,
                r.worst_weight.matrix.c_str(), r.worst_weight.row, r.worst_weight.col,
                r.worst_score);
  return buf;
}

}  // namespace kffnn::gradcheck
