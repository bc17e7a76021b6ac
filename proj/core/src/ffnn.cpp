#include "kffnn/ffnn.hpp"

#include <cmath>
#include <string>

#include "kffnn/error.hpp"
#include "training_detail.hpp"

namespace kffnn {

namespace {

struct Workspace {
  Vector hidden;
  Vector hidden_delta;
  FfnnGradients grads;

  explicit Workspace(const FfnnModel& m)
      : hidden(m.hidden_dim()),
        hidden_delta(m.hidden_dim()),
        grads{Matrix(m.input_dim(), m.hidden_dim()), Matrix(m.hidden_dim(), 1)} {}
};

void check_input(const FfnnModel& model, std::span<const double> features) {
  if (features.size() != model.input_dim())
    throw ContractError("ffnn: feature length " + std::to_string(features.size()) +
                        " does not match input dimension " + std::to_string(model.input_dim()));
}

double forward_into(const FfnnModel& model, std::span<const double> g, Vector& hidden) {
  std::fill(hidden.begin(), hidden.end(), 0.0);
  accumulate_matvec_transposed(model.w_ih, g, hidden);
  double s = 0.0;
  for (std::size_t k = 0; k < hidden.size(); ++k) {
    hidden[k] = sigmoid(hidden[k], model.lambda);
    s += hidden[k] * model.w_ho(k, 0);
  }
  return model.output == OutputActivation::Linear ? s : sigmoid(s, model.lambda);
}

// Forward pass plus output and hidden deltas; fills ws.grads.w_ho and
// ws.hidden_delta and returns the loss. The input-to-hidden gradient is the
// outer product features x hidden_delta.
double deltas_into(const FfnnModel& model, std::span<const double> g, double target,
                   Workspace& ws) {
  const double o = forward_into(model, g, ws.hidden);
  const double act_slope =
      model.output == OutputActivation::Linear ? 1.0 : model.lambda * o * (1.0 - o);
  const double out_delta = 2.0 * (o - target) * act_slope;

  const std::size_t hidden = model.hidden_dim();
  for (std::size_t k = 0; k < hidden; ++k) {
    const double h = ws.hidden[k];
    ws.grads.w_ho(k, 0) = out_delta * h;
    ws.hidden_delta[k] = out_delta * model.w_ho(k, 0) * model.lambda * h * (1.0 - h);
  }
  return ffnn_loss(o, target);
}

// Scales the deltas so the full gradient has global norm at most cap.
void clip_deltas(std::span<const double> g, Workspace& ws, double cap) {
  double ho = 0.0, dz = 0.0, gg = 0.0;
  for (double x : ws.grads.w_ho.data()) ho += x * x;
  for (double x : ws.hidden_delta) dz += x * x;
  for (double x : g) gg += x * x;
  const double norm = std::sqrt(ho + gg * dz);
  if (!(norm > cap)) return;
  const double scale = cap / norm;
  for (double& x : ws.grads.w_ho.data()) x *= scale;
  for (double& x : ws.hidden_delta) x *= scale;
}

FfnnModel train_impl(FfnnModel model, std::span<const Sample> samples, const TrainConfig& cfg,
                     Rng& rng, std::vector<double>* epoch_loss) {
  Workspace ws(model);
  auto order = detail::identity_order(samples.size());
  if (epoch_loss) epoch_loss->clear();
  const double step = -cfg.eta;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) detail::shuffle_order(order, rng);
    for (std::size_t idx : order) {
      const Sample& s = samples[idx];
      const double loss = deltas_into(model, s.features, s.target, ws);
      if (!std::isfinite(loss)) detail::diverged("ffnn", epoch, idx);
      if (cfg.grad_clip) clip_deltas(s.features, ws, *cfg.grad_clip);
      // w_ih += -eta * (g_j * delta_k), the same arithmetic as applying the
      // materialised ffnn_backward gradient.
      for (std::size_t j = 0; j < s.features.size(); ++j) {
        const double gj = s.features[j];
        if (gj == 0.0) continue;
        auto row = model.w_ih.row(j);
        for (std::size_t k = 0; k < row.size(); ++k) row[k] += step * (gj * ws.hidden_delta[k]);
      }
      axpy(step, ws.grads.w_ho, model.w_ho);
    }
    if (!model.w_ih.all_finite() || !model.w_ho.all_finite())
      detail::diverged("ffnn", epoch, samples.size());
    if (epoch_loss) epoch_loss->push_back(ffnn_mean_loss(model, samples));
  }
  return model;
}

void check_samples(std::span<const Sample> samples, std::size_t dim) {
  require(!samples.empty(), "ffnn_train: dataset is empty");
  for (const auto& s : samples) {
    require(s.features.size() == dim, "ffnn_train: non-uniform feature dimension");
    require(std::isfinite(s.target), "ffnn_train: non-finite target");
  }
}

}  // namespace

void FfnnModel::validate() const {
  require(w_ih.rows() >= 1 && w_ih.cols() >= 1, "ffnn: input and hidden sizes must be >= 1");
  require(w_ho.rows() == w_ih.cols() && w_ho.cols() == 1, "ffnn: w_ho must be H x 1");
  require(lambda > 0.0, "ffnn: lambda must be positive");
  require(w_ih.all_finite() && w_ho.all_finite(), "ffnn: weights must be finite");
}

FfnnModel FfnnModel::zeros(std::size_t input_dim, std::size_t hidden, double lambda,
                           OutputActivation output) {
  FfnnModel m{Matrix(input_dim, hidden), Matrix(hidden, 1), lambda, output};
  m.validate();
  return m;
}

FfnnModel FfnnModel::random(std::size_t input_dim, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  auto m = zeros(input_dim, cfg.hidden, cfg.lambda, cfg.output);
  detail::fill_uniform(m.w_ih, detail::init_bound(cfg.init_range, input_dim), rng);
  detail::fill_uniform(m.w_ho, detail::init_bound(cfg.init_range, cfg.hidden), rng);
  return m;
}

FfnnForward ffnn_forward(const FfnnModel& model, std::span<const double> features) {
  check_input(model, features);
  FfnnForward out{Vector(model.hidden_dim()), 0.0};
  out.output = forward_into(model, features, out.hidden);
  return out;
}

double ffnn_loss(double output, double target) noexcept {
  const double e = output - target;
  return e * e;
}

FfnnGradients ffnn_backward(const FfnnModel& model, std::span<const double> features,
                            double target) {
  check_input(model, features);
  Workspace ws(model);
  deltas_into(model, features, target, ws);
  ws.grads.w_ih.fill(0.0);
  add_outer(ws.grads.w_ih, features, ws.hidden_delta);
  return std::move(ws.grads);
}

double ffnn_mean_loss(const FfnnModel& model, std::span<const Sample> samples) {
  require(!samples.empty(), "ffnn_mean_loss: no samples");
  Vector hidden(model.hidden_dim());
  double total = 0.0;
  for (const auto& s : samples) {
    check_input(model, s.features);
    total += ffnn_loss(forward_into(model, s.features, hidden), s.target);
  }
  return total / static_cast<double>(samples.size());
}

FfnnModel ffnn_train(std::span<const Sample> samples, const TrainConfig& cfg,
                     std::vector<double>* epoch_loss) {
  cfg.validate();
  require(!samples.empty(), "ffnn_train: dataset is empty");
  check_samples(samples, samples.front().features.size());
  Rng rng(cfg.seed);
  auto model = FfnnModel::random(samples.front().features.size(), cfg, rng);
  return train_impl(std::move(model), samples, cfg, rng, epoch_loss);
}

FfnnModel ffnn_train(FfnnModel initial, std::span<const Sample> samples, const TrainConfig& cfg,
                     std::vector<double>* epoch_loss) {
  cfg.validate();
  initial.validate();
  check_samples(samples, initial.input_dim());
  Rng rng(cfg.seed);
  return train_impl(std::move(initial), samples, cfg, rng, epoch_loss);
}

}  // namespace kffnn
