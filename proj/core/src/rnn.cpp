#include "kffnn/rnn.hpp"

#include <cmath>
#include <string>

#include "kffnn/error.hpp"
#include "training_detail.hpp"

namespace kffnn {

namespace {

struct Workspace {
  std::vector<Vector> hidden;  // hidden[t] = h^{t+1}
  Vector dh;
  Vector dz;
  RnnGradients grads;

  explicit Workspace(const RnnModel& m)
      : dh(m.hidden_dim()),
        dz(m.hidden_dim()),
        grads{Matrix(m.input_dim(), m.hidden_dim()), Matrix(m.hidden_dim(), m.hidden_dim()),
              Matrix(m.hidden_dim(), 1)} {}

  void reserve_steps(std::size_t steps, std::size_t hidden_dim) {
    while (hidden.size() < steps) hidden.emplace_back(hidden_dim);
  }
};

void check_sequence(const RnnModel& model, std::span<const Vector> seq) {
  require(!seq.empty(), "rnn: empty sequence");
  for (const auto& g : seq)
    if (g.size() != model.input_dim())
      throw ContractError("rnn: step feature length " + std::to_string(g.size()) +
                          " does not match input dimension " + std::to_string(model.input_dim()));
}

double forward_into(const RnnModel& model, std::span<const Vector> seq, Workspace& ws) {
  const std::size_t hidden = model.hidden_dim();
  ws.reserve_steps(seq.size(), hidden);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    Vector& h = ws.hidden[t];
    std::fill(h.begin(), h.end(), 0.0);
    accumulate_matvec_transposed(model.w_ih, seq[t], h);
    if (t > 0) accumulate_matvec_transposed(model.w_hh, ws.hidden[t - 1], h);
    for (double& x : h) x = sigmoid(x, model.lambda);
  }
  const Vector& last = ws.hidden[seq.size() - 1];
  double s = 0.0;
  for (std::size_t k = 0; k < hidden; ++k) s += last[k] * model.w_ho(k, 0);
  return model.output == OutputActivation::Linear ? s : sigmoid(s, model.lambda);
}

double bptt_into(const RnnModel& model, std::span<const Vector> seq, double target,
                 Workspace& ws) {
  const double o = forward_into(model, seq, ws);
  const double act_slope =
      model.output == OutputActivation::Linear ? 1.0 : model.lambda * o * (1.0 - o);
  const double out_delta = 2.0 * (o - target) * act_slope;

  const std::size_t hidden = model.hidden_dim();
  const std::size_t steps = seq.size();
  const Vector& last = ws.hidden[steps - 1];
  for (std::size_t k = 0; k < hidden; ++k) {
    ws.grads.w_ho(k, 0) = out_delta * last[k];
    ws.dh[k] = out_delta * model.w_ho(k, 0);
  }
  ws.grads.w_ih.fill(0.0);
  ws.grads.w_hh.fill(0.0);

  for (std::size_t t = steps; t-- > 0;) {
    const Vector& h = ws.hidden[t];
    for (std::size_t k = 0; k < hidden; ++k)
      ws.dz[k] = ws.dh[k] * model.lambda * h[k] * (1.0 - h[k]);
    add_outer(ws.grads.w_ih, seq[t], ws.dz);
    if (t == 0) break;
    // h^0 = 0 contributes nothing to w_hh, so the recurrent sum starts at t = 2.
    add_outer(ws.grads.w_hh, ws.hidden[t - 1], ws.dz);
    for (std::size_t j = 0; j < hidden; ++j) ws.dh[j] = dot(model.w_hh.row(j), ws.dz);
  }
  return ffnn_loss(o, target);
}

void check_samples(const RnnModel& model, std::span<const SequenceSample> samples) {
  require(!samples.empty(), "rnn_train: dataset is empty");
  for (const auto& s : samples) {
    check_sequence(model, s.steps);
    require(std::isfinite(s.target), "rnn_train: non-finite target");
  }
}

RnnModel train_impl(RnnModel model, std::span<const SequenceSample> samples,
                    const TrainConfig& cfg, Rng& rng, std::vector<double>* epoch_loss) {
  check_samples(model, samples);
  Workspace ws(model);
  auto order = detail::identity_order(samples.size());
  if (epoch_loss) epoch_loss->clear();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) detail::shuffle_order(order, rng);
    for (std::size_t idx : order) {
      const auto& s = samples[idx];
      const double loss = bptt_into(model, s.steps, s.target, ws);
      if (!std::isfinite(loss)) detail::diverged("rnn", epoch, idx);
      if (cfg.grad_clip)
        detail::clip_global_norm({&ws.grads.w_ih, &ws.grads.w_hh, &ws.grads.w_ho},
                                 *cfg.grad_clip);
      axpy(-cfg.eta, ws.grads.w_ho, model.w_ho);
      axpy(-cfg.eta, ws.grads.w_ih, model.w_ih);
      axpy(-cfg.eta, ws.grads.w_hh, model.w_hh);
    }
    if (!model.w_ih.all_finite() || !model.w_hh.all_finite() || !model.w_ho.all_finite())
      detail::diverged("rnn", epoch, samples.size());
    if (epoch_loss) epoch_loss->push_back(rnn_mean_loss(model, samples));
  }
  return model;
}

}  // namespace

void RnnModel::validate() const {
  require(w_ih.rows() >= 1 && w_ih.cols() >= 1, "rnn: input and hidden sizes must be >= 1");
  require(w_hh.rows() == w_ih.cols() && w_hh.cols() == w_ih.cols(), "rnn: w_hh must be H x H");
  require(w_ho.rows() == w_ih.cols() && w_ho.cols() == 1, "rnn: w_ho must be H x 1");
  require(lambda > 0.0, "rnn: lambda must be positive");
  require(w_ih.all_finite() && w_hh.all_finite() && w_ho.all_finite(),
          "rnn: weights must be finite");
}

RnnModel RnnModel::zeros(std::size_t input_dim, std::size_t hidden, double lambda,
                         OutputActivation output) {
  RnnModel m{Matrix(input_dim, hidden), Matrix(hidden, hidden), Matrix(hidden, 1), lambda,
             output};
  m.validate();
  return m;
}

RnnModel RnnModel::random(std::size_t input_dim, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  auto m = zeros(input_dim, cfg.hidden, cfg.lambda, cfg.output);
  detail::fill_uniform(m.w_ih, detail::init_bound(cfg.init_range, input_dim), rng);
  detail::fill_uniform(m.w_ho, detail::init_bound(cfg.init_range, cfg.hidden), rng);
  detail::fill_uniform(m.w_hh, detail::init_bound(cfg.init_range, cfg.hidden), rng);
  return m;
}

FfnnModel RnnModel::feedforward_part() const { return FfnnModel{w_ih, w_ho, lambda, output}; }

RnnTrace rnn_forward(const RnnModel& model, std::span<const Vector> sequence) {
  check_sequence(model, sequence);
  Workspace ws(model);
  RnnTrace trace;
  trace.output = forward_into(model, sequence, ws);
  ws.hidden.resize(sequence.size());
  trace.hidden_states = std::move(ws.hidden);
  trace.inputs.assign(sequence.begin(), sequence.end());
  return trace;
}

RnnGradients rnn_bptt(const RnnModel& model, std::span<const Vector> sequence, double target) {
  check_sequence(model, sequence);
  Workspace ws(model);
  bptt_into(model, sequence, target, ws);
  return std::move(ws.grads);
}

double rnn_mean_loss(const RnnModel& model, std::span<const SequenceSample> samples) {
  require(!samples.empty(), "rnn_mean_loss: no samples");
  Workspace ws(model);
  double total = 0.0;
  for (const auto& s : samples) {
    check_sequence(model, s.steps);
    total += ffnn_loss(forward_into(model, s.steps, ws), s.target);
  }
  return total / static_cast<double>(samples.size());
}

RnnModel rnn_train(std::span<const SequenceSample> samples, const TrainConfig& cfg,
                   std::vector<double>* epoch_loss) {
  cfg.validate();
  require(!samples.empty() && !samples.front().steps.empty(), "rnn_train: dataset is empty");
  Rng rng(cfg.seed);
  auto model = RnnModel::random(samples.front().steps.front().size(), cfg, rng);
  return train_impl(std::move(model), samples, cfg, rng, epoch_loss);
}

RnnModel rnn_train(RnnModel initial, std::span<const SequenceSample> samples,
                   const TrainConfig& cfg, std::vector<double>* epoch_loss) {
  cfg.validate();
  initial.validate();
  Rng rng(cfg.seed);
  return train_impl(std::move(initial), samples, cfg, rng, epoch_loss);
}

}  // namespace kffnn
