#include "kffnn/lstm.hpp"

#include <cmath>
#include <string>

#include "kffnn/error.hpp"
#include "training_detail.hpp"

namespace kffnn {

namespace {

constexpr std::size_t kI = static_cast<std::size_t>(Gate::Input);
constexpr std::size_t kF = static_cast<std::size_t>(Gate::Forget);
constexpr std::size_t kO = static_cast<std::size_t>(Gate::Output);
constexpr std::size_t kG = static_cast<std::size_t>(Gate::Candidate);

// Per-step activations of one cell over one pass.
struct CellTrace {
  std::vector<const Vector*> inputs;
  std::vector<std::array<Vector, kGateCount>> gates;
  std::vector<Vector> cell;
  std::vector<Vector> cell_tanh;
  std::vector<Vector> hidden;

  const Vector& last_hidden() const { return hidden.back(); }
};

CellTrace run_cell(const LstmCell& cell, std::span<const Vector> seq, bool reversed) {
  const std::size_t hidden = cell.hidden_dim();
  const std::size_t steps = seq.size();
  CellTrace tr;
  tr.inputs.reserve(steps);
  tr.gates.resize(steps);
  tr.cell.assign(steps, Vector(hidden));
  tr.cell_tanh.assign(steps, Vector(hidden));
  tr.hidden.assign(steps, Vector(hidden));

  for (std::size_t t = 0; t < steps; ++t) {
    const Vector& x = reversed ? seq[steps - 1 - t] : seq[t];
    tr.inputs.push_back(&x);
    auto& gate = tr.gates[t];
    for (std::size_t q = 0; q < kGateCount; ++q) {
      gate[q].assign(cell.bias[q].data().begin(), cell.bias[q].data().end());
      accumulate_matvec_transposed(cell.wx[q], x, gate[q]);
      if (t > 0) accumulate_matvec_transposed(cell.wh[q], tr.hidden[t - 1], gate[q]);
    }
    for (std::size_t k = 0; k < hidden; ++k) {
      gate[kI][k] = sigmoid(gate[kI][k]);
      gate[kF][k] = sigmoid(gate[kF][k]);
      gate[kO][k] = sigmoid(gate[kO][k]);
      gate[kG][k] = std::tanh(gate[kG][k]);
      const double prev_c = t > 0 ? tr.cell[t - 1][k] : 0.0;
      tr.cell[t][k] = gate[kF][k] * prev_c + gate[kI][k] * gate[kG][k];
      tr.cell_tanh[t][k] = std::tanh(tr.cell[t][k]);
      tr.hidden[t][k] = gate[kO][k] * tr.cell_tanh[t][k];
    }
  }
  return tr;
}

// Backpropagates dLoss/dh at the final step of the pass into grads.
void backprop_cell(const LstmCell& cell, const CellTrace& tr, Vector dh, LstmCell& grads) {
  const std::size_t hidden = cell.hidden_dim();
  Vector dc(hidden, 0.0);
  std::array<Vector, kGateCount> da;
  for (auto& v : da) v.assign(hidden, 0.0);

  for (std::size_t t = tr.hidden.size(); t-- > 0;) {
    const auto& gate = tr.gates[t];
    for (std::size_t k = 0; k < hidden; ++k) {
      const double i = gate[kI][k], f = gate[kF][k], o = gate[kO][k], g = gate[kG][k];
      const double tc = tr.cell_tanh[t][k];
      const double prev_c = t > 0 ? tr.cell[t - 1][k] : 0.0;
      dc[k] += dh[k] * o * (1.0 - tc * tc);
      da[kO][k] = dh[k] * tc * o * (1.0 - o);
      da[kI][k] = dc[k] * g * i * (1.0 - i);
      da[kF][k] = dc[k] * prev_c * f * (1.0 - f);
      da[kG][k] = dc[k] * i * (1.0 - g * g);
      dc[k] *= f;
    }
    for (std::size_t q = 0; q < kGateCount; ++q) {
      add_outer(grads.wx[q], *tr.inputs[t], da[q]);
      auto bias = grads.bias[q].data();
      for (std::size_t k = 0; k < hidden; ++k) bias[k] += da[q][k];
      if (t > 0) add_outer(grads.wh[q], tr.hidden[t - 1], da[q]);
    }
    if (t == 0) break;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t q = 0; q < kGateCount; ++q) {
      const Matrix& wh = cell.wh[q];
      for (std::size_t j = 0; j < hidden; ++j) dh[j] += dot(wh.row(j), da[q]);
    }
  }
}

void check_sequence(const LstmModel& model, std::span<const Vector> seq) {
  require(!seq.empty(), "lstm: empty sequence");
  for (const auto& g : seq)
    if (g.size() != model.input_dim())
      throw ContractError("lstm: step feature length " + std::to_string(g.size()) +
                          " does not match input dimension " + std::to_string(model.input_dim()));
}

struct Pass {
  CellTrace forward;
  std::optional<CellTrace> backward;
  double output = 0.0;
};

Pass run(const LstmModel& model, std::span<const Vector> seq) {
  Pass p{run_cell(model.forward, seq, false), std::nullopt, 0.0};
  const std::size_t hidden = model.hidden_dim();
  double s = 0.0;
  for (std::size_t k = 0; k < hidden; ++k) s += p.forward.last_hidden()[k] * model.w_ho(k, 0);
  if (model.backward) {
    p.backward = run_cell(*model.backward, seq, true);
    for (std::size_t k = 0; k < hidden; ++k)
      s += p.backward->last_hidden()[k] * model.w_ho(hidden + k, 0);
  }
  p.output = model.output == OutputActivation::Linear ? s : sigmoid(s, model.lambda);
  return p;
}

LstmGradients zero_gradients(const LstmModel& m) {
  LstmGradients g{LstmCell::zeros(m.input_dim(), m.hidden_dim()), std::nullopt,
                  Matrix(m.w_ho.rows(), 1)};
  if (m.backward) g.backward = LstmCell::zeros(m.input_dim(), m.hidden_dim());
  return g;
}

double backward_into(const LstmModel& model, std::span<const Vector> seq, double target,
                     LstmGradients& grads) {
  const Pass p = run(model, seq);
  const double o = p.output;
  const double act_slope =
      model.output == OutputActivation::Linear ? 1.0 : model.lambda * o * (1.0 - o);
  const double out_delta = 2.0 * (o - target) * act_slope;
  const std::size_t hidden = model.hidden_dim();

  Vector dh(hidden);
  for (std::size_t k = 0; k < hidden; ++k) {
    grads.w_ho(k, 0) = out_delta * p.forward.last_hidden()[k];
    dh[k] = out_delta * model.w_ho(k, 0);
  }
  backprop_cell(model.forward, p.forward, dh, grads.forward);
  if (model.backward) {
    for (std::size_t k = 0; k < hidden; ++k) {
      grads.w_ho(hidden + k, 0) = out_delta * p.backward->last_hidden()[k];
      dh[k] = out_delta * model.w_ho(hidden + k, 0);
    }
    backprop_cell(*model.backward, *p.backward, dh, *grads.backward);
  }
  return ffnn_loss(o, target);
}

template <typename Fn>
void for_each_matrix(LstmCell& c, Fn&& fn) {
  for (std::size_t q = 0; q < kGateCount; ++q) {
    fn(c.wx[q]);
    fn(c.wh[q]);
    fn(c.bias[q]);
  }
}

template <typename Fn>
void for_each_matrix(LstmModel& m, Fn&& fn) {
  for_each_matrix(m.forward, fn);
  if (m.backward) for_each_matrix(*m.backward, fn);
  fn(m.w_ho);
}

template <typename Fn>
void for_each_matrix_pair(LstmGradients& g, LstmModel& m, Fn&& fn) {
  for (std::size_t q = 0; q < kGateCount; ++q) {
    fn(g.forward.wx[q], m.forward.wx[q]);
    fn(g.forward.wh[q], m.forward.wh[q]);
    fn(g.forward.bias[q], m.forward.bias[q]);
    if (m.backward) {
      fn(g.backward->wx[q], m.backward->wx[q]);
      fn(g.backward->wh[q], m.backward->wh[q]);
      fn(g.backward->bias[q], m.backward->bias[q]);
    }
  }
  fn(g.w_ho, m.w_ho);
}

void clip(LstmGradients& g, LstmModel& shape_of, double cap) {
  double sq = 0.0;
  for_each_matrix_pair(g, shape_of, [&](Matrix& gm, Matrix&) {
    for (double x : gm.data()) sq += x * x;
  });
  const double norm = std::sqrt(sq);
  if (!(norm > cap)) return;
  const double scale = cap / norm;
  for_each_matrix_pair(g, shape_of, [&](Matrix& gm, Matrix&) {
    for (double& x : gm.data()) x *= scale;
  });
}

bool finite(LstmModel& m) {
  bool ok = true;
  for_each_matrix(m, [&](Matrix& w) { ok = ok && w.all_finite(); });
  return ok;
}

LstmModel train_impl(LstmModel model, std::span<const SequenceSample> samples,
                     const TrainConfig& cfg, Rng& rng, std::vector<double>* epoch_loss) {
  require(!samples.empty(), "lstm_train: dataset is empty");
  for (const auto& s : samples) {
    check_sequence(model, s.steps);
    require(std::isfinite(s.target), "lstm_train: non-finite target");
  }
  const char* label = model.backward ? "blstm" : "lstm";
  auto order = detail::identity_order(samples.size());
  if (epoch_loss) epoch_loss->clear();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) detail::shuffle_order(order, rng);
    for (std::size_t idx : order) {
      const auto& s = samples[idx];
      auto grads = zero_gradients(model);
      const double loss = backward_into(model, s.steps, s.target, grads);
      if (!std::isfinite(loss)) detail::diverged(label, epoch, idx);
      if (cfg.grad_clip) clip(grads, model, *cfg.grad_clip);
      for_each_matrix_pair(grads, model, [&](Matrix& g, Matrix& w) { axpy(-cfg.eta, g, w); });
    }
    if (!finite(model)) detail::diverged(label, epoch, samples.size());
    if (epoch_loss) epoch_loss->push_back(lstm_mean_loss(model, samples));
  }
  return model;
}

}  // namespace

const char* to_string(Gate g) noexcept {
  switch (g) {
    case Gate::Input: return "input";
    case Gate::Forget: return "forget";
    case Gate::Output: return "output";
    case Gate::Candidate: return "candidate";
  }
  return "?";
}

LstmCell LstmCell::zeros(std::size_t input_dim, std::size_t hidden) {
  require(input_dim >= 1 && hidden >= 1, "lstm: input and hidden sizes must be >= 1");
  LstmCell c;
  for (std::size_t q = 0; q < kGateCount; ++q) {
    c.wx[q] = Matrix(input_dim, hidden);
    c.wh[q] = Matrix(hidden, hidden);
    c.bias[q] = Matrix(1, hidden);
  }
  return c;
}

void LstmModel::validate() const {
  auto check_cell = [&](const LstmCell& c) {
    for (std::size_t q = 0; q < kGateCount; ++q) {
      require(c.wx[q].rows() == input_dim() && c.wx[q].cols() == hidden_dim(),
              "lstm: gate input weights must be d_in x H");
      require(c.wh[q].rows() == hidden_dim() && c.wh[q].cols() == hidden_dim(),
              "lstm: gate recurrent weights must be H x H");
      require(c.bias[q].rows() == 1 && c.bias[q].cols() == hidden_dim(),
              "lstm: gate bias must be 1 x H");
      require(c.wx[q].all_finite() && c.wh[q].all_finite() && c.bias[q].all_finite(),
              "lstm: weights must be finite");
    }
  };
  require(input_dim() >= 1 && hidden_dim() >= 1, "lstm: input and hidden sizes must be >= 1");
  check_cell(forward);
  if (backward) check_cell(*backward);
  const std::size_t summary = backward ? 2 * hidden_dim() : hidden_dim();
  require(w_ho.rows() == summary && w_ho.cols() == 1, "lstm: projection has wrong shape");
  require(w_ho.all_finite(), "lstm: weights must be finite");
  require(lambda > 0.0, "lstm: lambda must be positive");
}

LstmModel LstmModel::zeros(std::size_t input_dim, std::size_t hidden, Direction direction,
                           double lambda, OutputActivation output) {
  LstmModel m;
  m.forward = LstmCell::zeros(input_dim, hidden);
  if (direction == Direction::Bidirectional) m.backward = LstmCell::zeros(input_dim, hidden);
  m.w_ho = Matrix(direction == Direction::Bidirectional ? 2 * hidden : hidden, 1);
  m.lambda = lambda;
  m.output = output;
  m.validate();
  return m;
}

LstmModel LstmModel::random(std::size_t input_dim, const TrainConfig& cfg, Direction direction,
                            Rng& rng) {
  cfg.validate();
  auto m = zeros(input_dim, cfg.hidden, direction, cfg.lambda, cfg.output);
  const double gate_bound = detail::init_bound(cfg.init_range, input_dim + cfg.hidden);
  auto init_cell = [&](LstmCell& c) {
    for (std::size_t q = 0; q < kGateCount; ++q) {
      detail::fill_uniform(c.wx[q], gate_bound, rng);
      detail::fill_uniform(c.wh[q], gate_bound, rng);
    }
  };
  init_cell(m.forward);
  if (m.backward) init_cell(*m.backward);
  detail::fill_uniform(m.w_ho, detail::init_bound(cfg.init_range, m.w_ho.rows()), rng);
  return m;
}

LstmForward lstm_forward(const LstmModel& model, std::span<const Vector> sequence) {
  check_sequence(model, sequence);
  const Pass p = run(model, sequence);
  LstmForward out{p.forward.last_hidden(), {}, p.output};
  if (p.backward) out.backward_summary = p.backward->last_hidden();
  return out;
}

LstmGradients lstm_backward(const LstmModel& model, std::span<const Vector> sequence,
                            double target) {
  check_sequence(model, sequence);
  auto grads = zero_gradients(model);
  backward_into(model, sequence, target, grads);
  return grads;
}

double lstm_mean_loss(const LstmModel& model, std::span<const SequenceSample> samples) {
  require(!samples.empty(), "lstm_mean_loss: no samples");
  double total = 0.0;
  for (const auto& s : samples) {
    check_sequence(model, s.steps);
    total += ffnn_loss(run(model, s.steps).output, s.target);
  }
  return total / static_cast<double>(samples.size());
}

LstmModel lstm_train(std::span<const SequenceSample> samples, const TrainConfig& cfg,
                     std::vector<double>* epoch_loss) {
  cfg.validate();
  require(!samples.empty() && !samples.front().steps.empty(), "lstm_train: dataset is empty");
  Rng rng(cfg.seed);
  auto model =
      LstmModel::random(samples.front().steps.front().size(), cfg, Direction::Forward, rng);
  return train_impl(std::move(model), samples, cfg, rng, epoch_loss);
}

LstmModel lstm_train(LstmModel initial, std::span<const SequenceSample> samples,
                     const TrainConfig& cfg, std::vector<double>* epoch_loss) {
  cfg.validate();
  initial.validate();
  Rng rng(cfg.seed);
  return train_impl(std::move(initial), samples, cfg, rng, epoch_loss);
}

LstmForward blstm_forward(const LstmModel& model, std::span<const Vector> sequence) {
  require(model.direction() == Direction::Bidirectional,
          "blstm_forward: model is not bidirectional");
  return lstm_forward(model, sequence);
}

LstmModel blstm_train(std::span<const SequenceSample> samples, const TrainConfig& cfg,
                      std::vector<double>* epoch_loss) {
  cfg.validate();
  require(!samples.empty() && !samples.front().steps.empty(), "blstm_train: dataset is empty");
  Rng rng(cfg.seed);
  auto model = LstmModel::random(samples.front().steps.front().size(), cfg,
                                 Direction::Bidirectional, rng);
  return train_impl(std::move(model), samples, cfg, rng, epoch_loss);
}

}  // namespace kffnn
