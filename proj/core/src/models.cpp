#include "kffnn/models.hpp"

namespace kffnn {

namespace {

template <typename Ref, typename Cell>
void append_cell(std::vector<Ref>& out, const std::string& prefix, Cell& c) {
  for (std::size_t q = 0; q < kGateCount; ++q) {
    const std::string gate = to_string(static_cast<Gate>(q));
    out.push_back({prefix + ".wx." + gate, &c.wx[q]});
    out.push_back({prefix + ".wh." + gate, &c.wh[q]});
    out.push_back({prefix + ".b." + gate, &c.bias[q]});
  }
}

template <typename Ref, typename Model>
std::vector<Ref> lstm_params(Model& m) {
  std::vector<Ref> out;
  append_cell(out, "fwd", m.forward);
  if (m.backward) append_cell(out, "bwd", *m.backward);
  out.push_back({"w_ho", &m.w_ho});
  return out;
}

}  // namespace

std::string_view model_kind_name(const AnyModel& model) noexcept {
  struct Visitor {
    std::string_view operator()(const FfnnModel&) const { return "ffnn"; }
    std::string_view operator()(const RnnModel&) const { return "rnn"; }
    std::string_view operator()(const LstmModel& m) const {
      return m.direction() == Direction::Bidirectional ? "blstm" : "lstm";
    }
  };
  return std::visit(Visitor{}, model);
}

std::size_t model_input_dim(const AnyModel& model) noexcept {
  return std::visit([](const auto& m) { return m.input_dim(); }, model);
}

std::vector<ParamRef> parameters(FfnnModel& m) { return {{"w_ih", &m.w_ih}, {"w_ho", &m.w_ho}}; }
std::vector<ParamRef> parameters(RnnModel& m) {
  return {{"w_ih", &m.w_ih}, {"w_hh", &m.w_hh}, {"w_ho", &m.w_ho}};
}
std::vector<ParamRef> parameters(LstmModel& m) { return lstm_params<ParamRef>(m); }

std::vector<ConstParamRef> parameters(const FfnnModel& m) {
  return {{"w_ih", &m.w_ih}, {"w_ho", &m.w_ho}};
}
std::vector<ConstParamRef> parameters(const RnnModel& m) {
  return {{"w_ih", &m.w_ih}, {"w_hh", &m.w_hh}, {"w_ho", &m.w_ho}};
}
std::vector<ConstParamRef> parameters(const LstmModel& m) {
  return lstm_params<ConstParamRef>(m);
}

std::vector<const Matrix*> gradient_list(const FfnnGradients& g) { return {&g.w_ih, &g.w_ho}; }
std::vector<const Matrix*> gradient_list(const RnnGradients& g) {
  return {&g.w_ih, &g.w_hh, &g.w_ho};
}
std::vector<const Matrix*> gradient_list(const LstmGradients& g) {
  std::vector<const Matrix*> out;
  auto cell = [&](const LstmCell& c) {
    for (std::size_t q = 0; q < kGateCount; ++q) {
      out.push_back(&c.wx[q]);
      out.push_back(&c.wh[q]);
      out.push_back(&c.bias[q]);
    }
  };
  cell(g.forward);
  if (g.backward) cell(*g.backward);
  out.push_back(&g.w_ho);
  return out;
}

}  // namespace kffnn
