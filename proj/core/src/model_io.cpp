#include "kffnn/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "kffnn/error.hpp"

namespace kffnn {

namespace {

constexpr const char* kMagic = "kffnn-model";
constexpr int kVersion = 1;

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename Model>
void write_body(const Model& m, std::string_view kind, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n'
      << "kind " << kind << '\n'
      << "input_dim " << m.input_dim() << '\n'
      << "hidden " << m.hidden_dim() << '\n'
      << "lambda " << format_real(m.lambda) << '\n'
      << "output " << to_string(m.output) << '\n';
  for (const auto& p : parameters(m)) {
    const Matrix& w = *p.matrix;
    out << "block " << p.name << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        if (c) out << ' ';
        out << format_real(w(r, c));
      }
      out << '\n';
    }
  }
}

template <typename T>
T read_field(std::istream& in, const char* key) {
  std::string name;
  T value{};
  if (!(in >> name) || name != key || !(in >> value))
    throw FormatError(std::string("model file: expected '") + key + "' field");
  return value;
}

template <typename Model>
void read_blocks(Model& m, std::istream& in) {
  for (auto& p : parameters(m)) {
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> tag >> name >> rows >> cols) || tag != "block")
      throw FormatError("model file: expected block header for '" + p.name + "'");
    if (name != p.name)
      throw FormatError("model file: expected block '" + p.name + "', found '" + name + "'");
    if (rows != p.matrix->rows() || cols != p.matrix->cols())
      throw FormatError("model file: block '" + name + "' has shape " + std::to_string(rows) +
                        "x" + std::to_string(cols) + ", expected " +
                        std::to_string(p.matrix->rows()) + "x" +
                        std::to_string(p.matrix->cols()));
    for (double& x : p.matrix->data()) {
      // operator>> rejects "inf"/"nan"; read tokens and parse with strtod.
      std::string token;
      if (!(in >> token)) throw FormatError("model file: block '" + name + "' is truncated");
      char* end = nullptr;
      x = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0')
        throw FormatError("model file: bad number '" + token + "' in block '" + name + "'");
    }
  }
  std::string extra;
  if (in >> extra) throw FormatError("model file: unexpected trailing content '" + extra + "'");
}

}  // namespace

void save_model(const AnyModel& model, std::ostream& out) {
  const auto kind = model_kind_name(model);
  std::visit([&](const auto& m) { write_body(m, kind, out); }, model);
  if (!out) throw std::runtime_error("model file: write failed");
}

void save_model(const AnyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  save_model(model, out);
}

AnyModel load_model(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic)
    throw FormatError("model file: missing 'kffnn-model' header");
  if (version != kVersion)
    throw FormatError("model file: unsupported version " + std::to_string(version));
  const auto kind = read_field<std::string>(in, "kind");
  const auto input_dim = read_field<std::size_t>(in, "input_dim");
  const auto hidden = read_field<std::size_t>(in, "hidden");
  const auto lambda = read_field<double>(in, "lambda");
  const auto output_name = read_field<std::string>(in, "output");
  if (input_dim == 0 || hidden == 0) throw FormatError("model file: zero dimension");
  if (!(lambda > 0.0)) throw FormatError("model file: lambda must be positive");
  OutputActivation output;
  try {
    output = parse_output_activation(output_name);
  } catch (const ContractError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }

  auto finish = [&](auto m) -> AnyModel {
    read_blocks(m, in);
    try {
      m.validate();
    } catch (const ContractError& e) {
      throw FormatError(std::string("model file: ") + e.what());
    }
    return m;
  };
  if (kind == "ffnn") return finish(FfnnModel::zeros(input_dim, hidden, lambda, output));
  if (kind == "rnn") return finish(RnnModel::zeros(input_dim, hidden, lambda, output));
  if (kind == "lstm")
    return finish(LstmModel::zeros(input_dim, hidden, Direction::Forward, lambda, output));
  if (kind == "blstm")
    return finish(LstmModel::zeros(input_dim, hidden, Direction::Bidirectional, lambda, output));
  throw FormatError("model file: unknown kind '" + kind + "'");
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path.string() + "'");
  return load_model(in);
}

}  // namespace kffnn
