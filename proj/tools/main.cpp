// kffnn command-line tool: generate | train | predict | evaluate | sweep | gradcheck
//
// Exit status: 0 ok, 1 runtime failure, 2 usage error. Invalid arguments or
// configuration values count as usage errors; unreadable files, malformed
// file content and failed checks are runtime failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kffnn/dataset.hpp"
#include "kffnn/error.hpp"
#include "kffnn/experiment.hpp"
#include "kffnn/gradcheck.hpp"
#include "kffnn/metrics.hpp"
#include "kffnn/model_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kffnn;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

constexpr const char* kDefaultStamp = "kffnn-gradcheck.stamp";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// RFC 4180 quoting, only when needed.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

void write_file(const fs::path& path, const std::string& body) {
  if (path == "-") {
    std::cout << body;
    return;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << body;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---- generate ----

struct GenerateArgs {
  std::optional<fs::path> config;
  std::optional<std::size_t> count, dim, n_min, n_max;
  std::optional<std::string> envelope, labels;
  std::optional<double> noise;
  std::optional<std::uint64_t> seed;
  fs::path out;
};

GenerationMeta default_generation() {
  GenerationMeta m;
  m.count = 1000;
  m.envelope = Envelope::fn1();
  m.noise_sigma = 0.1;
  m.seed = 1;
  return m;
}

int run_generate(const GenerateArgs& a) {
  GenerationMeta m = default_generation();
  if (a.config) {
    const auto cfg = load_experiment_config(*a.config);
    if (!cfg.generate) throw UsageError("config has no dataset.generate section");
    m = *cfg.generate;
  }
  if (a.count) m.count = *a.count;
  if (a.dim) m.dim = *a.dim;
  if (a.n_min) m.n_min = *a.n_min;
  if (a.n_max) m.n_max = *a.n_max;
  if (a.envelope) m.envelope = Envelope::from_name(*a.envelope);
  if (a.labels) m.labels = parse_label_distribution(*a.labels);
  if (a.noise) m.noise_sigma = *a.noise;
  if (a.seed) m.seed = *a.seed;

  const Dataset ds = generate_synthetic(m);
  save_jsonl(ds, a.out);
  save_meta(m, meta_path_for(a.out));

  std::cout << "clips " << ds.size() << "\n";
  std::cout << "label histogram (unit bins over [0,5])\n";
  const auto hist = label_histogram(ds, 5);
  std::size_t peak = 1;
  for (auto h : hist) peak = std::max(peak, h);
  for (std::size_t b = 0; b < hist.size(); ++b) {
    const std::size_t bar = (hist[b] * 40 + peak - 1) / peak;
    std::printf("  [%zu,%zu%c %6zu %s\n", b, b + 1, b + 1 == hist.size() ? ']' : ')', hist[b],
                std::string(bar, '#').c_str());
  }
  return kOk;
}

// ---- train ----

struct TrainArgs {
  std::optional<fs::path> config;
  fs::path data;
  std::string system = "kffnn-fn1";
  fs::path out;
  std::optional<double> eta, lambda, init_range, grad_clip;
  std::optional<std::size_t> epochs, hidden;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  bool no_shuffle = false;
};

TrainConfig train_config_from(const std::optional<fs::path>& config) {
  if (!config) return {};
  return load_experiment_config(*config).train;
}

int run_train(const TrainArgs& a) {
  TrainConfig t = train_config_from(a.config);
  if (a.eta) t.eta = *a.eta;
  if (a.lambda) t.lambda = *a.lambda;
  if (a.epochs) t.epochs = *a.epochs;
  if (a.hidden) t.hidden = *a.hidden;
  if (a.seed) t.seed = *a.seed;
  if (a.output) t.output = parse_output_activation(*a.output);
  if (a.init_range) t.init_range = *a.init_range;
  if (a.grad_clip) t.grad_clip = *a.grad_clip;
  if (a.no_shuffle) t.shuffle_each_epoch = false;
  t.validate();

  const auto system = system_from_name(a.system);
  const Dataset ds = load_jsonl(a.data);
  if (ds.empty()) throw UsageError("training set '" + a.data.string() + "' is empty");

  const auto start = std::chrono::steady_clock::now();
  const AnyModel model = train_system(system, ds, t);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_model(model, a.out);

  const Envelope* env = system.kind == SystemKind::KFfnn ? &system.envelope : nullptr;
  const auto report = evaluate_clip_level(model, ds, env);
  std::printf("trained %s on %zu clips in %.2fs; training mse %s\n", system.name.c_str(),
              ds.size(), secs, real(report.mse).c_str());
  return kOk;
}

// ---- predict / evaluate ----

struct ModelArgs {
  fs::path model;
  fs::path data;
  std::optional<std::string> envelope;
  fs::path out = "-";
};

std::optional<Envelope> envelope_arg(const std::optional<std::string>& spec) {
  if (!spec) return std::nullopt;
  if (fs::exists(*spec)) return Envelope::load(*spec);
  return Envelope::from_name(*spec);
}

struct Loaded {
  AnyModel model;
  Dataset data;
  std::optional<Envelope> envelope;
};

Loaded load_for_inference(const ModelArgs& a) {
  Loaded l{load_model(a.model), load_jsonl(a.data), envelope_arg(a.envelope)};
  if (std::holds_alternative<FfnnModel>(l.model) && !l.envelope)
    throw UsageError(
        "feed-forward models predict per segment; --envelope is required to reconstruct "
        "clip values");
  if (model_input_dim(l.model) != l.data.feature_dim)
    throw std::runtime_error("model expects " + std::to_string(model_input_dim(l.model)) +
                             " features, dataset has " + std::to_string(l.data.feature_dim));
  return l;
}

int run_predict(const ModelArgs& a) {
  const auto l = load_for_inference(a);
  const auto preds = predict_dataset(l.model, l.data, l.envelope ? &*l.envelope : nullptr);
  std::string body = "id,truth,prediction\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& clip = l.data.clips[i];
    body += csv_field(clip.id);
    body += ',' + real(clip.label) + ',' + real(preds[i]) + '\n';
  }
  write_file(a.out, body);
  return kOk;
}

struct EvaluateArgs {
  ModelArgs io;
  std::optional<std::string> system;
  std::size_t train_size = 0;
  std::uint64_t seed = 0;
};

int run_evaluate(const EvaluateArgs& a) {
  const auto l = load_for_inference(a.io);
  auto r = evaluate_clip_level(l.model, l.data, l.envelope ? &*l.envelope : nullptr);
  r.system = a.system ? *a.system : std::string(model_kind_name(l.model));
  r.train_size = a.train_size;
  r.seed = a.seed;
  write_file(a.io.out, std::string(kReportCsvHeader) + "\n" + to_csv_row(r) + "\n");
  return kOk;
}

// ---- gradcheck stamp ----

gradcheck::ModelKind kind_for(SystemKind k) {
  switch (k) {
    case SystemKind::KFfnn: return gradcheck::ModelKind::Ffnn;
    case SystemKind::Rnn: return gradcheck::ModelKind::Rnn;
    case SystemKind::Lstm: return gradcheck::ModelKind::Lstm;
    case SystemKind::Blstm: return gradcheck::ModelKind::Blstm;
  }
  return gradcheck::ModelKind::Ffnn;
}

json read_stamp(const fs::path& path) {
  if (!fs::exists(path)) return json::object();
  try {
    auto j = json::parse(read_file(path));
    return j.is_object() ? j : json::object();
  } catch (const json::exception&) {
    return json::object();
  }
}

void record_stamp(const fs::path& path, gradcheck::ModelKind kind, const gradcheck::GradReport& r,
                  std::uint64_t seed) {
  auto j = read_stamp(path);
  j[std::string(to_string(kind))] = {{"trials", r.trials},
                                     {"seed", seed},
                                     {"checked", r.checked},
                                     {"max_rel_err", r.max_rel_err},
                                     {"max_abs_err", r.max_abs_err}};
  write_file(path, j.dump(2) + "\n");
}

void require_stamp(const fs::path& path, const ExperimentConfig& cfg) {
  const auto j = read_stamp(path);
  for (const auto& name : cfg.systems) {
    const auto kind = std::string(to_string(kind_for(system_from_name(name).kind)));
    if (!j.contains(kind))
      throw UsageError("no passing gradient check recorded for '" + kind + "' in '" +
                       path.string() + "'; run 'kffnn gradcheck " + kind +
                       "' first or pass --force");
  }
}

// ---- sweep ----

struct SweepArgs {
  fs::path config;
  std::optional<fs::path> output_dir;
  std::optional<std::size_t> threads, epochs;
  std::optional<std::vector<std::string>> systems;
  std::optional<std::vector<std::size_t>> sizes;
  std::optional<std::vector<std::uint64_t>> seeds;
  fs::path stamp = kDefaultStamp;
  bool force = false;
};

int run_sweep_cmd(const SweepArgs& a) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (a.output_dir) cfg.output_dir = *a.output_dir;
  if (a.threads) cfg.threads = *a.threads;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.systems) cfg.systems = *a.systems;
  if (a.sizes) cfg.train_sizes = *a.sizes;
  if (a.seeds) cfg.seeds = *a.seeds;
  cfg.validate();
  if (!a.force) require_stamp(a.stamp, cfg);

  const Dataset data = materialize_dataset(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_sweep(cfg, data);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_sweep_outputs(cfg, result);

  std::size_t failed = 0;
  for (const auto& r : result.rows) failed += r.failed;
  std::printf("%zu cells in %.1fs (%zu diverged); wrote %s\n", result.rows.size(), secs, failed,
              (cfg.output_dir / "results.csv").string().c_str());
  std::cout << aggregate_csv(result.aggregate);
  return kOk;
}

// ---- gradcheck ----

struct GradcheckArgs {
  std::string kind;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  fs::path stamp = kDefaultStamp;
  bool no_stamp = false;
};

int run_gradcheck(const GradcheckArgs& a) {
  gradcheck::ModelKind kind;
  try {
    kind = gradcheck::parse_model_kind(a.kind);
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  if (a.trials == 0) throw UsageError("trials must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  const auto report = gradcheck::check(kind, a.trials, a.seed);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << gradcheck::format_report(kind, report);
  std::printf("elapsed %.2fs\n", secs);
  if (!report.passed) return kFailure;
  if (!a.no_stamp) record_stamp(a.stamp, kind, report, a.seed);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-infused feed-forward networks and recurrent baselines"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic dataset (JSONL plus meta sidecar)");
  g->add_option("-o,--out", gen.out, "Output JSONL path")->required();
  g->add_option("--config", gen.config, "Experiment config; reads dataset.generate");
  g->add_option("--count", gen.count, "Number of clips");
  g->add_option("--dim", gen.dim, "Feature dimension");
  g->add_option("--n-min", gen.n_min, "Shortest clip, in segments");
  g->add_option("--n-max", gen.n_max, "Longest clip, in segments");
  g->add_option("--envelope", gen.envelope, "constant | fn1 | fn2 | fn3 | linear");
  g->add_option("--noise", gen.noise, "Gaussian feature noise sigma");
  g->add_option("--labels", gen.labels, "uniform | skewed");
  g->add_option("--seed", gen.seed, "Generator seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train one system and save the model");
  t->add_option("--data", tr.data, "Training set (JSONL)")->required();
  t->add_option("-o,--out", tr.out, "Model output path")->required();
  t->add_option("--system", tr.system, "System name, e.g. kffnn-fn1, ffnn, rnn, lstm, blstm");
  t->add_option("--config", tr.config, "Experiment config; reads the train section");
  t->add_option("--eta", tr.eta, "Learning rate");
  t->add_option("--epochs", tr.epochs, "Epochs");
  t->add_option("--hidden", tr.hidden, "Hidden units");
  t->add_option("--lambda", tr.lambda, "Sigmoid steepness");
  t->add_option("--seed", tr.seed, "Initialisation and shuffling seed");
  t->add_option("--output", tr.output, "Output unit: linear | sigmoid");
  t->add_option("--init-range", tr.init_range, "Uniform init half-width");
  t->add_option("--grad-clip", tr.grad_clip, "Per-sample gradient norm cap");
  t->add_flag("--no-shuffle", tr.no_shuffle, "Visit samples in dataset order");

  ModelArgs pr;
  auto* p = app.add_subcommand("predict", "Per-clip predictions as CSV (id,truth,prediction)");
  p->add_option("--model", pr.model, "Model file")->required();
  p->add_option("--data", pr.data, "Dataset (JSONL)")->required();
  p->add_option("--envelope", pr.envelope,
                "Envelope name or file; required for feed-forward models");
  p->add_option("-o,--out", pr.out, "Output CSV, '-' for stdout");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Clip-level MSE and PCC as one results row");
  e->add_option("--model", ev.io.model, "Model file")->required();
  e->add_option("--data", ev.io.data, "Dataset (JSONL)")->required();
  e->add_option("--envelope", ev.io.envelope,
                "Envelope name or file; required for feed-forward models");
  e->add_option("--system", ev.system, "System column value (defaults to the model kind)");
  e->add_option("--train-size", ev.train_size, "train_size column value");
  e->add_option("--seed", ev.seed, "seed column value");
  e->add_option("-o,--out", ev.io.out, "Output CSV, '-' for stdout");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Train and evaluate every (system, size, seed) cell");
  s->add_option("config", sw.config, "Experiment config (JSON)")->required();
  s->add_option("--output-dir", sw.output_dir, "Overrides output_dir");
  s->add_option("--threads", sw.threads, "Worker threads, 0 = all cores");
  s->add_option("--epochs", sw.epochs, "Overrides train.epochs");
  s->add_option("--systems", sw.systems, "Overrides systems");
  s->add_option("--sizes", sw.sizes, "Overrides train_sizes");
  s->add_option("--seeds", sw.seeds, "Overrides seeds");
  s->add_option("--stamp", sw.stamp, "Gradient-check stamp file");
  s->add_flag("--force", sw.force, "Run without a recorded gradient check");

  GradcheckArgs gc;
  auto* c = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  c->add_option("kind", gc.kind, "ffnn | rnn | lstm | blstm")->required();
  c->add_option("trials", gc.trials, "Random instances to check");
  c->add_option("--seed", gc.seed, "Instance seed");
  c->add_option("--stamp", gc.stamp, "Stamp file updated on success");
  c->add_flag("--no-stamp", gc.no_stamp, "Do not record the result");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return run_generate(gen);
    if (*t) return run_train(tr);
    if (*p) return run_predict(pr);
    if (*e) return run_evaluate(ev);
    if (*s) return run_sweep_cmd(sw);
    if (*c) return run_gradcheck(gc);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const ContractError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
