#include "kffnn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kffnn/error.hpp"
#include "kffnn/knowledge.hpp"

namespace kffnn {

using nlohmann::json;

namespace {

std::string real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.contains(item.key()))
      throw ContractError("config: unknown key '" + item.key() + "' in " + where);
}

GenerationMeta parse_generate(const json& j) {
  reject_unknown_keys(j,
                      {"count", "n_min", "n_max", "dim", "envelope", "noise_sigma", "seed",
                       "labels"},
                      "dataset.generate");
  GenerationMeta m;
  m.count = j.value("count", std::size_t{1000});
  m.n_min = j.value("n_min", std::size_t{8});
  m.n_max = j.value("n_max", std::size_t{12});
  m.dim = j.value("dim", std::size_t{21});
  if (j.contains("envelope")) {
    const auto& e = j.at("envelope");
    if (e.is_object() && e.contains("custom"))
      m.envelope = Envelope::custom(e.at("custom").get<std::vector<double>>());
    else
      m.envelope = Envelope::from_name(e.get<std::string>());
  } else {
    m.envelope = Envelope::fn1();
  }
  m.noise_sigma = j.value("noise_sigma", 0.1);
  m.seed = j.value("seed", std::uint64_t{1});
  m.labels = parse_label_distribution(j.value("labels", std::string("uniform")));
  return m;
}

json generate_to_json(const GenerationMeta& m) {
  json env = m.envelope.kind() == EnvelopeKind::Custom
                 ? json{{"custom", m.envelope.custom_values()}}
                 : json(m.envelope.name());
  return json{{"count", m.count},         {"n_min", m.n_min}, {"n_max", m.n_max},
              {"dim", m.dim},             {"envelope", env},  {"noise_sigma", m.noise_sigma},
              {"seed", m.seed},           {"labels", std::string(to_string(m.labels))}};
}

TrainConfig parse_train(const json& j) {
  reject_unknown_keys(j,
                      {"eta", "epochs", "lambda", "hidden", "output", "shuffle", "init_range",
                       "grad_clip", "seed"},
                      "train");
  TrainConfig t;
  t.eta = j.value("eta", t.eta);
  t.epochs = j.value("epochs", t.epochs);
  t.lambda = j.value("lambda", t.lambda);
  t.hidden = j.value("hidden", t.hidden);
  t.seed = j.value("seed", t.seed);
  t.output = parse_output_activation(j.value("output", std::string("linear")));
  t.shuffle_each_epoch = j.value("shuffle", t.shuffle_each_epoch);
  if (j.contains("init_range") && !j["init_range"].is_null())
    t.init_range = j["init_range"].get<double>();
  if (j.contains("grad_clip") && !j["grad_clip"].is_null())
    t.grad_clip = j["grad_clip"].get<double>();
  return t;
}

struct Cell {
  std::size_t system;  // index into expanded system list
  std::size_t size;    // index into train_sizes
  std::size_t seed;    // index into seeds
};

struct ExpandedSystem {
  SystemSpec spec;
  std::size_t hidden;
};

}  // namespace

const std::vector<std::string>& known_system_names() {
  static const std::vector<std::string> names{"kffnn-fn1", "kffnn-fn2", "kffnn-fn3",
                                              "kffnn-linear", "ffnn", "rnn", "lstm", "blstm"};
  return names;
}

SystemSpec system_from_name(std::string_view name) {
  const std::string n(name);
  if (n == "ffnn") return {n, SystemKind::KFfnn, Envelope::constant()};
  if (n.rfind("kffnn-", 0) == 0) {
    const auto env = n.substr(6);
    if (env == "fn1" || env == "fn2" || env == "fn3" || env == "linear")
      return {n, SystemKind::KFfnn, Envelope::from_name(env)};
  }
  if (n == "rnn") return {n, SystemKind::Rnn, Envelope::constant()};
  if (n == "lstm") return {n, SystemKind::Lstm, Envelope::constant()};
  if (n == "blstm") return {n, SystemKind::Blstm, Envelope::constant()};
  throw ContractError("unknown system '" + n +
                      "' (expected kffnn-fn1, kffnn-fn2, kffnn-fn3, kffnn-linear, ffnn, rnn, "
                      "lstm or blstm)");
}

AnyModel train_system(const SystemSpec& system, const Dataset& train, const TrainConfig& cfg) {
  require(!train.empty(), "train_system: empty training set");
  switch (system.kind) {
    case SystemKind::KFfnn: {
      const auto samples = infuse_dataset(train, system.envelope);
      return ffnn_train(samples, cfg);
    }
    case SystemKind::Rnn: return rnn_train(to_sequences(train), cfg);
    case SystemKind::Lstm: return lstm_train(to_sequences(train), cfg);
    case SystemKind::Blstm: return blstm_train(to_sequences(train), cfg);
  }
  throw ContractError("train_system: unknown system kind");
}

EvalReport evaluate_system(const SystemSpec& system, const AnyModel& model, const Dataset& test) {
  auto r = evaluate_clip_level(model, test,
                               system.kind == SystemKind::KFfnn ? &system.envelope : nullptr);
  r.system = system.name;
  return r;
}

void ExperimentConfig::validate() const {
  require(generate.has_value() || dataset_path.has_value(),
          "config: dataset needs either 'generate' parameters or a 'path'");
  require(!systems.empty(), "config: 'systems' is empty");
  require(!train_sizes.empty(), "config: 'train_sizes' is empty");
  require(!seeds.empty(), "config: 'seeds' is empty");
  for (const auto& s : systems) (void)system_from_name(s);
  for (std::size_t h : hidden_sizes) require(h >= 1, "config: hidden sizes must be >= 1");
  train.validate();
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ContractError(std::string("config: malformed JSON: ") + e.what());
  }
  require(j.is_object(), "config: top level must be an object");
  reject_unknown_keys(j,
                      {"dataset", "split", "systems", "train_sizes", "seeds", "train",
                       "hidden_sizes", "output_dir", "threads"},
                      "config");
  ExperimentConfig cfg;
  try {
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      reject_unknown_keys(d, {"generate", "path"}, "dataset");
      if (d.contains("generate")) cfg.generate = parse_generate(d["generate"]);
      if (d.contains("path")) cfg.dataset_path = d["path"].get<std::string>();
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      reject_unknown_keys(s, {"test_fraction", "test_count", "seed"}, "split");
      cfg.split.test_fraction = s.value("test_fraction", cfg.split.test_fraction);
      if (s.contains("test_count") && !s["test_count"].is_null())
        cfg.split.test_count = s["test_count"].get<std::size_t>();
      cfg.split.seed = s.value("seed", cfg.split.seed);
    }
    cfg.systems = j.value("systems", std::vector<std::string>{"kffnn-fn1", "kffnn-fn2",
                                                              "kffnn-fn3", "ffnn", "rnn",
                                                              "lstm", "blstm"});
    cfg.train_sizes =
        j.value("train_sizes", std::vector<std::size_t>{200, 500, 1000, 2000});
    if (j.contains("seeds")) {
      cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    } else {
      for (std::uint64_t s = 1; s <= 10; ++s) cfg.seeds.push_back(s);
    }
    if (j.contains("train")) cfg.train = parse_train(j["train"]);
    cfg.hidden_sizes = j.value("hidden_sizes", std::vector<std::size_t>{});
    cfg.output_dir = j.value("output_dir", std::string("results"));
    cfg.threads = j.value("threads", std::size_t{1});
  } catch (const json::exception& e) {
    throw ContractError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  json dataset = json::object();
  if (cfg.generate) dataset["generate"] = generate_to_json(*cfg.generate);
  if (cfg.dataset_path) dataset["path"] = cfg.dataset_path->string();
  json split{{"test_fraction", cfg.split.test_fraction}, {"seed", cfg.split.seed}};
  split["test_count"] = cfg.split.test_count ? json(*cfg.split.test_count) : json(nullptr);
  const auto& t = cfg.train;
  json train{{"eta", t.eta},
             {"epochs", t.epochs},
             {"lambda", t.lambda},
             {"hidden", t.hidden},
             {"seed", t.seed},
             {"output", to_string(t.output)},
             {"shuffle", t.shuffle_each_epoch},
             {"init_range", t.init_range ? json(*t.init_range) : json(nullptr)},
             {"grad_clip", t.grad_clip ? json(*t.grad_clip) : json(nullptr)}};
  json j{{"dataset", dataset},
         {"split", split},
         {"systems", cfg.systems},
         {"train_sizes", cfg.train_sizes},
         {"seeds", cfg.seeds},
         {"train", train},
         {"hidden_sizes", cfg.hidden_sizes},
         {"output_dir", cfg.output_dir.string()},
         {"threads", cfg.threads}};
  return j.dump(2) + "\n";
}

Dataset materialize_dataset(const ExperimentConfig& cfg) {
  if (cfg.generate) return generate_synthetic(*cfg.generate);
  require(cfg.dataset_path.has_value(), "config: no dataset source");
  return load_jsonl(*cfg.dataset_path);
}

TrainConfig cell_train_config(const ExperimentConfig& cfg, std::uint64_t seed,
                              std::size_t hidden) {
  TrainConfig t = cfg.train;
  t.seed = seed;
  t.hidden = hidden;
  return t;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  require(!data.empty(), "sweep: dataset is empty");
  data.validate();

  SplitSpec split_spec = cfg.split;
  split_spec.train_sizes = cfg.train_sizes;
  const auto splits = split(data, split_spec);

  std::vector<ExpandedSystem> systems;
  for (const auto& name : cfg.systems) {
    if (cfg.hidden_sizes.empty()) {
      systems.push_back({system_from_name(name), cfg.train.hidden});
    } else {
      for (std::size_t h : cfg.hidden_sizes) {
        auto spec = system_from_name(name);
        spec.name += "/h" + std::to_string(h);
        systems.push_back({std::move(spec), h});
      }
    }
  }

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < systems.size(); ++s)
    for (std::size_t z = 0; z < cfg.train_sizes.size(); ++z)
      for (std::size_t k = 0; k < cfg.seeds.size(); ++k) cells.push_back({s, z, k});

  std::vector<EvalReport> rows(cells.size());
  auto run_cell = [&](std::size_t index) {
    const Cell& c = cells[index];
    const auto& system = systems[c.system];
    const auto& tt = splits[c.size];
    EvalReport r;
    try {
      const auto tcfg = cell_train_config(cfg, cfg.seeds[c.seed], system.hidden);
      const auto model = train_system(system.spec, tt.train, tcfg);
      r = evaluate_system(system.spec, model, tt.test);
    } catch (const DivergenceError&) {
      r.failed = true;
    }
    r.system = system.spec.name;
    r.train_size = cfg.train_sizes[c.size];
    r.seed = cfg.seeds[c.seed];
    r.n_test = tt.test.size();
    rows[index] = std::move(r);
  };

  std::size_t workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(cells.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
          } catch (...) {
            errors[w] = std::current_exception();
            next = cells.size();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  SweepResult result;
  result.aggregate = aggregate(rows);
  result.rows = std::move(rows);
  return result;
}

double median(std::vector<double> values) {
  require(!values.empty(), "median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<AggregateRow> aggregate(const std::vector<EvalReport>& rows) {
  std::vector<AggregateRow> out;
  std::map<std::pair<std::string, std::size_t>, std::size_t> slot;
  std::vector<std::vector<double>> mses, pccs;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.system, r.train_size);
    auto [it, inserted] = slot.try_emplace(key, out.size());
    if (inserted) {
      out.push_back({r.system, r.train_size, std::nullopt, std::nullopt, 0, 0});
      mses.emplace_back();
      pccs.emplace_back();
    }
    auto& row = out[it->second];
    ++row.seeds;
    if (r.failed) {
      ++row.failed;
      continue;
    }
    mses[it->second].push_back(r.mse);
    if (r.pcc) pccs[it->second].push_back(*r.pcc);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mses[i].empty()) out[i].median_mse = median(mses[i]);
    if (!pccs[i].empty()) out[i].median_pcc = median(pccs[i]);
  }
  return out;
}

std::string results_csv(const std::vector<EvalReport>& rows) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : rows) out += to_csv_row(r) + "\n";
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "system,train_size,median_mse,median_pcc,seeds,failed\n";
  for (const auto& r : rows) {
    out += r.system + ',' + std::to_string(r.train_size) + ',';
    out += r.median_mse ? real(*r.median_mse) : std::string("NA");
    out += ',';
    out += r.median_pcc ? real(*r.median_pcc) : std::string("NA");
    out += ',' + std::to_string(r.seeds) + ',' + std::to_string(r.failed) + '\n';
  }
  return out;
}

void write_sweep_outputs(const ExperimentConfig& cfg, const SweepResult& result) {
  std::filesystem::create_directories(cfg.output_dir);
  auto write = [&](const char* name, const std::string& body) {
    const auto path = cfg.output_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << body;
  };
  write("results.csv", results_csv(result.rows));
  write("aggregate.csv", aggregate_csv(result.aggregate));
  write("effective_config.json", to_json(cfg));
}

}  // namespace kffnn
