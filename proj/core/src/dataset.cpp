#include "kffnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kffnn/error.hpp"
#include "training_detail.hpp"

namespace kffnn {

using nlohmann::json;

namespace {

void append_real(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

json envelope_to_json(const Envelope& env) {
  if (env.kind() == EnvelopeKind::Custom) return json{{"custom", env.custom_values()}};
  return env.name();
}

Envelope envelope_from_json(const json& j) {
  if (j.is_string()) return Envelope::from_name(j.get<std::string>());
  if (j.is_object() && j.contains("custom"))
    return Envelope::custom(j.at("custom").get<std::vector<double>>());
  throw FormatError("envelope must be a name or {\"custom\": [...]}");
}

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw FormatError("dataset line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<Vector> Clip::sequence() const {
  std::vector<Vector> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back(s.features);
  return out;
}

void Dataset::validate() const {
  std::set<std::string> ids;
  for (const auto& clip : clips) {
    require(ids.insert(clip.id).second, "dataset: duplicate clip id '" + clip.id + "'");
    require(std::isfinite(clip.label), "dataset: clip '" + clip.id + "' has non-finite label");
    require(!clip.segments.empty(), "dataset: clip '" + clip.id + "' has no segments");
    for (std::size_t i = 0; i < clip.segments.size(); ++i) {
      const auto& seg = clip.segments[i];
      require(seg.index == i + 1, "dataset: clip '" + clip.id + "' segment indices not 1..n");
      require(seg.features.size() == feature_dim,
              "dataset: clip '" + clip.id + "' segment " + std::to_string(i + 1) + " has " +
                  std::to_string(seg.features.size()) + " features, expected " +
                  std::to_string(feature_dim));
      require(all_finite(seg.features), "dataset: clip '" + clip.id + "' has non-finite features");
    }
  }
}

Dataset generate_synthetic(const GenerationMeta& params) {
  require(params.count >= 1, "generate: count must be at least 1");
  require(params.dim >= 1, "generate: feature dimension must be at least 1");
  require(params.n_min >= 1 && params.n_min <= params.n_max, "generate: need 1 <= n_min <= n_max");
  require(params.noise_sigma >= 0.0 && std::isfinite(params.noise_sigma),
          "generate: noise_sigma must be finite and non-negative");
  // Evaluates the envelope once per possible length so bad combinations fail
  // before any clip is drawn.
  for (std::size_t n = params.n_min; n <= params.n_max; ++n) (void)params.envelope.values(n);

  Rng rng(params.seed);
  Dataset ds;
  ds.feature_dim = params.dim;
  ds.meta = params;
  ds.clips.reserve(params.count);

  const std::size_t width = params.n_max - params.n_min + 1;
  char id[32];
  Vector direction(params.dim);
  for (std::size_t k = 0; k < params.count; ++k) {
    const std::size_t n = params.n_min + static_cast<std::size_t>(rng.below(width));
    double label = 0.0;
    if (params.labels == LabelDistribution::Uniform) {
      label = rng.uniform(0.0, 5.0);
    } else {
      label = std::clamp(1.5 + 0.6 * rng.gaussian(), 0.0, 5.0);
    }
    double norm = 0.0;
    do {
      for (double& u : direction) u = rng.uniform01();
      norm = norm2(direction);
    } while (norm == 0.0);
    for (double& u : direction) u /= norm;

    Clip clip;
    std::snprintf(id, sizeof id, "clip-%06zu", k + 1);
    clip.id = id;
    clip.label = label;
    clip.segments.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
      const double scale = params.envelope(i, n) * label;
      Segment seg{Vector(params.dim), i};
      for (std::size_t j = 0; j < params.dim; ++j)
        seg.features[j] = scale * direction[j] + params.noise_sigma * rng.gaussian();
      clip.segments.push_back(std::move(seg));
    }
    ds.clips.push_back(std::move(clip));
  }
  return ds;
}

std::vector<TrainTestSplit> split(const Dataset& ds, const SplitSpec& spec) {
  const std::size_t total = ds.size();
  require(total >= 2, "split: need at least two clips");
  require(!spec.train_sizes.empty(), "split: no training sizes given");
  std::size_t test = 0;
  if (spec.test_count) {
    test = *spec.test_count;
  } else {
    require(spec.test_fraction > 0.0 && spec.test_fraction < 1.0,
            "split: test_fraction must be in (0, 1)");
    test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(total)));
  }
  require(test >= 1 && test < total, "split: held-out set must contain 1.." +
                                         std::to_string(total - 1) + " clips");
  for (std::size_t size : spec.train_sizes) {
    require(size >= 1, "split: training size must be at least 1");
    require(size + test <= total, "split: training size " + std::to_string(size) + " plus " +
                                      std::to_string(test) + " test clips exceeds the " +
                                      std::to_string(total) + " available");
  }

  auto order = detail::identity_order(total);
  Rng rng(spec.seed);
  detail::shuffle_order(order, rng);

  Dataset test_set{{}, ds.feature_dim, ds.meta};
  for (std::size_t i = 0; i < test; ++i) test_set.clips.push_back(ds.clips[order[i]]);

  std::vector<TrainTestSplit> out;
  out.reserve(spec.train_sizes.size());
  for (std::size_t size : spec.train_sizes) {
    Dataset train{{}, ds.feature_dim, ds.meta};
    train.clips.reserve(size);
    for (std::size_t i = 0; i < size; ++i) train.clips.push_back(ds.clips[order[test + i]]);
    out.push_back({std::move(train), test_set});
  }
  return out;
}

void save_jsonl(const Dataset& ds, std::ostream& out) {
  std::string line;
  for (const auto& clip : ds.clips) {
    line.clear();
    line += "{\"id\":";
    line += json(clip.id).dump();
    line += ",\"label\":";
    append_real(line, clip.label);
    line += ",\"segments\":[";
    for (std::size_t i = 0; i < clip.segments.size(); ++i) {
      if (i) line += ',';
      line += '[';
      const auto& f = clip.segments[i].features;
      for (std::size_t j = 0; j < f.size(); ++j) {
        if (j) line += ',';
        append_real(line, f[j]);
      }
      line += ']';
    }
    line += "]}\n";
    out << line;
  }
  if (!out) throw std::runtime_error("dataset: write failed");
}

void save_jsonl(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  save_jsonl(ds, out);
}

Dataset load_jsonl(std::istream& in) {
  Dataset ds;
  std::set<std::string> ids;
  std::string text;
  std::size_t line_no = 0;
  bool have_dim = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      line_error(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) line_error(line_no, "expected a JSON object");
    if (!j.contains("id") || !j["id"].is_string()) line_error(line_no, "missing string 'id'");
    if (!j.contains("label") || !j["label"].is_number())
      line_error(line_no, "missing numeric 'label'");
    if (!j.contains("segments") || !j["segments"].is_array() || j["segments"].empty())
      line_error(line_no, "missing non-empty 'segments' array");

    Clip clip;
    clip.id = j["id"].get<std::string>();
    clip.label = j["label"].get<double>();
    if (!ids.insert(clip.id).second) line_error(line_no, "duplicate id '" + clip.id + "'");
    std::size_t index = 0;
    for (const auto& seg : j["segments"]) {
      ++index;
      if (!seg.is_array() || seg.empty())
        line_error(line_no, "segment " + std::to_string(index) + " is not a non-empty array");
      Segment s{Vector(), index};
      s.features.reserve(seg.size());
      for (const auto& x : seg) {
        if (!x.is_number())
          line_error(line_no, "segment " + std::to_string(index) + " has a non-numeric entry");
        s.features.push_back(x.get<double>());
      }
      if (!have_dim) {
        ds.feature_dim = s.features.size();
        have_dim = true;
      } else if (s.features.size() != ds.feature_dim) {
        line_error(line_no, "segment " + std::to_string(index) + " has " +
                                std::to_string(s.features.size()) + " features, expected " +
                                std::to_string(ds.feature_dim));
      }
      clip.segments.push_back(std::move(s));
    }
    ds.clips.push_back(std::move(clip));
  }
  if (ds.clips.empty()) throw FormatError("dataset: no clips (empty file)");
  return ds;
}

Dataset load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset '" + path.string() + "'");
  auto ds = load_jsonl(in);
  const auto meta = meta_path_for(path);
  if (std::filesystem::exists(meta)) ds.meta = load_meta(meta);
  return ds;
}

std::filesystem::path meta_path_for(const std::filesystem::path& jsonl) {
  return std::filesystem::path(jsonl.string() + ".meta.json");
}

void save_meta(const GenerationMeta& meta, const std::filesystem::path& path) {
  json j{{"count", meta.count},
         {"n_min", meta.n_min},
         {"n_max", meta.n_max},
         {"dim", meta.dim},
         {"envelope", envelope_to_json(meta.envelope)},
         {"noise_sigma", meta.noise_sigma},
         {"seed", meta.seed},
         {"labels", std::string(to_string(meta.labels))}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

GenerationMeta load_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    const json j = json::parse(in);
    GenerationMeta m;
    m.count = j.at("count").get<std::size_t>();
    m.n_min = j.at("n_min").get<std::size_t>();
    m.n_max = j.at("n_max").get<std::size_t>();
    m.dim = j.at("dim").get<std::size_t>();
    m.envelope = envelope_from_json(j.at("envelope"));
    m.noise_sigma = j.at("noise_sigma").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.labels = parse_label_distribution(j.value("labels", std::string("uniform")));
    return m;
  } catch (const json::exception& e) {
    throw FormatError("meta file '" + path.string() + "': " + e.what());
  }
}

std::vector<SequenceSample> to_sequences(const Dataset& ds) {
  std::vector<SequenceSample> out;
  out.reserve(ds.size());
  for (const auto& clip : ds.clips) out.push_back({clip.sequence(), clip.label});
  return out;
}

std::vector<std::size_t> label_histogram(const Dataset& ds, std::size_t bins) {
  require(bins >= 1, "label_histogram: need at least one bin");
  std::vector<std::size_t> counts(bins, 0);
  const double width = 5.0 / static_cast<double>(bins);
  for (const auto& clip : ds.clips) {
    const double pos = std::clamp(clip.label / width, 0.0, static_cast<double>(bins - 1));
    ++counts[static_cast<std::size_t>(pos)];
  }
  return counts;
}

std::string_view to_string(LabelDistribution d) noexcept {
  return d == LabelDistribution::Uniform ? "uniform" : "skewed";
}

LabelDistribution parse_label_distribution(std::string_view name) {
  if (name == "uniform") return LabelDistribution::Uniform;
  if (name == "skewed") return LabelDistribution::Skewed;
  throw ContractError("unknown label distribution '" + std::string(name) +
                      "' (expected uniform or skewed)");
}

}  // namespace kffnn
