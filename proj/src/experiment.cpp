#include "cfgnn/experiment.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>

#include "cfgnn/csv.hpp"
#include "cfgnn/error.hpp"
#include "cfgnn/spectral.hpp"

namespace cfgnn {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void reject_unknown(const json& j, std::string_view section, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError("config: '" + std::string(section) + "' must be an object");
  const std::set<std::string_view> allowed(keys);
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " + std::string(section));
    }
  }
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + j.at(key).dump());
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() ? p : base / p; }

const char* basis_name(PolyBasis b) { return b == PolyBasis::chebyshev ? "chebyshev" : "monomial"; }

PolyBasis parse_basis(const std::string& s) {
  if (s == "chebyshev") return PolyBasis::chebyshev;
  if (s == "monomial") return PolyBasis::monomial;
  throw ConfigError("config: unknown polynomial basis '" + s + "'");
}

void parse_train(const json& j, TrainConfig& t) {
  reject_unknown(j, "train", {"profile", "variant", "learning_rate", "weight_decay", "epochs",
                              "adjacency_dropout", "order", "hidden_dim", "num_layers", "basis",
                              "class_weight_mode"});
  if (j.contains("profile")) {
    std::string profile;
    read_key(j, "profile", profile);
    if (profile == "domain-a") {
      t = TrainConfig::domain_a();
    } else if (profile == "domain-c") {
      t = TrainConfig::domain_c();
    } else {
      throw ConfigError("config: unknown training profile '" + profile + "'");
    }
  }
  std::string s;
  if (j.contains("variant")) {
    read_key(j, "variant", s);
    t.variant = parse_variant(s);
  }
  read_key(j, "learning_rate", t.learning_rate);
  read_key(j, "weight_decay", t.weight_decay);
  read_key(j, "epochs", t.epochs);
  read_key(j, "adjacency_dropout", t.adjacency_dropout);
  read_key(j, "order", t.order);
  read_key(j, "hidden_dim", t.hidden_dim);
  read_key(j, "num_layers", t.num_layers);
  if (j.contains("basis")) {
    read_key(j, "basis", s);
    t.basis = parse_basis(s);
  }
  if (j.contains("class_weight_mode")) {
    read_key(j, "class_weight_mode", s);
    t.class_weight_mode = parse_class_weight_mode(s);
  }
}

void parse_synthetic(const json& j, SyntheticConfig& s) {
  reject_unknown(j, "synthetic", {"num_classes", "num_samples", "normal_fraction", "class_counts",
                                  "feature_dim", "p_in", "p_out", "separation", "noise"});
  read_key(j, "num_classes", s.num_classes);
  read_key(j, "num_samples", s.num_samples);
  read_key(j, "normal_fraction", s.normal_fraction);
  read_key(j, "class_counts", s.class_counts);
  read_key(j, "feature_dim", s.feature_dim);
  read_key(j, "p_in", s.p_in);
  read_key(j, "p_out", s.p_out);
  read_key(j, "separation", s.separation);
  read_key(j, "noise", s.noise);
}

SweepArm parse_arm(const json& j) {
  reject_unknown(j, "sweep.arms", {"variant", "class_weight_mode"});
  SweepArm arm;
  std::string s;
  if (j.contains("variant")) {
    read_key(j, "variant", s);
    arm.variant = parse_variant(s);
  }
  if (j.contains("class_weight_mode")) {
    read_key(j, "class_weight_mode", s);
    arm.class_weight_mode = parse_class_weight_mode(s);
  }
  return arm;
}

std::string hex(const unsigned char* bytes, std::size_t n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += digits[bytes[i] >> 4];
    out += digits[bytes[i] & 0xf];
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

// Input files that a command reads, hashed into the manifest.
json input_hashes(const ExperimentConfig& config, bool with_checkpoint) {
  json inputs = json::object();
  auto add = [&](const std::string& name, const fs::path& p) {
    inputs[name] = git_blob_hash(csv::read_file(p));
  };
  if (!config.data.features.empty()) add("features", config.data.features);
  if (config.data.edges) add("edges", *config.data.edges);
  if (with_checkpoint && config.checkpoint) add("checkpoint", *config.checkpoint);
  inputs["config"] = git_blob_hash(config_json(config).dump());
  return inputs;
}

void write_manifest(const ExperimentConfig& config, const std::string& command, json inputs,
                    const json& summary, std::chrono::steady_clock::time_point start) {
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  json m;
  m["command"] = command;
  m["config"] = config_json(config);
  m["inputs"] = std::move(inputs);
  m["seed"] = config.seed;
  m["wall_clock_seconds"] = elapsed.count();
  m["summary"] = summary;
  csv::write_file_atomic(config.out / "manifest.json", m.dump(2) + "\n");
}

json metrics_summary(const MetricsReport& r) {
  return {{"accuracy", r.accuracy}, {"macro_f1", r.prf.macro_f1}, {"g_mean", r.g_mean},
          {"mcc", r.mcc},           {"cma", r.cma}};
}

Matrix normalized_features(const Dataset& ds) { return min_max_normalize_columns(ds.features); }

}  // namespace

std::vector<SweepArm> default_sweep_arms() {
  return {{Variant::base, ClassWeightMode::inverse_frequency}, {Variant::global, ClassWeightMode::none}};
}

void ExperimentConfig::apply_seed(std::uint64_t s) {
  seed = s;
  synthetic.seed = s;
  train.seed = s;
  split.seed = s;
}

void ExperimentConfig::validate() const {
  synthetic.validate();
  train.validate();
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw ConfigError("config: split.train_fraction must lie in (0, 1)");
  }
  for (double r : ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("config: imbalance ratios must lie in (0, 1]");
  }
  if (arms.empty()) throw ConfigError("config: sweep needs at least one arm");
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  reject_unknown(j, "config", {"seed", "out", "variant", "synthetic", "train", "split", "data",
                               "checkpoint", "sweep"});
  ExperimentConfig c;
  std::uint64_t seed = 0;
  read_key(j, "seed", seed);
  if (j.contains("synthetic")) parse_synthetic(j.at("synthetic"), c.synthetic);
  if (j.contains("train")) parse_train(j.at("train"), c.train);
  if (j.contains("variant")) {
    std::string s;
    read_key(j, "variant", s);
    c.train.variant = parse_variant(s);
  }
  if (j.contains("split")) {
    reject_unknown(j.at("split"), "split", {"train_fraction"});
    read_key(j.at("split"), "train_fraction", c.split.train_fraction);
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    reject_unknown(d, "data", {"features", "edges", "label_column"});
    std::string s;
    if (d.contains("features")) {
      read_key(d, "features", s);
      c.data.features = resolve(s, base_dir);
    }
    if (d.contains("edges")) {
      read_key(d, "edges", s);
      c.data.edges = resolve(s, base_dir);
    }
    read_key(d, "label_column", c.data.label_column);
    if (c.data.edges && c.data.features.empty()) {
      throw ConfigError("config: data.edges given without data.features");
    }
  }
  if (j.contains("out")) {
    std::string s;
    read_key(j, "out", s);
    c.out = resolve(s, base_dir);
  }
  if (j.contains("checkpoint")) {
    std::string s;
    read_key(j, "checkpoint", s);
    c.checkpoint = resolve(s, base_dir);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s, "sweep", {"ratios", "arms", "seeds"});
    read_key(s, "ratios", c.ratios);
    read_key(s, "seeds", c.sweep_seeds);
    if (s.contains("arms")) {
      if (!s.at("arms").is_array()) throw ConfigError("config: sweep.arms must be an array");
      c.arms.clear();
      for (const auto& a : s.at("arms")) c.arms.push_back(parse_arm(a));
    }
  }
  c.apply_seed(seed);
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, fs::absolute(path).parent_path());
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  const SyntheticConfig& s = c.synthetic;
  j["synthetic"] = {{"num_classes", s.num_classes}, {"num_samples", s.num_samples},
                    {"normal_fraction", s.normal_fraction}, {"class_counts", s.class_counts},
                    {"feature_dim", s.feature_dim}, {"p_in", s.p_in}, {"p_out", s.p_out},
                    {"separation", s.separation}, {"noise", s.noise}};
  const TrainConfig& t = c.train;
  j["train"] = {{"variant", std::string(to_string(t.variant))},
                {"learning_rate", t.learning_rate},
                {"weight_decay", t.weight_decay},
                {"epochs", t.epochs},
                {"adjacency_dropout", t.adjacency_dropout},
                {"order", t.order},
                {"hidden_dim", t.hidden_dim},
                {"num_layers", t.num_layers},
                {"basis", basis_name(t.basis)},
                {"class_weight_mode", std::string(to_string(t.class_weight_mode))}};
  j["split"] = {{"train_fraction", c.split.train_fraction}};
  json data = json::object();
  if (!c.data.features.empty()) data["features"] = c.data.features.string();
  if (c.data.edges) data["edges"] = c.data.edges->string();
  data["label_column"] = c.data.label_column;
  j["data"] = std::move(data);
  if (c.checkpoint) j["checkpoint"] = c.checkpoint->string();
  json arms = json::array();
  for (const auto& a : c.arms) {
    arms.push_back({{"variant", std::string(to_string(a.variant))},
                    {"class_weight_mode", std::string(to_string(a.class_weight_mode))}});
  }
  j["sweep"] = {{"ratios", c.ratios}, {"arms", std::move(arms)}, {"seeds", c.sweep_seeds}};
  return j;
}

std::string git_blob_hash(std::string_view contents) {
  const std::string header = "blob " + std::to_string(contents.size()) + '\0';
  const std::string blob = header + std::string(contents);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &size, EVP_sha1(), nullptr) != 1) {
    throw IoError("SHA-1 digest failed");
  }
  return hex(digest, size);
}

Dataset load_dataset(const ExperimentConfig& config) {
  if (config.data.features.empty()) return generate_synthetic(config.synthetic);
  return load_csv(config.data.features, config.data.label_column, config.data.edges);
}

TrainEvalResult train_and_evaluate(const Dataset& ds, const TrainConfig& train_config,
                                   const SplitSpec& split_spec) {
  TrainEvalResult r;
  r.split = stratified_split(ds, split_spec);
  const Matrix x = normalized_features(ds);
  const TrainingProblem problem{ds.graph, x, ds.labels, r.split.train, r.split.test, ds.num_classes()};
  TrainResult trained = train(init_model(model_config_for(train_config, problem), train_config.seed),
                              problem, train_config);
  r.model = std::move(trained.model);
  r.history = std::move(trained.history);

  Rng power_rng = make_rng(train_config.seed, "power-iteration");
  const GraphOperator op = prepare_graph(ds.graph, uses_spectral_basis(train_config.variant), power_rng);
  const Prediction pred = predict(r.model, op, x);
  r.confusion = confusion(ds.labels, pred.labels, r.split.test, ds.num_classes());
  r.report = evaluate(r.confusion, ds.class_names);
  return r;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  csv::write_row(os, {"epoch", "loss", "cma", "macro_f1"});
  for (const auto& h : history) {
    csv::write_row(os, {std::to_string(h.epoch), csv::format_double(h.loss), csv::format_double(h.cma),
                        csv::format_double(h.macro_f1)});
  }
  return os.str();
}

std::vector<SweepRow> run_sweep(const Dataset& base, const ExperimentConfig& config) {
  std::vector<std::uint64_t> seeds = config.sweep_seeds;
  if (seeds.empty()) seeds.push_back(config.seed);
  std::vector<SweepRow> rows;
  for (std::uint64_t seed : seeds) {
    for (const SweepArm& arm : config.arms) {
      for (double ratio : config.ratios) {
        SweepRow row;
        row.variant = arm.variant;
        row.class_weight_mode = arm.class_weight_mode;
        row.ratio = ratio;
        row.seed = seed;
        TrainConfig t = config.train;
        t.variant = arm.variant;
        t.class_weight_mode = arm.class_weight_mode;
        t.seed = seed;
        SplitSpec split = config.split;
        split.seed = seed;
        try {
          const Dataset ds = resample_imbalance(base, ratio, seed);
          const TrainEvalResult r = train_and_evaluate(ds, t, split);
          row.ok = true;
          row.status = "ok";
          row.cma = r.report.cma;
          row.g_mean = r.report.g_mean;
          row.mcc = r.report.mcc;
          row.macro_f1 = r.report.prf.macro_f1;
        } catch (const DataError& e) {
          row.status = std::string("skipped: ") + e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  csv::write_row(os, {"variant", "class_weight_mode", "ratio", "cma", "g_mean", "mcc", "macro_f1",
                      "seed", "status"});
  for (const auto& r : rows) {
    auto metric = [&](double v) { return r.ok ? csv::format_double(v) : std::string(); };
    csv::write_row(os, {std::string(to_string(r.variant)), std::string(to_string(r.class_weight_mode)),
                        csv::format_double(r.ratio), metric(r.cma), metric(r.g_mean), metric(r.mcc),
                        metric(r.macro_f1), std::to_string(r.seed), r.status});
  }
  return os.str();
}

CommandResult cmd_generate(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = generate_synthetic(config.synthetic);
  ensure_dir(config.out);
  write_dataset(ds, config.out);
  CommandResult result;
  result.summary["num_nodes"] = ds.size();
  result.summary["num_edges"] = ds.graph.edge_count();
  result.summary["class_counts"] = ds.class_counts();
  write_manifest(config, "generate", input_hashes(config, false), result.summary, start);
  return result;
}

CommandResult cmd_train(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = load_dataset(config);
  ensure_dir(config.out);
  const TrainEvalResult r = train_and_evaluate(ds, config.train, config.split);
  Checkpoint ckpt{r.model, config.train, config.split.train_fraction, ds.class_names, ds.feature_names};
  save_checkpoint(ckpt, config.out / "checkpoint.json");
  csv::write_file_atomic(config.out / "history.csv", history_csv(r.history));
  CommandResult result;
  result.summary = metrics_summary(r.report);
  if (!r.history.empty()) result.summary["final_loss"] = r.history.back().loss;
  write_manifest(config, "train", input_hashes(config, false), result.summary, start);
  return result;
}

CommandResult cmd_evaluate(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (!config.checkpoint) throw ConfigError("evaluate needs a checkpoint");
  const Checkpoint ckpt = load_checkpoint(*config.checkpoint);
  const Dataset ds = load_dataset(config);
  const ModelConfig& mc = ckpt.model.config;
  if (ckpt.class_names != ds.class_names) {
    throw DataError("checkpoint classes do not match the dataset classes");
  }
  if (mc.num_nodes != ds.size() || mc.input_dim != ds.features.cols()) {
    throw DataError("checkpoint expects " + std::to_string(mc.num_nodes) + " nodes x " +
                    std::to_string(mc.input_dim) + " features, dataset has " +
                    std::to_string(ds.size()) + " x " + std::to_string(ds.features.cols()));
  }
  ensure_dir(config.out);

  const Split split = stratified_split(ds, {ckpt.train_fraction, ckpt.train.seed});
  const Matrix x = normalized_features(ds);
  Rng power_rng = make_rng(ckpt.train.seed, "power-iteration");
  const GraphOperator op = prepare_graph(ds.graph, uses_spectral_basis(mc.variant), power_rng);
  const Prediction pred = predict(ckpt.model, op, x);
  const ConfusionMatrix cm = confusion(ds.labels, pred.labels, split.test, ds.num_classes());
  const MetricsReport report = evaluate(cm, ds.class_names);

  csv::write_file_atomic(config.out / "report.json", report_json(report).dump(2) + "\n");
  csv::write_file_atomic(config.out / "confusion.csv", confusion_csv(cm, ds.class_names));
  std::ostringstream scores;
  std::vector<std::string> header = {"node", "true", "predicted"};
  for (const auto& name : ds.class_names) header.push_back("p_" + name);
  csv::write_row(scores, header);
  for (Index i : split.test) {
    std::vector<std::string> row = {ds.graph.node_ids()[static_cast<std::size_t>(i)],
                                    ds.class_names[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])],
                                    ds.class_names[static_cast<std::size_t>(pred.labels[static_cast<std::size_t>(i)])]};
    for (Index c = 0; c < ds.num_classes(); ++c) row.push_back(csv::format_double(pred.probs(i, c)));
    csv::write_row(scores, row);
  }
  csv::write_file_atomic(config.out / "scores.csv", scores.str());

  CommandResult result;
  result.summary = metrics_summary(report);
  write_manifest(config, "evaluate", input_hashes(config, true), result.summary, start);
  return result;
}

CommandResult cmd_sweep_ir(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset base = load_dataset(config);
  ensure_dir(config.out);
  const std::vector<SweepRow> rows = run_sweep(base, config);
  csv::write_file_atomic(config.out / "sweep.csv", sweep_csv(rows));
  CommandResult result;
  Index completed = 0;
  for (const auto& r : rows) {
    if (r.ok) {
      ++completed;
    } else {
      result.warnings.push_back("ratio " + csv::format_double(r.ratio) + " (" +
                                std::string(to_string(r.variant)) + "): " + r.status);
    }
  }
  result.summary["rows"] = rows.size();
  result.summary["completed"] = completed;
  write_manifest(config, "sweep-ir", input_hashes(config, false), result.summary, start);
  return result;
}

CommandResult cmd_spectra(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = load_dataset(config);
  ensure_dir(config.out);
  const SpectralBasis basis = eigendecompose(laplacian(ds.graph));
  write_spectrum(basis, config.out);
  CommandResult result;
  const Index zeros = count_near_zero(basis);
  if (zeros > 1) {
    result.warnings.push_back("graph is disconnected: " + std::to_string(zeros) +
                              " eigenvalues are numerically zero");
  }
  result.summary["num_nodes"] = ds.size();
  result.summary["near_zero_eigenvalues"] = zeros;
  if (basis.size() > 0) {
    result.summary["lambda_min"] = basis.eigenvalues[0];
    result.summary["lambda_max"] = basis.eigenvalues[basis.size() - 1];
  }
  write_manifest(config, "spectra", input_hashes(config, false), result.summary, start);
  return result;
}

}  // namespace cfgnn
