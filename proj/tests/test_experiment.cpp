#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "doctest.h"

#include "cfgnn/csv.hpp"
#include "cfgnn/error.hpp"
#include "cfgnn/experiment.hpp"
#include "cfgnn/spectral.hpp"
#include "oracles.hpp"

using namespace cfgnn;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

ExperimentConfig small_config(const fs::path& out, std::uint64_t seed = 3) {
  ExperimentConfig c;
  c.out = out;
  c.synthetic.num_classes = 3;
  c.synthetic.class_counts = {30, 12, 10};
  c.synthetic.feature_dim = 4;
  c.synthetic.p_in = 0.15;
  c.synthetic.p_out = 0.01;
  c.train.epochs = 10;
  c.train.hidden_dim = 8;
  c.apply_seed(seed);
  return c;
}

json manifest_without_clock(const fs::path& p) {
  json j = json::parse(csv::read_file(p));
  j.erase("wall_clock_seconds");
  return j;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CFGNN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("git blob hashes") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("config parsing") {
  const json j = json::parse(R"({
    "seed": 9, "out": "runs/a",
    "train": {"profile": "domain-c", "variant": "e", "order": 3},
    "synthetic": {"num_classes": 4, "class_counts": [5, 4, 3, 2]},
    "split": {"train_fraction": 0.6},
    "data": {"features": "f.csv", "edges": "/abs/e.csv"},
    "sweep": {"ratios": [0.2, 0.4], "arms": [{"variant": "global", "class_weight_mode": "none"}], "seeds": [1, 2]}
  })");
  const ExperimentConfig c = parse_config(j, "/base");
  CHECK(c.seed == 9);
  CHECK(c.train.seed == 9);
  CHECK(c.split.seed == 9);
  CHECK(c.synthetic.seed == 9);
  CHECK(c.out == fs::path("/base/runs/a"));
  CHECK(c.train.weight_decay == 1e-6);
  CHECK(c.train.epochs == 250);
  CHECK(c.train.variant == Variant::eigenvector);
  CHECK(c.train.order == 3);
  CHECK(c.split.train_fraction == 0.6);
  CHECK(c.data.features == fs::path("/base/f.csv"));
  CHECK(*c.data.edges == fs::path("/abs/e.csv"));
  CHECK(c.ratios == std::vector<double>{0.2, 0.4});
  REQUIRE(c.arms.size() == 1);
  CHECK(c.arms[0].variant == Variant::global);
  CHECK(c.sweep_seeds == std::vector<std::uint64_t>{1, 2});

  CHECK(parse_config(json::parse(R"({"variant": "global-baseline"})"), ".").train.variant == Variant::global);
  CHECK(parse_config(json::object(), ".").train.epochs == 350);

  for (const char* bad : {R"({"bogus": 1})", R"({"train": {"lr": 0.1}})", R"({"train": {"epochs": "ten"}})",
                          R"({"train": {"profile": "domain-b"}})", R"({"sweep": {"ratios": [0]}})",
                          R"({"synthetic": {"num_classes": 1}})", R"({"data": {"edges": "e.csv"}})",
                          R"({"variant": "w"})", R"({"split": {"train_fraction": 1}})"}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_config(json::parse(bad), "."), ConfigError);
  }

  // The echo round-trips through the parser.
  const json echo = config_json(c);
  const ExperimentConfig again = parse_config(json::parse(R"({})"), ".");
  CHECK(config_json(again)["train"]["epochs"] == 350);
  CHECK(echo["train"]["variant"] == "e");
}

TEST_CASE("generate") {
  TempDir dir("cfgnn_test_generate");
  ExperimentConfig def;
  def.out = dir.path / "default";
  def.synthetic.feature_dim = 2;
  const CommandResult r = cmd_generate(def);
  const auto counts = r.summary["class_counts"].get<std::vector<Index>>();
  CHECK(counts.size() == 16);
  CHECK(double(counts[0]) / 3642.0 > 0.67);

  ExperimentConfig smoke;
  smoke.synthetic.num_classes = 2;
  smoke.synthetic.class_counts = {6, 4};
  smoke.synthetic.feature_dim = 3;
  smoke.apply_seed(11);
  smoke.out = dir.path / "a";
  cmd_generate(smoke);
  smoke.out = dir.path / "b";
  cmd_generate(smoke);
  const std::string fa = csv::read_file(dir.path / "a" / "features.csv");
  CHECK(line_count(fa) == 11);
  CHECK(csv::parse(fa).rows.size() == 10);
  CHECK(fa == csv::read_file(dir.path / "b" / "features.csv"));
  CHECK(csv::read_file(dir.path / "a" / "edges.csv") == csv::read_file(dir.path / "b" / "edges.csv"));
  json ma = manifest_without_clock(dir.path / "a" / "manifest.json");
  json mb = manifest_without_clock(dir.path / "b" / "manifest.json");
  ma["config"].erase("out");
  mb["config"].erase("out");
  CHECK(ma["seed"] == 11);
  CHECK(ma["command"] == "generate");
  CHECK(ma["summary"] == mb["summary"]);
  CHECK(json::parse(csv::read_file(dir.path / "a" / "manifest.json")).contains("wall_clock_seconds"));
}

TEST_CASE("train and evaluate") {
  TempDir dir("cfgnn_test_train");
  ExperimentConfig c = small_config(dir.path / "t1");
  cmd_train(c);
  const std::string history = csv::read_file(dir.path / "t1" / "history.csv");
  CHECK(line_count(history) == 11);
  CHECK(history.rfind("epoch,loss,cma,macro_f1\n", 0) == 0);

  c.out = dir.path / "t2";
  cmd_train(c);
  CHECK(csv::read_file(dir.path / "t2" / "history.csv") == history);
  CHECK(csv::read_file(dir.path / "t2" / "checkpoint.json") == csv::read_file(dir.path / "t1" / "checkpoint.json"));

  c.checkpoint = dir.path / "t1" / "checkpoint.json";
  c.out = dir.path / "e1";
  const CommandResult ev = cmd_evaluate(c);
  c.out = dir.path / "e2";
  cmd_evaluate(c);
  for (const char* f : {"report.json", "confusion.csv", "scores.csv"}) {
    CHECK(csv::read_file(dir.path / "e1" / f) == csv::read_file(dir.path / "e2" / f));
  }
  const json report = json::parse(csv::read_file(dir.path / "e1" / "report.json"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : report.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"accuracy", "per_class", "macro_f1", "weighted_f1", "g_mean", "mcc", "cma"});
  CHECK(report["macro_f1"] == ev.summary["macro_f1"]);
  const auto scores = csv::parse(csv::read_file(dir.path / "e1" / "scores.csv"));
  CHECK(scores.header.size() == 6);
  CHECK(scores.rows.size() == stratified_split(load_dataset(c), c.split).test.size());

  // Training and evaluation see the same test split.
  const json train_manifest = json::parse(csv::read_file(dir.path / "t1" / "manifest.json"));
  CHECK(train_manifest["summary"]["cma"] == ev.summary["cma"]);

  ExperimentConfig other = small_config(dir.path / "bad");
  other.synthetic.class_counts = {30, 12, 11};
  other.checkpoint = c.checkpoint;
  CHECK_THROWS_AS(cmd_evaluate(other), DataError);
  other.checkpoint.reset();
  CHECK_THROWS_AS(cmd_evaluate(other), ConfigError);

  for (Variant v : {Variant::eigenvalue, Variant::eigenvector, Variant::global}) {
    ExperimentConfig cv = small_config(dir.path / ("v_" + std::string(to_string(v))));
    cv.train.variant = v;
    CHECK_NOTHROW(cmd_train(cv));
  }
}

TEST_CASE("perfectly separable data scores 1.0") {
  TempDir dir("cfgnn_test_perfect");
  ExperimentConfig c = small_config(dir.path / "t");
  c.synthetic.noise = 0.0;
  c.synthetic.separation = 5.0;
  c.train.epochs = 150;
  // Per-node coefficients of unlabeled nodes get no gradient in the last
  // layer, so the shared filter is the variant that generalizes exactly here.
  c.train.variant = Variant::global;
  cmd_train(c);
  c.checkpoint = dir.path / "t" / "checkpoint.json";
  c.out = dir.path / "e";
  CHECK(cmd_evaluate(c).summary["macro_f1"] == 1.0);
}

TEST_CASE("untrained model scores the majority prior") {
  TempDir dir("cfgnn_test_prior");
  ExperimentConfig c;
  c.out = dir.path;
  c.synthetic.num_samples = 400;
  c.synthetic.feature_dim = 3;
  c.synthetic.normal_fraction = 0.6;
  c.apply_seed(5);
  const Dataset ds = load_dataset(c);
  ModelConfig mc;
  mc.variant = Variant::base;
  mc.num_nodes = ds.size();
  mc.input_dim = 3;
  mc.num_classes = 16;
  Checkpoint ckpt{zero_model(mc), c.train, c.split.train_fraction, ds.class_names, ds.feature_names};
  save_checkpoint(ckpt, dir.path / "zero.json");
  c.checkpoint = dir.path / "zero.json";
  const CommandResult r = cmd_evaluate(c);
  const Split split = stratified_split(ds, c.split);
  double majority = 0.0;
  for (Index i : split.test) majority += ds.labels[static_cast<std::size_t>(i)] == 0;
  CHECK(r.summary["accuracy"].get<double>() == doctest::Approx(majority / double(split.test.size())).epsilon(1e-15));
}

TEST_CASE("imbalance sweep") {
  TempDir dir("cfgnn_test_sweep");
  ExperimentConfig c = small_config(dir.path / "s1");
  c.synthetic.class_counts = {40, 20, 20};
  c.train.epochs = 5;
  c.ratios = {0.1, 0.5, 0.9};
  cmd_sweep_ir(c);
  const std::string table = csv::read_file(dir.path / "s1" / "sweep.csv");
  const auto parsed = csv::parse(table);
  CHECK(parsed.header == std::vector<std::string>{"variant", "class_weight_mode", "ratio", "cma", "g_mean", "mcc",
                                                  "macro_f1", "seed", "status"});
  REQUIRE(parsed.rows.size() == 6);
  CHECK(parsed.rows[0][0] == "base");
  CHECK(parsed.rows[3][0] == "global");
  CHECK(parsed.rows[3][1] == "none");
  c.out = dir.path / "s2";
  cmd_sweep_ir(c);
  CHECK(csv::read_file(dir.path / "s2" / "sweep.csv") == table);

  // r = 0.02 leaves each minority class below two samples: skipped, not fatal.
  c.ratios = {0.02, 0.5};
  c.out = dir.path / "s3";
  const CommandResult r = cmd_sweep_ir(c);
  CHECK(r.warnings.size() == 2);
  const auto rows = csv::parse(csv::read_file(dir.path / "s3" / "sweep.csv")).rows;
  CHECK(rows[0][8].rfind("skipped", 0) == 0);
  CHECK(rows[0][3].empty());
  CHECK(rows[1][8] == "ok");
}

TEST_CASE("spectra") {
  TempDir dir("cfgnn_test_spectra");
  csv::write_file_atomic(dir.path / "f.csv", "x,label\n1,a\n2,a\n3,b\n4,b\n");
  csv::write_file_atomic(dir.path / "c4.csv", "src,dst,weight\n0,1,1\n1,2,1\n2,3,1\n0,3,1\n");
  csv::write_file_atomic(dir.path / "none.csv", "src,dst,weight\n");
  ExperimentConfig c;
  c.data.features = dir.path / "f.csv";
  c.data.edges = dir.path / "c4.csv";
  c.out = dir.path / "c4";
  CHECK(cmd_spectra(c).warnings.empty());
  const auto ev = csv::parse(csv::read_file(dir.path / "c4" / "eigenvalues.csv"));
  REQUIRE(ev.rows.size() == 4);
  const double expected[] = {0, 2, 2, 4};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(csv::parse_double(ev.rows[static_cast<std::size_t>(i)][1]) - expected[i]) < 1e-12);
  const Matrix u = read_dense_csv(dir.path / "c4" / "eigenvectors.csv");
  CHECK((u.transpose() * u - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);

  c.data.edges = dir.path / "none.csv";
  c.out = dir.path / "none";
  const CommandResult r = cmd_spectra(c);
  CHECK(r.warnings.size() == 1);
  const auto zeros = csv::parse(csv::read_file(dir.path / "none" / "eigenvalues.csv"));
  for (const auto& row : zeros.rows) CHECK(csv::parse_double(row[1]) == 0.0);
}

TEST_CASE("command-line exit codes") {
  TempDir dir("cfgnn_test_cli");
  const std::string d = dir.path.string();
  std::ofstream(dir.path / "ok.json") << R"({"seed": 2, "synthetic": {"num_classes": 2, "class_counts": [8, 6], "feature_dim": 2, "p_in": 0.3}, "train": {"epochs": 3, "hidden_dim": 4}})";
  std::ofstream(dir.path / "unknown.json") << R"({"sede": 2})";
  std::ofstream(dir.path / "diverge.json") << R"({"synthetic": {"num_classes": 2, "class_counts": [8, 6], "feature_dim": 2}, "train": {"epochs": 3, "learning_rate": 1e300}})";
  std::ofstream(dir.path / "nolabel.csv") << "x,y\n1,2\n";
  std::ofstream(dir.path / "blocker") << "file, not a directory";

  CHECK(run_cli("generate --config " + d + "/ok.json --out " + d + "/gen") == 0);
  CHECK(run_cli("train --config " + d + "/ok.json --variant global --seed 4 --out " + d + "/tr") == 0);
  CHECK(run_cli("evaluate --config " + d + "/ok.json --checkpoint " + d + "/tr/checkpoint.json --seed 4 --out " + d + "/ev") == 0);
  CHECK(run_cli("sweep-ir --config " + d + "/ok.json --ratios 0.5,1 --out " + d + "/sw") == 0);
  CHECK(run_cli("spectra --config " + d + "/ok.json --out " + d + "/sp") == 0);
  CHECK(fs::exists(dir.path / "ev" / "report.json"));
  CHECK(csv::parse(csv::read_file(dir.path / "sw" / "sweep.csv")).rows.size() == 4);

  CHECK(run_cli("train --config " + d + "/unknown.json --out " + d + "/x") == 2);
  CHECK(run_cli("train --variant q --out " + d + "/x") == 2);
  CHECK(run_cli("sweep-ir --ratios 0.5,abc --out " + d + "/x") == 2);
  CHECK(run_cli("bogus") == 2);
  CHECK(run_cli("train --data " + d + "/nolabel.csv --out " + d + "/x") == 3);
  CHECK(run_cli("train --config " + d + "/diverge.json --out " + d + "/x") == 4);
  CHECK(run_cli("generate --config " + d + "/ok.json --out " + d + "/blocker/sub") == 5);
}
