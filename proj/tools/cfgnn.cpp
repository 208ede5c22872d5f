// cfgnn: dataset generation, training, evaluation, imbalance sweeps and
// spectrum dumps. Exit codes: 0 ok, 1 unexpected failure, 2 config or usage,
// 3 data, 4 numeric, 5 i/o.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cfgnn/csv.hpp"
#include "cfgnn/error.hpp"
#include "cfgnn/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::string out;
  std::string ratios;
  std::string data;
  std::string edges;
  std::string checkpoint;
};

std::vector<double> parse_ratio_list(const std::string& text) {
  std::vector<double> ratios;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string item = text.substr(pos, comma - pos);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    try {
      ratios.push_back(cfgnn::csv::parse_double(item));
    } catch (const cfgnn::DataError&) {
      throw cfgnn::ConfigError("--ratios: '" + item + "' is not a number");
    }
    pos = comma + 1;
  }
  return ratios;
}

cfgnn::ExperimentConfig build_config(const Options& o) {
  cfgnn::ExperimentConfig c = o.config.empty() ? cfgnn::ExperimentConfig{} : cfgnn::load_config(o.config);
  if (!o.variant.empty()) c.train.variant = cfgnn::parse_variant(o.variant);
  if (!o.out.empty()) c.out = o.out;
  if (!o.ratios.empty()) c.ratios = parse_ratio_list(o.ratios);
  if (!o.data.empty()) c.data.features = o.data;
  if (!o.edges.empty()) c.data.edges = o.edges;
  if (!o.checkpoint.empty()) c.checkpoint = o.checkpoint;
  if (c.data.edges && c.data.features.empty()) throw cfgnn::ConfigError("--edges needs --data");
  c.apply_seed(o.seed.value_or(c.seed));
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Class-localized spectral graph filters for imbalanced node classification"};
  app.require_subcommand(1);
  Options o;

  using Command = cfgnn::CommandResult (*)(const cfgnn::ExperimentConfig&);
  Command selected = nullptr;
  auto add = [&](const char* name, const char* help, Command cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--seed", o.seed, "run seed; overrides the config");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--data", o.data, "feature CSV; synthetic data when omitted");
    sub->add_option("--edges", o.edges, "edge CSV (src,dst,weight); k-NN graph when omitted");
    sub->callback([&selected, cmd] { selected = cmd; });
    return sub;
  };
  add("generate", "write a synthetic dataset", cfgnn::cmd_generate);
  add("train", "train a model, write checkpoint and history", cfgnn::cmd_train)
      ->add_option("--variant", o.variant, "base, v, e or global");
  add("evaluate", "score a checkpoint on the test split", cfgnn::cmd_evaluate)
      ->add_option("--checkpoint", o.checkpoint, "checkpoint.json from train");
  CLI::App* sweep = add("sweep-ir", "imbalance-ratio sweep", cfgnn::cmd_sweep_ir);
  sweep->add_option("--ratios", o.ratios, "comma-separated ratios in (0, 1]");
  add("spectra", "dump the Laplacian eigendecomposition", cfgnn::cmd_spectra);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Bad flags count as configuration errors.
    return app.exit(e) == 0 ? 0 : static_cast<int>(cfgnn::ErrorKind::config);
  }

  try {
    const cfgnn::CommandResult result = selected(build_config(o));
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << result.summary.dump() << '\n';
    return 0;
  } catch (const cfgnn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
