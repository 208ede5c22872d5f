#include "cfgnn/checkpoint.hpp"

#include "json.hpp"

#include "cfgnn/csv.hpp"
#include "cfgnn/error.hpp"

namespace cfgnn {
namespace {

using json = nlohmann::ordered_json;

const char* basis_name(PolyBasis b) { return b == PolyBasis::chebyshev ? "chebyshev" : "monomial"; }

PolyBasis parse_basis(const std::string& s) {
  if (s == "chebyshev") return PolyBasis::chebyshev;
  if (s == "monomial") return PolyBasis::monomial;
  throw DataError("checkpoint: unknown polynomial basis '" + s + "'");
}

}  // namespace

std::string checkpoint_json(const Checkpoint& ckpt) {
  const ModelConfig& m = ckpt.model.config;
  const TrainConfig& t = ckpt.train;
  json j;
  j["format"] = "cfgnn-checkpoint";
  j["version"] = kCheckpointVersion;
  j["seed"] = t.seed;
  j["model"] = {{"variant", std::string(to_string(m.variant))},
                {"num_layers", m.num_layers},
                {"hidden_dim", m.hidden_dim},
                {"order", m.order},
                {"basis", basis_name(m.basis)},
                {"num_nodes", m.num_nodes},
                {"input_dim", m.input_dim},
                {"num_classes", m.num_classes}};
  j["train"] = {{"learning_rate", t.learning_rate},
                {"weight_decay", t.weight_decay},
                {"epochs", t.epochs},
                {"adjacency_dropout", t.adjacency_dropout},
                {"class_weight_mode", std::string(to_string(t.class_weight_mode))},
                {"train_fraction", ckpt.train_fraction}};
  j["class_names"] = ckpt.class_names;
  j["feature_names"] = ckpt.feature_names;
  json tensors = json::array();
  ckpt.model.params.for_each([&](const std::string& name, const Matrix& block) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(block.size()));
    for (Index i = 0; i < block.rows(); ++i)
      for (Index k = 0; k < block.cols(); ++k) data.push_back(block(i, k));
    tensors.push_back({{"name", name}, {"shape", {block.rows(), block.cols()}}, {"data", data}});
  });
  j["tensors"] = std::move(tensors);
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  try {
    if (j.at("format") != "cfgnn-checkpoint") throw DataError("checkpoint: wrong format tag");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw DataError("checkpoint: unsupported version " + j.at("version").dump());
    }
    Checkpoint ckpt;
    const json& m = j.at("model");
    ModelConfig cfg;
    cfg.variant = parse_variant(m.at("variant").get<std::string>());
    cfg.num_layers = m.at("num_layers").get<int>();
    cfg.hidden_dim = m.at("hidden_dim").get<int>();
    cfg.order = m.at("order").get<int>();
    cfg.basis = parse_basis(m.at("basis").get<std::string>());
    cfg.num_nodes = m.at("num_nodes").get<Index>();
    cfg.input_dim = m.at("input_dim").get<Index>();
    cfg.num_classes = m.at("num_classes").get<Index>();

    const json& t = j.at("train");
    TrainConfig& tc = ckpt.train;
    tc.variant = cfg.variant;
    tc.num_layers = cfg.num_layers;
    tc.hidden_dim = cfg.hidden_dim;
    tc.order = cfg.order;
    tc.basis = cfg.basis;
    tc.seed = j.at("seed").get<std::uint64_t>();
    tc.learning_rate = t.at("learning_rate").get<double>();
    tc.weight_decay = t.at("weight_decay").get<double>();
    tc.epochs = t.at("epochs").get<int>();
    tc.adjacency_dropout = t.at("adjacency_dropout").get<double>();
    tc.class_weight_mode = parse_class_weight_mode(t.at("class_weight_mode").get<std::string>());
    ckpt.train_fraction = t.at("train_fraction").get<double>();
    ckpt.class_names = j.at("class_names").get<std::vector<std::string>>();
    ckpt.feature_names = j.at("feature_names").get<std::vector<std::string>>();

    ckpt.model = zero_model(cfg);
    const json& tensors = j.at("tensors");
    std::size_t next = 0;
    ckpt.model.params.for_each([&](const std::string& name, Matrix& block) {
      if (next >= tensors.size()) throw DataError("checkpoint: missing tensor " + name);
      const json& entry = tensors[next++];
      if (entry.at("name") != name) {
        throw DataError("checkpoint: expected tensor " + name + ", found " + entry.at("name").dump());
      }
      const auto shape = entry.at("shape").get<std::vector<Index>>();
      const auto data = entry.at("data").get<std::vector<double>>();
      if (shape.size() != 2 || shape[0] != block.rows() || shape[1] != block.cols() ||
          static_cast<Index>(data.size()) != block.size()) {
        throw DataError("checkpoint: tensor " + name + " has the wrong shape");
      }
      for (Index r = 0; r < block.rows(); ++r)
        for (Index c = 0; c < block.cols(); ++c)
          block(r, c) = data[static_cast<std::size_t>(r * block.cols() + c)];
    });
    if (next != tensors.size()) throw DataError("checkpoint: unexpected extra tensors");
    validate(ckpt.model);
    return ckpt;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  csv::write_file_atomic(path, checkpoint_json(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(csv::read_file(path));
}

}  // namespace cfgnn
