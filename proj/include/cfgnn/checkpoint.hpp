#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfgnn/model.hpp"

namespace cfgnn {

inline constexpr int kCheckpointVersion = 1;

/// A trained model with the settings needed to reproduce its evaluation.
struct Checkpoint {
  Model model;
  TrainConfig train;
  double train_fraction = 0.8;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
};

/// JSON text: format tag, version, config echo, seed, and tensors as
/// {name, shape: [rows, cols], data: row-major doubles}. Doubles are written
/// in shortest round-trip form, so save -> load is bit-exact.
std::string checkpoint_json(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cfgnn
