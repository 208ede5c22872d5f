#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfgnn/graph.hpp"
#include "cfgnn/types.hpp"

namespace cfgnn {

/// Node features, labels and the graph over the samples.
struct Dataset {
  Matrix features;  // N x D
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  Graph graph;

  Index size() const noexcept { return features.rows(); }
  Index num_classes() const noexcept { return static_cast<Index>(class_names.size()); }
  std::vector<Index> class_counts() const;
  /// Throws DataError unless every class occurs, features are finite and the
  /// graph, labels and features agree on N.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

Vector one_hot_encode(std::string_view value, std::span<const std::string> vocabulary);

/// (x - min) / (max - min); a constant column maps to zeros.
Vector min_max_normalize(const Vector& column);
Matrix min_max_normalize_columns(const Matrix& x);

inline constexpr int kDefaultKnn = 10;

/// Symmetric unit-weight k-nearest-neighbour graph (union of the directed
/// neighbour lists) under cosine similarity of min-max normalized rows.
Graph knn_graph(const Matrix& features, int k = kDefaultKnn);

/// Feature CSV with a label column; the class vocabulary is sorted
/// lexicographically. Without an edge file a k-NN graph is built.
Dataset load_csv(const std::filesystem::path& features_path, std::string_view label_column = "label",
                 const std::optional<std::filesystem::path>& edges_path = std::nullopt);

std::string features_csv(const Dataset& ds);
/// Writes features.csv and edges.csv into `dir`.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

struct SyntheticConfig {
  Index num_classes = 16;
  Index num_samples = 3642;
  /// Share of the majority ("normal") class 0; the remainder is split evenly
  /// over the other classes unless `class_counts` is given.
  double normal_fraction = 0.674;
  std::vector<Index> class_counts;
  Index feature_dim = 32;
  double p_in = 0.02;
  double p_out = 0.0005;
  double separation = 3.0;  // norm of each class mean
  double noise = 1.0;       // isotropic feature noise
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<Index> resolved_counts() const;
};

/// Stochastic block model with one community per class and Gaussian class
/// clusters for features. Node order is shuffled.
Dataset generate_synthetic(const SyntheticConfig& config);

/// Total minority samples over majority samples.
double imbalance_ratio(const Dataset& ds);

/// Resamples the minority classes so that their total equals
/// round(r * majority), split in proportion to their current sizes.
/// Shrinking draws without replacement; growing keeps every sample and adds
/// copies drawn with replacement. The majority class is untouched.
Dataset resample_imbalance(const Dataset& ds, double ratio, std::uint64_t seed);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Per class: round(f * n_c) training samples, kept in [1, n_c - 1].
Split stratified_split(const Dataset& ds, const SplitSpec& spec);

}  // namespace cfgnn
