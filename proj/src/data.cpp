#include "cfgnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "cfgnn/csv.hpp"
#include "cfgnn/error.hpp"
#include "cfgnn/rng.hpp"

namespace cfgnn {

std::vector<Index> Dataset::class_counts() const {
  std::vector<Index> counts(class_names.size(), 0);
  for (int y : labels) {
    if (y >= 0 && static_cast<std::size_t>(y) < counts.size()) ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

void Dataset::validate() const {
  if (static_cast<Index>(labels.size()) != size() || graph.size() != size()) {
    throw DataError("dataset: features, labels and graph disagree on node count");
  }
  if (static_cast<Index>(feature_names.size()) != features.cols()) {
    throw DataError("dataset: feature name count does not match feature columns");
  }
  if (!features.allFinite()) throw DataError("dataset: non-finite feature values");
  for (int y : labels) {
    if (y < 0 || y >= num_classes()) throw DataError("dataset: label out of range");
  }
  const auto counts = class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw DataError("dataset: class '" + class_names[c] + "' has no samples");
  }
}

Vector one_hot_encode(std::string_view value, std::span<const std::string> vocabulary) {
  const auto it = std::find(vocabulary.begin(), vocabulary.end(), value);
  if (it == vocabulary.end()) {
    throw DataError("one_hot_encode: '" + std::string(value) + "' is not in the vocabulary");
  }
  Vector v = Vector::Zero(static_cast<Index>(vocabulary.size()));
  v[it - vocabulary.begin()] = 1.0;
  return v;
}

Vector min_max_normalize(const Vector& column) {
  if (column.size() == 0) throw DataError("min_max_normalize: empty column");
  if (column.hasNaN()) throw DataError("min_max_normalize: NaN input");
  if (!column.allFinite()) throw DataError("min_max_normalize: infinite input");
  const double lo = column.minCoeff();
  const double hi = column.maxCoeff();
  if (hi == lo) return Vector::Zero(column.size());
  Vector out = (column.array() - lo) / (hi - lo);
  // Pin the endpoints; (hi - lo) / (hi - lo) can round below one.
  for (Index i = 0; i < column.size(); ++i) {
    if (column[i] == lo) out[i] = 0.0;
    if (column[i] == hi) out[i] = 1.0;
  }
  return out;
}

Matrix min_max_normalize_columns(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  if (x.rows() == 0) return out;
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = min_max_normalize(x.col(j));
  return out;
}

Graph knn_graph(const Matrix& features, int k) {
  const Index n = features.rows();
  if (k < 1) throw ConfigError("knn_graph: k must be positive");
  Matrix x = n ? min_max_normalize_columns(features) : features;
  for (Index i = 0; i < n; ++i) {
    const double norm = x.row(i).norm();
    if (norm > 0.0) x.row(i) /= norm;
  }
  const Matrix sim = x * x.transpose();
  Matrix w = Matrix::Zero(n, n);
  std::vector<Index> order;
  for (Index i = 0; i < n; ++i) {
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    order.erase(order.begin() + i);
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](Index a, Index b) {
                        if (sim(i, a) != sim(i, b)) return sim(i, a) > sim(i, b);
                        return a < b;
                      });
    for (std::size_t t = 0; t < take; ++t) {
      w(i, order[t]) = 1.0;
      w(order[t], i) = 1.0;
    }
  }
  return Graph::from_weights(std::move(w));
}

Dataset load_csv(const std::filesystem::path& features_path, std::string_view label_column,
                 const std::optional<std::filesystem::path>& edges_path) {
  const csv::Table t = csv::read(features_path);
  const long label_col = t.column(label_column);
  if (label_col < 0) {
    throw DataError(features_path.string() + ": no '" + std::string(label_column) + "' column");
  }
  Dataset ds;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (static_cast<long>(j) != label_col) ds.feature_names.push_back(t.header[j]);
  }
  const Index n = static_cast<Index>(t.rows.size());
  const Index d = static_cast<Index>(ds.feature_names.size());
  ds.features.resize(n, d);

  std::vector<std::string> raw_labels;
  raw_labels.reserve(t.rows.size());
  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    Index f = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (static_cast<long>(j) == label_col) continue;
      try {
        ds.features(i, f++) = csv::parse_double(row[j]);
      } catch (const DataError& e) {
        throw DataError(features_path.string() + ": row " + std::to_string(i + 1) + ", column '" +
                        t.header[j] + "': " + e.what());
      }
    }
    raw_labels.push_back(row[static_cast<std::size_t>(label_col)]);
  }

  // First-appearance vocabulary, then sorted for a platform-independent order.
  std::vector<std::string> vocab;
  for (const auto& l : raw_labels)
    if (std::find(vocab.begin(), vocab.end(), l) == vocab.end()) vocab.push_back(l);
  std::sort(vocab.begin(), vocab.end());
  std::map<std::string, int> index;
  for (std::size_t c = 0; c < vocab.size(); ++c) index[vocab[c]] = static_cast<int>(c);
  ds.class_names = vocab;
  for (const auto& l : raw_labels) ds.labels.push_back(index.at(l));

  ds.graph = edges_path ? read_edge_csv(*edges_path, n) : knn_graph(ds.features);
  ds.validate();
  return ds;
}

std::string features_csv(const Dataset& ds) {
  std::ostringstream os;
  std::vector<std::string> header = ds.feature_names;
  header.push_back("label");
  csv::write_row(os, header);
  std::vector<std::string> row;
  for (Index i = 0; i < ds.size(); ++i) {
    row.clear();
    for (Index j = 0; j < ds.features.cols(); ++j) row.push_back(csv::format_double(ds.features(i, j)));
    row.push_back(ds.class_names[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])]);
    csv::write_row(os, row);
  }
  return os.str();
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  csv::write_file_atomic(dir / "features.csv", features_csv(ds));
  csv::write_file_atomic(dir / "edges.csv", edge_csv(ds.graph));
}

void SyntheticConfig::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic: need at least two classes");
  if (feature_dim < 1) throw ConfigError("synthetic: feature_dim must be positive");
  if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0)) {
    throw ConfigError("synthetic: edge probabilities must lie in [0, 1]");
  }
  if (!(noise >= 0.0) || !(separation >= 0.0)) {
    throw ConfigError("synthetic: noise and separation must be nonnegative");
  }
  if (class_counts.empty() && !(normal_fraction > 0.0 && normal_fraction <= 1.0)) {
    throw ConfigError("synthetic: normal_fraction must lie in (0, 1]");
  }
  if (!class_counts.empty() && static_cast<Index>(class_counts.size()) != num_classes) {
    throw ConfigError("synthetic: class_counts must list one count per class");
  }
}

std::vector<Index> SyntheticConfig::resolved_counts() const {
  validate();
  std::vector<Index> counts = class_counts;
  if (counts.empty()) {
    const Index normal = std::llround(normal_fraction * static_cast<double>(num_samples));
    const Index rest = num_samples - normal;
    const Index minority = num_classes - 1;
    counts.push_back(normal);
    for (Index c = 0; c < minority; ++c) counts.push_back(rest / minority + (c < rest % minority ? 1 : 0));
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < 1) {
      throw DataError("synthetic: class " + std::to_string(c) + " would have " +
                      std::to_string(counts[c]) + " samples");
    }
  }
  return counts;
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  const std::vector<Index> counts = config.resolved_counts();
  const Index classes = config.num_classes;
  const Index n = std::accumulate(counts.begin(), counts.end(), Index{0});
  const Index d = config.feature_dim;

  Dataset ds;
  for (Index c = 0; c < classes; ++c) {
    std::string name = std::to_string(c);
    ds.class_names.push_back("class" + std::string(name.size() < 2 ? 2 - name.size() : 0, '0') + name);
  }
  for (Index j = 0; j < d; ++j) {
    std::string name = std::to_string(j);
    ds.feature_names.push_back("f" + std::string(name.size() < 3 ? 3 - name.size() : 0, '0') + name);
  }

  for (Index c = 0; c < classes; ++c)
    ds.labels.insert(ds.labels.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(c)]),
                     static_cast<int>(c));
  Rng order_rng = make_rng(config.seed, "synthetic-order");
  std::shuffle(ds.labels.begin(), ds.labels.end(), order_rng);

  Rng mean_rng = make_rng(config.seed, "synthetic-means");
  std::normal_distribution<double> normal;
  Matrix means(classes, d);
  for (Index c = 0; c < classes; ++c) {
    for (Index j = 0; j < d; ++j) means(c, j) = normal(mean_rng);
    means.row(c) *= config.separation / means.row(c).norm();
  }

  Rng feature_rng = make_rng(config.seed, "synthetic-features");
  ds.features.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      ds.features(i, j) = means(ds.labels[static_cast<std::size_t>(i)], j) + config.noise * normal(feature_rng);
    }
  }

  Rng edge_rng = make_rng(config.seed, "synthetic-edges");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool same = ds.labels[static_cast<std::size_t>(i)] == ds.labels[static_cast<std::size_t>(j)];
      if (uniform(edge_rng) < (same ? config.p_in : config.p_out)) w(i, j) = w(j, i) = 1.0;
    }
  }
  ds.graph = Graph::from_weights(std::move(w));
  ds.validate();
  return ds;
}

double imbalance_ratio(const Dataset& ds) {
  const auto counts = ds.class_counts();
  if (counts.empty()) return 0.0;
  const auto majority = std::max_element(counts.begin(), counts.end());
  const Index total = std::accumulate(counts.begin(), counts.end(), Index{0});
  return static_cast<double>(total - *majority) / static_cast<double>(*majority);
}

Dataset resample_imbalance(const Dataset& ds, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("imbalance ratio must lie in (0, 1]");
  ds.validate();
  const auto counts = ds.class_counts();
  const Index classes = ds.num_classes();
  if (classes < 2) throw DataError("resample_imbalance: need a minority class");
  const Index majority = std::max_element(counts.begin(), counts.end()) - counts.begin();
  const Index n_major = counts[static_cast<std::size_t>(majority)];
  const Index minority_total = ds.size() - n_major;
  const Index target = std::llround(ratio * static_cast<double>(n_major));

  // Largest-remainder apportionment of `target` over the minority classes.
  std::vector<Index> alloc(static_cast<std::size_t>(classes), 0);
  std::vector<std::pair<double, Index>> remainders;
  Index assigned = 0;
  for (Index c = 0; c < classes; ++c) {
    if (c == majority) continue;
    const double quota = static_cast<double>(target) * static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                         static_cast<double>(minority_total);
    const Index base = static_cast<Index>(std::floor(quota));
    alloc[static_cast<std::size_t>(c)] = base;
    assigned += base;
    remainders.push_back({quota - static_cast<double>(base), c});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (Index r = 0; r < target - assigned; ++r) ++alloc[static_cast<std::size_t>(remainders[static_cast<std::size_t>(r)].second)];
  for (Index c = 0; c < classes; ++c) {
    if (c != majority && alloc[static_cast<std::size_t>(c)] == 0) {
      throw DataError("imbalance ratio " + csv::format_double(ratio) + " leaves class '" +
                      ds.class_names[static_cast<std::size_t>(c)] + "' without samples");
    }
  }

  std::vector<std::vector<Index>> members(static_cast<std::size_t>(classes));
  for (Index i = 0; i < ds.size(); ++i) members[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);

  Rng rng = make_rng(seed, "resample");
  std::vector<Index> kept;
  std::vector<Index> extra;
  for (Index c = 0; c < classes; ++c) {
    auto m = members[static_cast<std::size_t>(c)];
    const Index want = c == majority ? n_major : alloc[static_cast<std::size_t>(c)];
    const Index have = static_cast<Index>(m.size());
    if (want <= have) {
      std::shuffle(m.begin(), m.end(), rng);
      kept.insert(kept.end(), m.begin(), m.begin() + want);
    } else {
      kept.insert(kept.end(), m.begin(), m.end());
      std::uniform_int_distribution<Index> pick(0, have - 1);
      for (Index e = 0; e < want - have; ++e) extra.push_back(m[static_cast<std::size_t>(pick(rng))]);
    }
  }
  std::sort(kept.begin(), kept.end());
  kept.insert(kept.end(), extra.begin(), extra.end());

  Dataset out;
  out.class_names = ds.class_names;
  out.feature_names = ds.feature_names;
  out.features.resize(static_cast<Index>(kept.size()), ds.features.cols());
  for (std::size_t a = 0; a < kept.size(); ++a) {
    out.features.row(static_cast<Index>(a)) = ds.features.row(kept[a]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(kept[a])]);
  }
  out.graph = ds.graph.induced(kept);
  out.validate();
  return out;
}

Split stratified_split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(ds.num_classes()));
  for (Index i = 0; i < ds.size(); ++i) members[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);

  Rng rng = make_rng(spec.seed, "split");
  Split split;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    const Index n = static_cast<Index>(m.size());
    if (n < 2) {
      throw DataError("stratified_split: class '" + ds.class_names[c] + "' has " +
                      std::to_string(n) + " sample(s), need at least 2");
    }
    const Index take = std::clamp<Index>(std::llround(spec.train_fraction * static_cast<double>(n)), 1, n - 1);
    std::shuffle(m.begin(), m.end(), rng);
    split.train.insert(split.train.end(), m.begin(), m.begin() + take);
    split.test.insert(split.test.end(), m.begin() + take, m.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace cfgnn
