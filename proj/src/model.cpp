#include "cfgnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfgnn/error.hpp"
#include "cfgnn/metrics.hpp"

namespace cfgnn {
namespace {

constexpr double kLambdaPadding = 1.01;

Vector psi_init_row(int order, PolyBasis basis) {
  Vector row = Vector::Zero(order + 1);
  if (order >= 1 && basis == PolyBasis::chebyshev) {
    // 1 - lambda / lambda_max: a smoothing start that still passes the DC.
    row[0] = 0.5;
    row[1] = -0.5;
  } else {
    row[0] = 1.0;
  }
  return row;
}

/// gamma/alpha for every output channel of a layer, as an n x d matrix.
Matrix channel_weights(const ModelConfig& cfg, const LayerParams& p, Index width) {
  const Index n = cfg.num_nodes;
  const Index classes = cfg.num_classes;
  Matrix rows(classes, n);
  for (Index c = 0; c < classes; ++c) {
    for (Index l = 0; l < n; ++l) {
      const double r = p.spectral(c, l);
      rows(c, l) = cfg.variant == Variant::eigenvalue ? softplus(r) : 2.0 * sigmoid(r);
    }
  }
  Matrix out(n, width);
  for (Index j = 0; j < width; ++j) out.col(j) = rows.row(branch_of(j, classes)).transpose();
  return out;
}

double channel_weight_derivative(Variant v, double raw) {
  const double s = sigmoid(raw);
  return v == Variant::eigenvalue ? s : 2.0 * s * (1.0 - s);
}

Matrix add_bias(Matrix z, const Matrix& bias) {
  z.rowwise() += bias.row(0);
  return z;
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::base: return "base";
    case Variant::eigenvalue: return "v";
    case Variant::eigenvector: return "e";
    case Variant::global: return "global";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "base") return Variant::base;
  if (name == "v" || name == "eigenvalue") return Variant::eigenvalue;
  if (name == "e" || name == "eigenvector") return Variant::eigenvector;
  if (name == "global" || name == "global-baseline") return Variant::global;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected base, v, e, global)");
}

bool uses_spectral_basis(Variant v) {
  return v == Variant::eigenvalue || v == Variant::eigenvector;
}

std::string_view to_string(ClassWeightMode m) {
  return m == ClassWeightMode::none ? "none" : "inverse-frequency";
}

ClassWeightMode parse_class_weight_mode(std::string_view name) {
  if (name == "inverse-frequency") return ClassWeightMode::inverse_frequency;
  if (name == "none") return ClassWeightMode::none;
  throw ConfigError("unknown class weight mode '" + std::string(name) +
                    "' (expected inverse-frequency or none)");
}

Index ModelConfig::layer_width(int l) const {
  return l == num_layers - 1 ? num_classes : hidden_dim;
}

Index ModelConfig::layer_input(int l) const { return l == 0 ? input_dim : hidden_dim; }

Parameters Parameters::zeros_like() const {
  Parameters z = *this;
  z.for_each([](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

Index Parameters::count() const {
  Index n = 0;
  for_each([&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

bool Parameters::all_finite() const {
  bool ok = true;
  for_each([&](const std::string&, const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

Model zero_model(const ModelConfig& config) {
  if (config.num_layers < 1 || config.hidden_dim < 1 || config.num_classes < 1 ||
      config.num_nodes < 1 || config.input_dim < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  if (config.order < 0 || config.order > kMaxPolynomialOrder) {
    throw ConfigError("polynomial order out of range");
  }
  Model model{config, {}};
  for (int l = 0; l < config.num_layers; ++l) {
    LayerParams p;
    p.weight = Matrix::Zero(config.layer_input(l), config.layer_width(l));
    p.bias = Matrix::Zero(1, config.layer_width(l));
    p.psi = Matrix::Zero(config.variant == Variant::global ? 1 : config.num_nodes, config.order + 1);
    if (uses_spectral_basis(config.variant)) {
      p.spectral = Matrix::Zero(config.num_classes, config.num_nodes);
    }
    model.params.layers.push_back(std::move(p));
  }
  return model;
}

Model init_model(const ModelConfig& config, std::uint64_t seed) {
  Model model = zero_model(config);
  Rng rng = make_rng(seed, "init");
  const Vector psi_row = psi_init_row(config.order, config.basis);
  for (int l = 0; l < config.num_layers; ++l) {
    LayerParams& p = model.params.layers[static_cast<std::size_t>(l)];
    const double limit = std::sqrt(6.0 / static_cast<double>(p.weight.rows() + p.weight.cols()));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (Index j = 0; j < p.weight.cols(); ++j)
      for (Index i = 0; i < p.weight.rows(); ++i) p.weight(i, j) = uniform(rng);
    p.psi.rowwise() = psi_row.transpose();
    if (config.variant == Variant::eigenvalue) {
      p.spectral = ClassSpectralWeights::identity(config.num_classes, config.num_nodes).raw;
    } else if (config.variant == Variant::eigenvector) {
      p.spectral = EigenvectorAttention::identity(config.num_classes, config.num_nodes).raw;
    }
  }
  return model;
}

void validate(const Model& model) {
  const ModelConfig& cfg = model.config;
  if (static_cast<int>(model.params.layers.size()) != cfg.num_layers) {
    throw DataError("model has " + std::to_string(model.params.layers.size()) +
                    " layers, config says " + std::to_string(cfg.num_layers));
  }
  for (int l = 0; l < cfg.num_layers; ++l) {
    const LayerParams& p = model.params.layers[static_cast<std::size_t>(l)];
    const Index psi_rows = cfg.variant == Variant::global ? 1 : cfg.num_nodes;
    const bool spectral_ok = uses_spectral_basis(cfg.variant)
                                 ? (p.spectral.rows() == cfg.num_classes &&
                                    p.spectral.cols() == cfg.num_nodes)
                                 : p.spectral.size() == 0;
    if (p.weight.rows() != cfg.layer_input(l) || p.weight.cols() != cfg.layer_width(l) ||
        p.bias.rows() != 1 || p.bias.cols() != cfg.layer_width(l) || p.psi.rows() != psi_rows ||
        p.psi.cols() != cfg.order + 1 || !spectral_ok) {
      throw DataError("layer " + std::to_string(l) + " parameters do not match the model config");
    }
  }
  if (!model.params.all_finite()) throw NumericError("model parameters are not finite");
}

double estimate_lambda_max(const SymMatrix& laplacian, Rng& rng, Vector* warm_start) {
  const Index n = laplacian.size();
  const double gershgorin = laplacian.max_abs_row_sum();
  if (!(gershgorin > 0.0)) return 1.0;  // edgeless: any positive scale works

  Vector v0;
  if (warm_start && warm_start->size() == n && warm_start->norm() > 0.0) {
    v0 = warm_start->normalized();
  } else {
    std::normal_distribution<double> normal;
    v0.resize(n);
    for (Index i = 0; i < n; ++i) v0[i] = normal(rng);
    v0.normalize();
  }
  PowerIterationOptions opts;
  opts.eps = 1e-6;
  opts.max_iterations = 1000;
  try {
    EigenPair top = power_iteration(laplacian, v0, opts);
    if (warm_start) *warm_start = top.vector;
    if (!(top.value > 0.0)) return gershgorin;
    return std::min(gershgorin, kLambdaPadding * top.value);
  } catch (const NumericError&) {
    return gershgorin;
  }
}

GraphOperator prepare_graph(const Graph& g, bool with_basis, Rng& rng) {
  GraphOperator op{laplacian(g), 1.0, std::nullopt};
  if (with_basis) {
    op.basis = eigendecompose(op.laplacian);
    const double top = op.basis->size() ? op.basis->eigenvalues.maxCoeff() : 0.0;
    op.lambda_max = top > 1e-12 ? top : 1.0;
  } else {
    op.lambda_max = estimate_lambda_max(op.laplacian, rng);
  }
  return op;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double peak = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - peak).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

std::vector<int> argmax_rows(const Matrix& probs) {
  std::vector<int> labels(static_cast<std::size_t>(probs.rows()), 0);
  for (Index i = 0; i < probs.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < probs.cols(); ++c)
      if (probs(i, c) > probs(i, best)) best = c;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

ForwardCache forward(const Model& model, const GraphOperator& op, const Matrix& x) {
  const ModelConfig& cfg = model.config;
  if (x.rows() != cfg.num_nodes || x.cols() != cfg.input_dim) {
    throw DataError("features are " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                    ", model expects " + std::to_string(cfg.num_nodes) + "x" +
                    std::to_string(cfg.input_dim));
  }
  if (op.laplacian.size() != cfg.num_nodes) throw DataError("graph size does not match model");
  const bool spectral = uses_spectral_basis(cfg.variant);
  if (spectral && !op.basis) throw DataError("spectral variants need an eigenbasis");

  Matrix response;
  if (spectral) response = polynomial_response(op.basis->eigenvalues, cfg.order, cfg.basis, op.lambda_max);

  ForwardCache cache;
  Matrix h = x;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const LayerParams& p = model.params.layers[static_cast<std::size_t>(l)];
    LayerCache lc;
    lc.input = std::move(h);
    lc.transformed = lc.input * p.weight;
    const Index width = lc.transformed.cols();
    Matrix z = Matrix::Zero(cfg.num_nodes, width);

    if (spectral) {
      const Matrix& u = op.basis->vectors;
      lc.transformed_hat = u.transpose() * lc.transformed;
      lc.channel_weights = channel_weights(cfg, p, width);
      const Matrix weighted_hat = lc.channel_weights.cwiseProduct(lc.transformed_hat);
      for (int k = 0; k <= cfg.order; ++k) {
        lc.filtered.push_back(u * (response.col(k).asDiagonal() * weighted_hat));
      }
    } else {
      lc.filtered = polynomial_basis_stack(op.laplacian, lc.transformed, cfg.order, cfg.basis,
                                           op.lambda_max);
    }
    for (int k = 0; k <= cfg.order; ++k) {
      const Matrix& term = lc.filtered[static_cast<std::size_t>(k)];
      if (cfg.variant == Variant::global) {
        z += p.psi(0, k) * term;
      } else {
        z += p.psi.col(k).asDiagonal() * term;
      }
    }
    lc.pre_activation = add_bias(std::move(z), p.bias);
    if (!lc.pre_activation.allFinite()) {
      throw NumericError("non-finite activation in layer " + std::to_string(l) +
                         "; training diverged");
    }
    h = l + 1 < cfg.num_layers ? Matrix(lc.pre_activation.cwiseMax(0.0)) : lc.pre_activation;
    cache.layers.push_back(std::move(lc));
  }
  cache.logits = std::move(h);
  cache.probs = softmax_rows(cache.logits);
  return cache;
}

Prediction predict(const Model& model, const GraphOperator& op, const Matrix& x) {
  Prediction pred;
  pred.probs = forward(model, op, x).probs;
  pred.labels = argmax_rows(pred.probs);
  return pred;
}

Prediction global_baseline_forward(const Model& model, const GraphOperator& op, const Matrix& x) {
  if (model.config.variant != Variant::global) {
    throw ConfigError("global_baseline_forward requires the global variant");
  }
  return predict(model, op, x);
}

Vector class_weights(std::span<const int> labels, std::span<const Index> nodes, Index num_classes,
                     ClassWeightMode mode) {
  Vector w = Vector::Ones(num_classes);
  if (mode == ClassWeightMode::none) return w;
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  for (Index i : nodes) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= num_classes) throw DataError("label out of range");
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  const double n = static_cast<double>(nodes.size());
  for (Index c = 0; c < num_classes; ++c) {
    const double nc = counts[static_cast<std::size_t>(c)];
    const double raw = nc > 0.0 ? n / (static_cast<double>(num_classes) * nc) : kMaxClassWeight;
    w[c] = std::clamp(raw, kMinClassWeight, kMaxClassWeight);
  }
  return w;
}

LossResult class_weighted_cross_entropy_grad(const Matrix& probs, std::span<const int> labels,
                                             std::span<const Index> nodes, const Vector& weights) {
  if (static_cast<Index>(labels.size()) != probs.rows()) {
    throw DataError("label count does not match prediction rows");
  }
  if (weights.size() != probs.cols()) throw DataError("one class weight per class required");
  if (weights.size() && !(weights.minCoeff() > 0.0)) throw DataError("class weights must be positive");

  LossResult out;
  out.dlogits = Matrix::Zero(probs.rows(), probs.cols());
  double total_weight = 0.0;
  for (Index i : nodes) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= probs.cols()) throw DataError("label out of range");
    total_weight += weights[y];
  }
  if (total_weight == 0.0) return out;
  for (Index i : nodes) {
    const int y = labels[static_cast<std::size_t>(i)];
    const double a = weights[y] / total_weight;
    const double p = probs(i, y);
    out.loss -= a * std::log(std::max(p, kProbabilityFloor));
    if (p >= kProbabilityFloor) {
      out.dlogits.row(i) += a * probs.row(i);
      out.dlogits(i, y) -= a;
    }
  }
  return out;
}

double class_weighted_cross_entropy(const Matrix& probs, std::span<const int> labels,
                                    std::span<const Index> nodes, const Vector& weights) {
  return class_weighted_cross_entropy_grad(probs, labels, nodes, weights).loss;
}

double class_weighted_cross_entropy(const Matrix& probs, std::span<const int> labels,
                                    const Vector& weights) {
  std::vector<Index> all(labels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  return class_weighted_cross_entropy(probs, labels, all, weights);
}

Parameters backward(const Model& model, const GraphOperator& op, const ForwardCache& cache,
                    const Matrix& dlogits) {
  const ModelConfig& cfg = model.config;
  if (static_cast<int>(cache.layers.size()) != cfg.num_layers) {
    throw DataError("backward: cache does not come from a forward pass of this model");
  }
  if (dlogits.rows() != cfg.num_nodes || dlogits.cols() != cfg.num_classes) {
    throw DataError("backward: logit gradient has the wrong shape");
  }
  const bool spectral = uses_spectral_basis(cfg.variant);
  Matrix response;
  if (spectral) response = polynomial_response(op.basis->eigenvalues, cfg.order, cfg.basis, op.lambda_max);

  Parameters grad = model.params.zeros_like();
  Matrix dz = dlogits;
  for (int l = cfg.num_layers - 1; l >= 0; --l) {
    const LayerParams& p = model.params.layers[static_cast<std::size_t>(l)];
    const LayerCache& lc = cache.layers[static_cast<std::size_t>(l)];
    LayerParams& g = grad.layers[static_cast<std::size_t>(l)];
    if (l + 1 < cfg.num_layers) {
      dz = dz.cwiseProduct((lc.pre_activation.array() > 0.0).cast<double>().matrix());
    }
    g.bias = dz.colwise().sum();

    // psi
    for (int k = 0; k <= cfg.order; ++k) {
      const Matrix& term = lc.filtered[static_cast<std::size_t>(k)];
      if (cfg.variant == Variant::global) {
        g.psi(0, k) = dz.cwiseProduct(term).sum();
      } else {
        g.psi.col(k) = dz.cwiseProduct(term).rowwise().sum();
      }
    }

    Matrix dm;
    if (spectral) {
      const Matrix& u = op.basis->vectors;
      Matrix d_hat = Matrix::Zero(cfg.num_nodes, dz.cols());
      Matrix d_weights = Matrix::Zero(cfg.num_nodes, dz.cols());
      for (int k = 0; k <= cfg.order; ++k) {
        const Matrix r_hat = u.transpose() * (p.psi.col(k).asDiagonal() * dz);
        const Matrix scaled = response.col(k).asDiagonal() * r_hat;
        d_hat += lc.channel_weights.cwiseProduct(scaled);
        d_weights += lc.transformed_hat.cwiseProduct(scaled);
      }
      for (Index j = 0; j < dz.cols(); ++j) {
        const Index c = branch_of(j, cfg.num_classes);
        for (Index i = 0; i < cfg.num_nodes; ++i) {
          g.spectral(c, i) += d_weights(i, j) * channel_weight_derivative(cfg.variant, p.spectral(c, i));
        }
      }
      dm = u * d_hat;
    } else {
      std::vector<Matrix> ys;
      ys.reserve(static_cast<std::size_t>(cfg.order + 1));
      for (int k = 0; k <= cfg.order; ++k) {
        if (cfg.variant == Variant::global) {
          ys.push_back(p.psi(0, k) * dz);
        } else {
          ys.push_back(p.psi.col(k).asDiagonal() * dz);
        }
      }
      dm = polynomial_combination(op.laplacian, ys, cfg.basis, op.lambda_max);
    }

    g.weight = lc.input.transpose() * dm;
    if (l > 0) dz = dm * p.weight.transpose();
  }
  return grad;
}

void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, long step, double lr, double weight_decay,
                 const AdamConfig& config) {
  if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
    throw DataError("adam_update: block shapes differ");
  }
  if (step < 1) throw DataError("adam_update: step count starts at 1");
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    theta[i] *= 1.0 - lr * weight_decay;
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    theta[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

AdamState AdamState::for_params(const Parameters& p) {
  return AdamState{p.zeros_like(), p.zeros_like(), 0, {}};
}

void adam_step(AdamState& state, Parameters& theta, const Parameters& grad, double lr,
               double weight_decay) {
  ++state.t;
  std::vector<Matrix*> t_blocks, m_blocks, v_blocks;
  std::vector<const Matrix*> g_blocks;
  theta.for_each([&](const std::string&, Matrix& b) { t_blocks.push_back(&b); });
  state.m.for_each([&](const std::string&, Matrix& b) { m_blocks.push_back(&b); });
  state.v.for_each([&](const std::string&, Matrix& b) { v_blocks.push_back(&b); });
  grad.for_each([&](const std::string&, const Matrix& b) { g_blocks.push_back(&b); });
  if (g_blocks.size() != t_blocks.size() || m_blocks.size() != t_blocks.size() ||
      v_blocks.size() != t_blocks.size()) {
    throw DataError("adam_step: parameter structures differ");
  }
  for (std::size_t b = 0; b < t_blocks.size(); ++b) {
    const auto size = static_cast<std::size_t>(t_blocks[b]->size());
    if (static_cast<std::size_t>(g_blocks[b]->size()) != size) {
      throw DataError("adam_step: gradient block has the wrong shape");
    }
    adam_update({t_blocks[b]->data(), size}, {g_blocks[b]->data(), size},
                {m_blocks[b]->data(), size}, {v_blocks[b]->data(), size}, state.t, lr,
                weight_decay, state.config);
  }
}

Graph adjacency_dropout(const Graph& g, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1)");
  if (p == 0.0) return g;
  Matrix w = g.weights();
  const double keep_scale = 1.0 / (1.0 - p);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = i + 1; j < w.cols(); ++j) {
      if (w(i, j) == 0.0) continue;
      const double kept = uniform(rng) < p ? 0.0 : w(i, j) * keep_scale;
      w(i, j) = w(j, i) = kept;
    }
  }
  return Graph::from_weights(std::move(w), g.node_ids());
}

SymMatrix dropout_laplacian(Index n, std::span<const Edge> edges, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1)");
  const double keep_scale = 1.0 / (1.0 - p);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * edges.size() + static_cast<std::size_t>(n));
  Vector degree = Vector::Zero(n);
  for (const Edge& e : edges) {
    if (p > 0.0 && uniform(rng) < p) continue;
    const double w = p > 0.0 ? e.weight * keep_scale : e.weight;
    entries.emplace_back(e.src, e.dst, -w);
    entries.emplace_back(e.dst, e.src, -w);
    degree[e.src] += w;
    degree[e.dst] += w;
  }
  for (Index i = 0; i < n; ++i)
    if (degree[i] != 0.0) entries.emplace_back(i, i, degree[i]);
  SymMatrix::Sparse l(n, n);
  l.setFromTriplets(entries.begin(), entries.end());
  return SymMatrix::from_sparse(std::move(l));
}

TrainConfig TrainConfig::domain_a() { return TrainConfig{}; }

TrainConfig TrainConfig::domain_c() {
  TrainConfig c;
  c.weight_decay = 1e-6;
  c.epochs = 250;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (!(adjacency_dropout >= 0.0 && adjacency_dropout < 1.0)) {
    throw ConfigError("adjacency_dropout must lie in [0, 1)");
  }
  if (order < 0 || order > kMaxPolynomialOrder) throw ConfigError("order out of range");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be positive");
  if (num_layers < 1) throw ConfigError("num_layers must be positive");
}

ModelConfig model_config_for(const TrainConfig& config, const TrainingProblem& problem) {
  ModelConfig m;
  m.variant = config.variant;
  m.num_layers = config.num_layers;
  m.hidden_dim = config.hidden_dim;
  m.order = config.order;
  m.basis = config.basis;
  m.num_nodes = problem.graph.size();
  m.input_dim = problem.features.cols();
  m.num_classes = problem.num_classes;
  return m;
}

TrainResult train(Model model, const TrainingProblem& problem, const TrainConfig& config) {
  config.validate();
  validate(model);
  if (problem.features.rows() != problem.graph.size() ||
      static_cast<Index>(problem.labels.size()) != problem.graph.size()) {
    throw DataError("features, labels and graph disagree on node count");
  }
  if (model.config.num_classes != problem.num_classes) {
    throw DataError("model class count does not match the problem");
  }

  Rng dropout_rng = make_rng(config.seed, "dropout");
  Rng power_rng = make_rng(config.seed, "power-iteration");
  const bool spectral = uses_spectral_basis(model.config.variant);
  const GraphOperator clean = prepare_graph(problem.graph, spectral, power_rng);
  const Vector weights =
      class_weights(problem.labels, problem.train_nodes, problem.num_classes, config.class_weight_mode);
  const auto eval_nodes = problem.eval_nodes.empty() ? problem.train_nodes : problem.eval_nodes;

  AdamState adam = AdamState::for_params(model.params);
  const std::vector<Edge> edges = problem.graph.edges();
  Vector warm_start;
  TrainResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const GraphOperator* op = &clean;
    GraphOperator dropped;
    if (!spectral && config.adjacency_dropout > 0.0) {
      dropped.laplacian = dropout_laplacian(problem.graph.size(), edges, config.adjacency_dropout, dropout_rng);
      dropped.lambda_max = estimate_lambda_max(dropped.laplacian, power_rng, &warm_start);
      op = &dropped;
    }
    const ForwardCache cache = forward(model, *op, problem.features);
    const LossResult loss =
        class_weighted_cross_entropy_grad(cache.probs, problem.labels, problem.train_nodes, weights);
    if (!std::isfinite(loss.loss)) {
      throw NumericError("loss is not finite at epoch " + std::to_string(epoch));
    }
    const Parameters grad = backward(model, *op, cache, loss.dlogits);
    adam_step(adam, model.params, grad, config.learning_rate, config.weight_decay);
    if (!model.params.all_finite()) {
      throw NumericError("parameters diverged at epoch " + std::to_string(epoch));
    }

    const Prediction pred = predict(model, clean, problem.features);
    const ConfusionMatrix cm = confusion(problem.labels, pred.labels, eval_nodes, problem.num_classes);
    result.history.push_back({epoch, loss.loss, cma(cm).value, precision_recall_f1(cm).macro_f1});
  }
  result.model = std::move(model);
  return result;
}

}  // namespace cfgnn
