#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfgnn/filters.hpp"
#include "cfgnn/graph.hpp"
#include "cfgnn/rng.hpp"
#include "cfgnn/spectral.hpp"
#include "cfgnn/types.hpp"

namespace cfgnn {

/// Filter family used by every spectral layer.
///
///  - base:        per-node polynomial filter, sum_k diag(psi_k) p_k(L)
///  - eigenvalue:  base plus per-class eigenvalue weights gamma_c
///  - eigenvector: base plus per-class diagonal eigenvector attention alpha_c
///  - global:      one polynomial filter shared by all nodes
enum class Variant { base, eigenvalue, eigenvector, global };

std::string_view to_string(Variant v);
/// Accepts `base`, `v`, `e`, `global` and the long names.
Variant parse_variant(std::string_view name);
bool uses_spectral_basis(Variant v);

enum class ClassWeightMode { inverse_frequency, none };
std::string_view to_string(ClassWeightMode m);
ClassWeightMode parse_class_weight_mode(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::base;
  int num_layers = 2;
  int hidden_dim = 64;
  int order = 2;
  PolyBasis basis = PolyBasis::chebyshev;
  Index num_nodes = 0;
  Index input_dim = 0;
  Index num_classes = 0;

  /// Width of layer l's output; the last layer emits one column per class.
  Index layer_width(int l) const;
  Index layer_input(int l) const;
};

/// Output channel j of a layer is filtered by class branch j mod C.
inline Index branch_of(Index channel, Index num_classes) { return channel % num_classes; }

struct LayerParams {
  Matrix weight;    // d_in x d_out
  Matrix bias;      // 1 x d_out
  Matrix psi;       // n x (K+1); 1 x (K+1) for the global variant
  Matrix spectral;  // C x n raw gamma/alpha; empty for base and global
};

/// Every trainable tensor, in a fixed order.
struct Parameters {
  std::vector<LayerParams> layers;

  template <typename F>
  void for_each(F&& f) {
    for (std::size_t l = 0; l < layers.size(); ++l) visit_layer(layers[l], l, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t l = 0; l < layers.size(); ++l) visit_layer(layers[l], l, f);
  }

  Parameters zeros_like() const;
  Index count() const;
  bool all_finite() const;

 private:
  template <typename L, typename F>
  static void visit_layer(L& layer, std::size_t l, F& f) {
    const std::string p = "layer" + std::to_string(l) + ".";
    f(p + "weight", layer.weight);
    f(p + "bias", layer.bias);
    f(p + "psi", layer.psi);
    if (layer.spectral.size()) f(p + "spectral", layer.spectral);
  }
};

struct Model {
  ModelConfig config;
  Parameters params;
};

/// Glorot-uniform weights, zero biases, low-pass psi rows, identity
/// gamma/alpha.
Model init_model(const ModelConfig& config, std::uint64_t seed);
/// All parameters zero, including psi.
Model zero_model(const ModelConfig& config);
void validate(const Model& model);

/// Graph-side inputs to the forward pass.
struct GraphOperator {
  SymMatrix laplacian;
  double lambda_max = 1.0;
  std::optional<SpectralBasis> basis;
};

/// Upper bound on the Laplacian spectrum: a power-iteration estimate padded
/// by 1%, capped by the Gershgorin bound (which is also the fallback when the
/// iteration does not converge). `warm_start` is reused across calls.
double estimate_lambda_max(const SymMatrix& laplacian, Rng& rng, Vector* warm_start = nullptr);

/// Laplacian and lambda_max; also the eigenbasis when `with_basis`.
GraphOperator prepare_graph(const Graph& g, bool with_basis, Rng& rng);

struct LayerCache {
  Matrix input;
  Matrix transformed;          // input * weight
  Matrix transformed_hat;      // U^T transformed (spectral variants)
  Matrix channel_weights;      // gamma/alpha per output channel (spectral variants)
  std::vector<Matrix> filtered;  // per-k terms before the psi combination
  Matrix pre_activation;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Matrix logits;
  Matrix probs;
};

struct Prediction {
  Matrix probs;             // n x C, rows sum to one
  std::vector<int> labels;  // argmax, lowest class on ties
};

ForwardCache forward(const Model& model, const GraphOperator& op, const Matrix& x);
Prediction predict(const Model& model, const GraphOperator& op, const Matrix& x);
/// Forward pass of the single shared-filter comparison model.
Prediction global_baseline_forward(const Model& model, const GraphOperator& op, const Matrix& x);

Matrix softmax_rows(const Matrix& logits);
std::vector<int> argmax_rows(const Matrix& probs);

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kMinClassWeight = 0.1;
inline constexpr double kMaxClassWeight = 100.0;

/// w_c = N / (C * N_c) over `nodes`, clipped to [0.1, 100]; all ones for
/// ClassWeightMode::none.
Vector class_weights(std::span<const int> labels, std::span<const Index> nodes, Index num_classes,
                     ClassWeightMode mode);

struct LossResult {
  double loss = 0.0;
  Matrix dlogits;  // gradient with respect to the pre-softmax scores
};

/// -(1 / sum_i w_{y_i}) sum_i w_{y_i} log max(f_{i,y_i}, 1e-12), over `nodes`.
double class_weighted_cross_entropy(const Matrix& probs, std::span<const int> labels,
                                    std::span<const Index> nodes, const Vector& weights);
double class_weighted_cross_entropy(const Matrix& probs, std::span<const int> labels,
                                    const Vector& weights);
LossResult class_weighted_cross_entropy_grad(const Matrix& probs, std::span<const int> labels,
                                             std::span<const Index> nodes, const Vector& weights);

/// Reverse-mode gradient of the loss with respect to every parameter, given
/// the gradient at the logits.
Parameters backward(const Model& model, const GraphOperator& op, const ForwardCache& cache,
                    const Matrix& dlogits);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One Adam update of a flat block with decoupled weight decay: theta is
/// scaled by (1 - lr * weight_decay) and the moments see only `grad`.
/// Parameters without a data gradient then shrink geometrically instead of
/// taking full-size normalized steps toward zero. `step` is 1-based.
void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, long step, double lr, double weight_decay,
                 const AdamConfig& config = {});

struct AdamState {
  Parameters m;
  Parameters v;
  long t = 0;
  AdamConfig config;

  static AdamState for_params(const Parameters& p);
};

void adam_step(AdamState& state, Parameters& theta, const Parameters& grad, double lr,
               double weight_decay);

/// Drops each undirected edge with probability p and rescales survivors by
/// 1 / (1 - p).
Graph adjacency_dropout(const Graph& g, double p, Rng& rng);
/// laplacian(adjacency_dropout(g, p, rng)) in compressed form, built from
/// g.edges() with the same random draws. Used per training epoch.
SymMatrix dropout_laplacian(Index n, std::span<const Edge> edges, double p, Rng& rng);

struct TrainConfig {
  Variant variant = Variant::base;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int epochs = 350;
  double adjacency_dropout = 0.2;
  int order = 2;
  int hidden_dim = 64;
  int num_layers = 2;
  PolyBasis basis = PolyBasis::chebyshev;
  std::uint64_t seed = 0;
  ClassWeightMode class_weight_mode = ClassWeightMode::inverse_frequency;

  /// Simulated digital-twin profile: weight decay 5e-4, 350 epochs.
  static TrainConfig domain_a();
  /// Real-network profile: weight decay 1e-6, 250 epochs.
  static TrainConfig domain_c();
  void validate() const;
};

struct TrainingProblem {
  const Graph& graph;
  const Matrix& features;
  std::span<const int> labels;
  std::span<const Index> train_nodes;
  std::span<const Index> eval_nodes;  // history metrics; train nodes when empty
  Index num_classes = 0;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double cma = 0.0;
  double macro_f1 = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochRecord> history;
};

ModelConfig model_config_for(const TrainConfig& config, const TrainingProblem& problem);

/// Full-graph training with Adam. Edge dropout is resampled each epoch for
/// the polynomial variants; the spectral variants keep the eigenbasis of the
/// clean graph. Throws NumericError when the loss stops being finite.
TrainResult train(Model model, const TrainingProblem& problem, const TrainConfig& config);

}  // namespace cfgnn
