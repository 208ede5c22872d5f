#pragma once

// Central finite-difference check of the analytic model gradient on a small
// random problem. Shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cfgnn/model.hpp"
#include "oracles.hpp"

namespace gradcheck {

struct Probe {
  cfgnn::Model model;
  cfgnn::GraphOperator op;
  cfgnn::Matrix x;
  std::vector<int> labels;
  std::vector<cfgnn::Index> nodes;
  cfgnn::Vector weights;
};

/// n = 12 nodes, D = 4 features, C = 3 classes, order 2, two layers. All
/// parameters are randomized so no block sits at a symmetric point.
inline Probe make_probe(cfgnn::Variant variant, std::uint64_t seed, cfgnn::PolyBasis basis = cfgnn::PolyBasis::chebyshev) {
  using namespace cfgnn;
  std::mt19937_64 rng(seed);
  const Index n = 12, d = 4, c = 3;
  const Graph g = Graph::from_weights(oracle::random_weights(n, 0.3, rng, true));
  ModelConfig cfg;
  cfg.variant = variant;
  cfg.num_layers = 2;
  cfg.hidden_dim = 5;
  cfg.order = 2;
  cfg.basis = basis;
  cfg.num_nodes = n;
  cfg.input_dim = d;
  cfg.num_classes = c;
  Probe p{init_model(cfg, seed), {}, oracle::random_matrix(n, d, rng), {}, {}, {}};
  std::normal_distribution<double> noise(0.0, 0.3);
  p.model.params.for_each([&](const std::string&, Matrix& m) {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] += noise(rng);
  });
  Rng power(seed);
  p.op = prepare_graph(g, uses_spectral_basis(variant), power);
  for (Index i = 0; i < n; ++i) p.labels.push_back(static_cast<int>(i % c));
  std::shuffle(p.labels.begin(), p.labels.end(), rng);
  for (Index i = 0; i < n; ++i)
    if (i % 4 != 3) p.nodes.push_back(i);
  p.weights = class_weights(p.labels, p.nodes, c, ClassWeightMode::inverse_frequency);
  return p;
}

inline double loss_of(const Probe& p, const cfgnn::Model& m) {
  const cfgnn::ForwardCache fc = cfgnn::forward(m, p.op, p.x);
  return cfgnn::class_weighted_cross_entropy(fc.probs, p.labels, p.nodes, p.weights);
}

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over
/// every parameter entry. The floor keeps entries whose true gradient is
/// zero (dead ReLU paths) from dividing round-off by round-off.
inline double max_relative_error(cfgnn::Variant variant, std::uint64_t seed, double step = 1e-5,
                                 double floor = 1e-6) {
  using namespace cfgnn;
  const Probe p = make_probe(variant, seed);
  const ForwardCache fc = forward(p.model, p.op, p.x);
  const LossResult lr = class_weighted_cross_entropy_grad(fc.probs, p.labels, p.nodes, p.weights);
  const Parameters grad = backward(p.model, p.op, fc, lr.dlogits);

  std::vector<const Matrix*> analytic;
  grad.for_each([&](const std::string&, const Matrix& m) { analytic.push_back(&m); });
  Model probe = p.model;
  std::vector<Matrix*> blocks;
  probe.params.for_each([&](const std::string&, Matrix& m) { blocks.push_back(&m); });

  double worst = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (Index i = 0; i < blocks[b]->size(); ++i) {
      double& theta = blocks[b]->data()[i];
      const double saved = theta;
      theta = saved + step;
      const double up = loss_of(p, probe);
      theta = saved - step;
      const double down = loss_of(p, probe);
      theta = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[b]->data()[i];
      const double scale = std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(a - numeric) / scale);
    }
  }
  return worst;
}

}  // namespace gradcheck
