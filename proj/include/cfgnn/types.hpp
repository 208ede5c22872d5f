#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace cfgnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Largest node count accepted by product-graph constructions.
inline constexpr Index kDefaultMaxNodes = 4096;

}  // namespace cfgnn
