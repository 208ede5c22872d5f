#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "cfgnn/types.hpp"

namespace cfgnn {

/// Real symmetric matrix. Construction checks symmetry to 1e-12 (scaled by
/// the largest entry when that exceeds one).
class SymMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SymMatrix() = default;
  explicit SymMatrix(Matrix m);
  /// Compressed storage only; matrix() is unavailable. The caller guarantees
  /// symmetry (checked to the same tolerance).
  static SymMatrix from_sparse(Sparse s);

  /// Dense entries. Throws DataError for a compressed-only matrix.
  const Matrix& matrix() const;
  bool has_dense() const noexcept { return n_ == 0 || m_.rows() == n_; }
  Index size() const noexcept { return n_; }
  double frobenius_norm() const { return has_dense() ? m_.norm() : sparse_.norm(); }
  /// Largest absolute row sum (the Gershgorin bound for the spectrum).
  double max_abs_row_sum() const;

  /// M * x. Uses a compressed copy when at most a quarter of the entries are
  /// nonzero, as for Laplacians of sparse graphs.
  Matrix apply(const Matrix& x) const;
  Vector apply(const Vector& x) const;
  bool stored_sparse() const noexcept { return !has_dense() || sparse_.nonZeros() > 0; }

 private:
  Index n_ = 0;
  Matrix m_;
  Sparse sparse_;
};

struct Edge {
  Index src = 0;
  Index dst = 0;
  double weight = 1.0;
};

/// Undirected weighted simple graph over dense storage.
///
/// Weights are symmetric, nonnegative, and zero on the diagonal. Inputs that
/// carry small asymmetries (up to 1e-9) are symmetrized as (W + W^T)/2;
/// anything larger is rejected.
class Graph {
 public:
  Graph() = default;

  static Graph from_weights(Matrix weights, std::vector<std::string> node_ids = {});
  static Graph edgeless(Index n);
  /// Builds a graph from undirected edges. Duplicate pairs and self-loops are
  /// rejected.
  static Graph from_edges(Index n, std::span<const Edge> edges,
                          std::vector<std::string> node_ids = {});

  Index size() const noexcept { return weights_.rows(); }
  const Matrix& weights() const noexcept { return weights_; }
  double weight(Index i, Index j) const { return weights_(i, j); }
  const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }

  Vector degrees() const;
  /// Number of node pairs i < j with positive weight.
  Index edge_count() const;
  double total_weight() const;
  /// Edges with src < dst, in row-major order.
  std::vector<Edge> edges() const;

  /// Subgraph on `nodes`, in the given order. Repeated entries become
  /// distinct copies that inherit their original's edges but are not joined
  /// to each other.
  Graph induced(std::span<const Index> nodes) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.weights_ == b.weights_ && a.node_ids_ == b.node_ids_;
  }

 private:
  Graph(Matrix w, std::vector<std::string> ids)
      : weights_(std::move(w)), node_ids_(std::move(ids)) {}

  Matrix weights_;
  std::vector<std::string> node_ids_;
};

/// Combinatorial Laplacian D - W.
SymMatrix laplacian(const Graph& g);

/// Row-major position of product vertex (i1, i2); the ordering is
/// (0,0), (0,1), ..., (n1-1, n2-1).
Index lex_index(Index i1, Index i2, Index n2);
Index lex_index(Index i1, Index i2, Index n1, Index n2);
std::pair<Index, Index> lex_split(Index index, Index n2);

/// Cartesian product G1 □ G2 with lexicographic vertex order.
Graph cartesian_product(const Graph& g1, const Graph& g2,
                        Index max_nodes = kDefaultMaxNodes);

Matrix kronecker_product(const Matrix& a, const Matrix& b,
                         Index max_nodes = kDefaultMaxNodes);

/// A ⊕ B = A ⊗ I_n + I_m ⊗ B.
SymMatrix kronecker_sum(const SymMatrix& a, const SymMatrix& b,
                        Index max_nodes = kDefaultMaxNodes);
Matrix kronecker_sum(const Matrix& a, const Matrix& b, Index max_nodes = kDefaultMaxNodes);

/// Reads `src,dst,weight` rows; node indices refer to positions in [0, n).
Graph read_edge_csv(const std::filesystem::path& path, Index n,
                    std::vector<std::string> node_ids = {});
std::string edge_csv(const Graph& g);

}  // namespace cfgnn
