#include "cfgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cfgnn/csv.hpp"
#include "cfgnn/error.hpp"

namespace cfgnn {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kIngestAsymmetryTol = 1e-9;

std::vector<std::string> default_ids(Index n) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

void check_product_size(Index a, Index b, Index max_nodes) {
  if (a != 0 && b > max_nodes / a) {
    throw ConfigError("product size " + std::to_string(a) + "x" + std::to_string(b) +
                      " exceeds maximum of " + std::to_string(max_nodes));
  }
  if (a * b > max_nodes) {
    throw ConfigError("product size " + std::to_string(a * b) + " exceeds maximum of " +
                      std::to_string(max_nodes));
  }
}

}  // namespace

SymMatrix::SymMatrix(Matrix m) : n_(m.rows()), m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DataError("symmetric matrix must be square");
  if (!m_.allFinite()) throw DataError("symmetric matrix has non-finite entries");
  const double scale = std::max(1.0, m_.size() ? m_.cwiseAbs().maxCoeff() : 0.0);
  if (m_.size() && (m_ - m_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw DataError("matrix is not symmetric");
  }
  const Index nnz = (m_.array() != 0.0).count();
  if (nnz > 0 && 4 * nnz <= m_.size()) sparse_ = m_.sparseView();
}

SymMatrix SymMatrix::from_sparse(Sparse s) {
  if (s.rows() != s.cols()) throw DataError("symmetric matrix must be square");
  s.makeCompressed();
  double peak = 0.0;
  for (Index k = 0; k < s.nonZeros(); ++k) {
    const double v = s.valuePtr()[k];
    if (!std::isfinite(v)) throw DataError("symmetric matrix has non-finite entries");
    peak = std::max(peak, std::abs(v));
  }
  const Sparse t = s.transpose();
  const double asym = s.nonZeros() ? Sparse(s - t).coeffs().cwiseAbs().maxCoeff() : 0.0;
  if (asym > kSymmetryTol * std::max(1.0, peak)) throw DataError("matrix is not symmetric");
  SymMatrix out;
  out.n_ = s.rows();
  out.sparse_ = std::move(s);
  return out;
}

const Matrix& SymMatrix::matrix() const {
  if (!has_dense()) throw DataError("matrix is stored in compressed form only");
  return m_;
}

double SymMatrix::max_abs_row_sum() const {
  if (n_ == 0) return 0.0;
  if (!has_dense()) {
    double best = 0.0;
    for (Index i = 0; i < n_; ++i) {
      double row = 0.0;
      for (Sparse::InnerIterator it(sparse_, i); it; ++it) row += std::abs(it.value());
      best = std::max(best, row);
    }
    return best;
  }
  return m_.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix SymMatrix::apply(const Matrix& x) const {
  if (x.rows() != n_) throw DataError("SymMatrix::apply: dimension mismatch");
  if (stored_sparse()) return sparse_ * x;
  return m_ * x;
}

Vector SymMatrix::apply(const Vector& x) const {
  if (x.size() != n_) throw DataError("SymMatrix::apply: dimension mismatch");
  if (stored_sparse()) return sparse_ * x;
  return m_ * x;
}

Graph Graph::from_weights(Matrix w, std::vector<std::string> node_ids) {
  if (w.rows() != w.cols()) throw DataError("weight matrix must be square");
  const Index n = w.rows();
  if (!w.allFinite()) throw DataError("weight matrix has non-finite entries");
  if (n > 0) {
    if ((w - w.transpose()).cwiseAbs().maxCoeff() > kIngestAsymmetryTol) {
      throw DataError("weight matrix is not symmetric");
    }
    if (w.diagonal().cwiseAbs().maxCoeff() > 0.0) throw DataError("graph has self-loops");
    if (w.minCoeff() < 0.0) throw DataError("graph has negative weights");
    Matrix sym = 0.5 * (w + w.transpose());
    w = std::move(sym);
  }
  if (node_ids.empty()) node_ids = default_ids(n);
  if (static_cast<Index>(node_ids.size()) != n) {
    throw DataError("node id count does not match weight matrix");
  }
  return Graph(std::move(w), std::move(node_ids));
}

Graph Graph::edgeless(Index n) { return from_weights(Matrix::Zero(n, n)); }

Graph Graph::from_edges(Index n, std::span<const Edge> edges,
                        std::vector<std::string> node_ids) {
  Matrix w = Matrix::Zero(n, n);
  std::set<std::pair<Index, Index>> seen;
  for (const Edge& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw DataError("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                      ") references a node outside [0," + std::to_string(n) + ")");
    }
    if (e.src == e.dst) throw DataError("self-loop on node " + std::to_string(e.src));
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw DataError("edge weight must be finite and nonnegative");
    }
    auto key = std::minmax(e.src, e.dst);
    if (!seen.insert({key.first, key.second}).second) {
      throw DataError("duplicate edge (" + std::to_string(key.first) + "," +
                      std::to_string(key.second) + ")");
    }
    w(e.src, e.dst) = e.weight;
    w(e.dst, e.src) = e.weight;
  }
  return from_weights(std::move(w), std::move(node_ids));
}

Vector Graph::degrees() const { return weights_.rowwise().sum(); }

Index Graph::edge_count() const {
  Index count = 0;
  for (Index j = 0; j < size(); ++j)
    for (Index i = 0; i < j; ++i)
      if (weights_(i, j) > 0.0) ++count;
  return count;
}

double Graph::total_weight() const { return 0.5 * weights_.sum(); }

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (Index i = 0; i < size(); ++i)
    for (Index j = i + 1; j < size(); ++j)
      if (weights_(i, j) > 0.0) out.push_back({i, j, weights_(i, j)});
  return out;
}

Graph Graph::induced(std::span<const Index> nodes) const {
  const Index m = static_cast<Index>(nodes.size());
  Matrix w = Matrix::Zero(m, m);
  std::vector<std::string> ids;
  ids.reserve(nodes.size());
  std::vector<int> copies(static_cast<std::size_t>(size()), 0);
  for (Index a = 0; a < m; ++a) {
    const Index u = nodes[static_cast<std::size_t>(a)];
    if (u < 0 || u >= size()) throw DataError("induced: node index out of range");
    const int c = copies[static_cast<std::size_t>(u)]++;
    ids.push_back(c == 0 ? node_ids_[static_cast<std::size_t>(u)]
                         : node_ids_[static_cast<std::size_t>(u)] + "#" + std::to_string(c));
    for (Index b = 0; b < a; ++b) {
      const Index v = nodes[static_cast<std::size_t>(b)];
      if (u == v) continue;
      w(a, b) = w(b, a) = weights_(u, v);
    }
  }
  return Graph(std::move(w), std::move(ids));
}

SymMatrix laplacian(const Graph& g) {
  Matrix l = -g.weights();
  l.diagonal() = g.degrees();
  return SymMatrix(std::move(l));
}

Index lex_index(Index i1, Index i2, Index n2) {
  if (i1 < 0 || i2 < 0 || i2 >= n2) throw DataError("lex_index: index out of range");
  return i1 * n2 + i2;
}

Index lex_index(Index i1, Index i2, Index n1, Index n2) {
  if (i1 >= n1) throw DataError("lex_index: index out of range");
  return lex_index(i1, i2, n2);
}

std::pair<Index, Index> lex_split(Index index, Index n2) {
  if (index < 0 || n2 <= 0) throw DataError("lex_split: index out of range");
  return {index / n2, index % n2};
}

Graph cartesian_product(const Graph& g1, const Graph& g2, Index max_nodes) {
  const Index n1 = g1.size(), n2 = g2.size();
  check_product_size(n1, n2, max_nodes);
  Matrix w = kronecker_sum(g1.weights(), g2.weights(), max_nodes);
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n1 * n2));
  for (Index a = 0; a < n1; ++a)
    for (Index b = 0; b < n2; ++b)
      ids.push_back("(" + g1.node_ids()[static_cast<std::size_t>(a)] + "," +
                    g2.node_ids()[static_cast<std::size_t>(b)] + ")");
  return Graph::from_weights(std::move(w), std::move(ids));
}

Matrix kronecker_product(const Matrix& a, const Matrix& b, Index max_nodes) {
  check_product_size(a.rows(), b.rows(), max_nodes);
  check_product_size(a.cols(), b.cols(), max_nodes);
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kronecker_sum(const Matrix& a, const Matrix& b, Index max_nodes) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) {
    throw DataError("kronecker_sum requires square matrices");
  }
  const Index m = a.rows(), n = b.rows();
  check_product_size(m, n, max_nodes);
  Matrix out = kronecker_product(a, Matrix::Identity(n, n), max_nodes);
  for (Index i = 0; i < m; ++i) out.block(i * n, i * n, n, n) += b;
  return out;
}

SymMatrix kronecker_sum(const SymMatrix& a, const SymMatrix& b, Index max_nodes) {
  return SymMatrix(kronecker_sum(a.matrix(), b.matrix(), max_nodes));
}

Graph read_edge_csv(const std::filesystem::path& path, Index n,
                    std::vector<std::string> node_ids) {
  const csv::Table t = csv::read(path);
  const long src = t.column("src"), dst = t.column("dst"), weight = t.column("weight");
  if (src < 0 || dst < 0 || weight < 0 || t.header.size() != 3) {
    throw DataError(path.string() + ": edge file header must be src,dst,weight");
  }
  std::vector<Edge> edges;
  edges.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    edges.push_back({static_cast<Index>(csv::parse_int(row[static_cast<std::size_t>(src)])),
                     static_cast<Index>(csv::parse_int(row[static_cast<std::size_t>(dst)])),
                     csv::parse_double(row[static_cast<std::size_t>(weight)])});
  }
  return Graph::from_edges(n, edges, std::move(node_ids));
}

std::string edge_csv(const Graph& g) {
  std::ostringstream os;
  os << "src,dst,weight\n";
  for (const Edge& e : g.edges()) {
    os << e.src << ',' << e.dst << ',' << csv::format_double(e.weight) << '\n';
  }
  return os.str();
}

}  // namespace cfgnn
