#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerical code paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cfgnn/graph.hpp"
#include "cfgnn/types.hpp"

namespace oracle {

using cfgnn::Index;
using cfgnn::Matrix;
using cfgnn::Vector;

inline Matrix path_weights(Index n) {
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) w(i, i + 1) = w(i + 1, i) = 1.0;
  return w;
}

inline Matrix cycle_weights(Index n) {
  Matrix w = path_weights(n);
  if (n > 2) w(0, n - 1) = w(n - 1, 0) = 1.0;
  return w;
}

/// Random weighted graph; a spanning path is added when `connected`.
inline Matrix random_weights(Index n, double density, std::mt19937_64& rng, bool connected) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (u(rng) < density) w(i, j) = w(j, i) = weight(rng);
  if (connected) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k + 1 < perm.size(); ++k) {
      if (w(perm[k], perm[k + 1]) == 0.0) w(perm[k], perm[k + 1]) = w(perm[k + 1], perm[k]) = weight(rng);
    }
  }
  return w;
}

inline Matrix random_symmetric(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = g(rng);
  return (a + a.transpose()) / 2.0;
}

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) a(i, j) = g(rng);
  return a;
}

/// D - W written out entry by entry.
inline Matrix laplacian_loops(const Matrix& w) {
  const Index n = w.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j) {
        l(i, j) = -w(i, j);
        l(i, i) += w(i, j);
      }
    }
  }
  return l;
}

/// Cartesian product adjacency by enumerating every pair of product vertices:
/// (a1,a2) ~ (b1,b2) iff a1 == b1 and a2 ~ b2, or a2 == b2 and a1 ~ b1.
inline Matrix cartesian_enumerate(const Matrix& w1, const Matrix& w2) {
  const Index n1 = w1.rows(), n2 = w2.rows();
  Matrix w = Matrix::Zero(n1 * n2, n1 * n2);
  for (Index a1 = 0; a1 < n1; ++a1)
    for (Index a2 = 0; a2 < n2; ++a2)
      for (Index b1 = 0; b1 < n1; ++b1)
        for (Index b2 = 0; b2 < n2; ++b2) {
          double v = 0.0;
          if (a1 == b1) v += w2(a2, b2);
          if (a2 == b2) v += w1(a1, b1);
          w(a1 * n2 + a2, b1 * n2 + b2) = v;
        }
  return w;
}

inline Matrix kron_loops(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index p = 0; p < b.rows(); ++p)
        for (Index q = 0; q < b.cols(); ++q) k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return k;
}

/// Eigen's own symmetric solver as a second, unrelated reference.
inline Vector eigenvalues_ref(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues();
}

/// h(L) by the reference solver: V h(D) V^T.
template <typename H>
Matrix matrix_function_ref(const Matrix& m, H h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector d = es.eigenvalues();
  for (Index i = 0; i < d.size(); ++i) d[i] = h(d[i]);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

/// Filtering on the unweighted cycle C_N by circular convolution: the cycle
/// Laplacian is circulant with DFT eigenvalues 2 - 2cos(2 pi k / N).
template <typename H>
Vector cycle_filter_dft(const Vector& x, H h) {
  const Index n = x.size();
  using C = std::complex<double>;
  const double pi = std::acos(-1.0);
  std::vector<C> xh(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    C s = 0.0;
    for (Index t = 0; t < n; ++t) s += x[t] * std::polar(1.0, -2.0 * pi * double(k * t) / double(n));
    xh[static_cast<std::size_t>(k)] = s * h(2.0 - 2.0 * std::cos(2.0 * pi * double(k) / double(n)));
  }
  Vector y(n);
  for (Index t = 0; t < n; ++t) {
    C s = 0.0;
    for (Index k = 0; k < n; ++k) s += xh[static_cast<std::size_t>(k)] * std::polar(1.0, 2.0 * pi * double(k * t) / double(n));
    y[t] = s.real() / double(n);
  }
  return y;
}

/// Impulse response of the same filter, used as a circular convolution kernel.
template <typename H>
Vector cycle_kernel(Index n, H h) {
  Vector delta = Vector::Zero(n);
  delta[0] = 1.0;
  return cycle_filter_dft(delta, h);
}

inline Vector circular_convolve(const Vector& x, const Vector& kernel) {
  const Index n = x.size();
  Vector y = Vector::Zero(n);
  for (Index t = 0; t < n; ++t)
    for (Index s = 0; s < n; ++s) y[t] += kernel[((t - s) % n + n) % n] * x[s];
  return y;
}

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(Index a, Index b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
  Index components() {
    Index c = 0;
    for (Index i = 0; i < static_cast<Index>(parent.size()); ++i) c += find(i) == i;
    return c;
  }
};

inline Index component_count(const Matrix& w) {
  UnionFind uf(w.rows());
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = i + 1; j < w.cols(); ++j)
      if (w(i, j) != 0.0) uf.unite(i, j);
  return uf.components();
}

/// Gorodkin's R_K by its covariance definition over one-hot indicator
/// matrices X (truth) and Y (prediction), summed sample by sample.
inline double mcc_covariance(const std::vector<int>& truth, const std::vector<int>& pred, int classes) {
  const std::size_t n = truth.size();
  auto cov = [&](auto xa, auto xb) {
    double total = 0.0;
    for (int k = 0; k < classes; ++k) {
      double ma = 0.0, mb = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        ma += xa(s, k);
        mb += xb(s, k);
      }
      ma /= double(n);
      mb /= double(n);
      for (std::size_t s = 0; s < n; ++s) total += (xa(s, k) - ma) * (xb(s, k) - mb);
    }
    return total;
  };
  auto x = [&](std::size_t s, int k) { return truth[s] == k ? 1.0 : 0.0; };
  auto y = [&](std::size_t s, int k) { return pred[s] == k ? 1.0 : 0.0; };
  const double den = std::sqrt(cov(x, x) * cov(y, y));
  return den == 0.0 ? 0.0 : cov(x, y) / den;
}

/// Textbook binary MCC, class 1 positive.
inline double mcc_binary(double tn, double fp, double fn, double tp) {
  const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  return den == 0.0 ? 0.0 : (tp * tn - fp * fn) / den;
}

/// Largest |a - b| / max(1, |a|, |b|), elementwise.
inline double max_rel_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) {
      const double scale = std::max({1.0, std::abs(a(i, j)), std::abs(b(i, j))});
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / scale);
    }
  return worst;
}

/// Compares two bases that may differ by a rotation inside eigenvalue
/// groups: the spectral projectors U_g U_g^T must agree.
inline double projector_gap(const Matrix& u1, const Matrix& u2) {
  return (u1 * u1.transpose() - u2 * u2.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace oracle
