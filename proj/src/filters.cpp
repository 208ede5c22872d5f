#include "cfgnn/filters.hpp"

#include <cmath>

#include "cfgnn/error.hpp"

namespace cfgnn {
namespace {

void check_order(int order) {
  if (order < 0 || order > kMaxPolynomialOrder) {
    throw ConfigError("polynomial order must lie in [0, " + std::to_string(kMaxPolynomialOrder) +
                      "], got " + std::to_string(order));
  }
}

void check_bank(const PolynomialFilterBank& bank, Index n) {
  check_order(bank.order);
  if (bank.psi.rows() != n || bank.psi.cols() != bank.order + 1) {
    throw DataError("filter bank coefficients must be " + std::to_string(n) + "x" +
                    std::to_string(bank.order + 1));
  }
  if (!bank.psi.allFinite()) throw NumericError("filter bank has non-finite coefficients");
}

}  // namespace

Matrix apply_poly_operator(const SymMatrix& laplacian, PolyBasis basis, double lambda_max,
                           const Matrix& x) {
  if (basis == PolyBasis::monomial) return laplacian.apply(x);
  return (2.0 / lambda_max) * laplacian.apply(x) - x;
}

std::vector<Matrix> polynomial_basis_stack(const SymMatrix& laplacian, const Matrix& x, int order,
                                           PolyBasis basis, double lambda_max) {
  check_order(order);
  if (x.rows() != laplacian.size()) throw DataError("feature rows do not match graph size");
  if (basis == PolyBasis::chebyshev && !(lambda_max > 0.0)) {
    throw ConfigError("lambda_max must be positive");
  }
  std::vector<Matrix> stack;
  stack.reserve(static_cast<std::size_t>(order + 1));
  stack.push_back(x);
  if (order >= 1) stack.push_back(apply_poly_operator(laplacian, basis, lambda_max, x));
  for (int k = 2; k <= order; ++k) {
    Matrix next = apply_poly_operator(laplacian, basis, lambda_max, stack.back());
    if (basis == PolyBasis::chebyshev) {
      next = 2.0 * next - stack[static_cast<std::size_t>(k - 2)];
    }
    stack.push_back(std::move(next));
  }
  return stack;
}

Matrix polynomial_combination(const SymMatrix& laplacian, const std::vector<Matrix>& ys,
                              PolyBasis basis, double lambda_max) {
  if (ys.empty()) throw DataError("polynomial_combination: no terms");
  const int order = static_cast<int>(ys.size()) - 1;
  if (basis == PolyBasis::monomial) {
    Matrix r = ys.back();
    for (int k = order - 1; k >= 0; --k) {
      r = ys[static_cast<std::size_t>(k)] + apply_poly_operator(laplacian, basis, lambda_max, r);
    }
    return r;
  }
  Matrix b1 = Matrix::Zero(ys[0].rows(), ys[0].cols());
  Matrix b2 = b1;
  for (int k = order; k >= 1; --k) {
    Matrix b0 = ys[static_cast<std::size_t>(k)] +
                2.0 * apply_poly_operator(laplacian, basis, lambda_max, b1) - b2;
    b2 = std::move(b1);
    b1 = std::move(b0);
  }
  return ys[0] + apply_poly_operator(laplacian, basis, lambda_max, b1) - b2;
}

Matrix polynomial_response(const Vector& eigenvalues, int order, PolyBasis basis,
                           double lambda_max) {
  check_order(order);
  const Index n = eigenvalues.size();
  Matrix p(n, order + 1);
  const Vector t = basis == PolyBasis::monomial
                       ? eigenvalues
                       : Vector((2.0 / lambda_max) * eigenvalues.array() - 1.0);
  p.col(0).setOnes();
  if (order >= 1) p.col(1) = t;
  for (int k = 2; k <= order; ++k) {
    if (basis == PolyBasis::chebyshev) {
      p.col(k) = 2.0 * t.cwiseProduct(p.col(k - 1)) - p.col(k - 2);
    } else {
      p.col(k) = t.cwiseProduct(p.col(k - 1));
    }
  }
  return p;
}

Matrix localized_filter_output(const PolynomialFilterBank& bank, const SymMatrix& laplacian,
                               const Matrix& x) {
  check_bank(bank, laplacian.size());
  const auto stack = polynomial_basis_stack(laplacian, x, bank.order, bank.basis, bank.lambda_max);
  Matrix z = Matrix::Zero(x.rows(), x.cols());
  for (int k = 0; k <= bank.order; ++k) {
    z += bank.psi.col(k).asDiagonal() * stack[static_cast<std::size_t>(k)];
  }
  return z;
}

Vector node_adaptive_coeffs(const SpectralBasis& basis, double x_i, const Vector& x_hat,
                            const Vector& g_hat) {
  if (x_hat.size() != basis.size() || g_hat.size() != basis.size()) {
    throw DataError("node_adaptive_coeffs: spectrum length does not match basis");
  }
  const double energy = x_hat.squaredNorm();
  if (!(energy > 0.0)) throw DataError("node_adaptive_coeffs: signal spectrum is zero");
  // Moore-Penrose inverse of a nonzero row vector.
  const Vector q = x_hat / energy;
  const double root_n = std::sqrt(static_cast<double>(basis.size()));
  return root_n * x_i * q.cwiseProduct(g_hat);
}

double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

double softplus_inverse(double y) { return std::log(std::expm1(y)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ClassSpectralWeights ClassSpectralWeights::identity(Index classes, Index n) {
  return {Matrix::Constant(classes, n, softplus_inverse(1.0))};
}

Vector ClassSpectralWeights::gamma(Index c) const {
  if (c < 0 || c >= raw.rows()) throw DataError("class index out of range");
  return raw.row(c).transpose().unaryExpr([](double r) { return softplus(r); });
}

EigenvectorAttention EigenvectorAttention::identity(Index classes, Index n) {
  return {Matrix::Zero(classes, n)};
}

Vector EigenvectorAttention::alpha(Index c) const {
  if (c < 0 || c >= raw.rows()) throw DataError("class index out of range");
  return raw.row(c).transpose().unaryExpr([](double r) { return 2.0 * sigmoid(r); });
}

Matrix spectral_localized_output(const PolynomialFilterBank& bank, const Vector& weights,
                                 const SpectralBasis& basis, const Matrix& x) {
  check_bank(bank, basis.size());
  if (weights.size() != basis.size()) throw DataError("spectral weights length mismatch");
  if (x.rows() != basis.size()) throw DataError("feature rows do not match basis size");
  const Matrix response =
      polynomial_response(basis.eigenvalues, bank.order, bank.basis, bank.lambda_max);
  const Matrix x_hat = basis.vectors.transpose() * x;
  Matrix z = Matrix::Zero(x.rows(), x.cols());
  for (int k = 0; k <= bank.order; ++k) {
    const Vector diag = weights.cwiseProduct(response.col(k));
    z += bank.psi.col(k).asDiagonal() * (basis.vectors * (diag.asDiagonal() * x_hat));
  }
  return z;
}

Matrix cfgnn_v_forward(const PolynomialFilterBank& bank, const ClassSpectralWeights& gamma,
                       Index c, const SpectralBasis& basis, const Matrix& x) {
  if (c < 0 || c >= gamma.raw.rows()) throw DataError("class index out of range");
  return spectral_localized_output(bank, gamma.gamma(c), basis, x);
}

Matrix cfgnn_e_forward(const PolynomialFilterBank& bank, const EigenvectorAttention& alpha,
                       Index c, const SpectralBasis& basis, const Matrix& x) {
  if (c < 0 || c >= alpha.raw.rows()) throw DataError("class index out of range");
  return spectral_localized_output(bank, alpha.alpha(c), basis, x);
}

}  // namespace cfgnn
