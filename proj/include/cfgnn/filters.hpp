#pragma once

#include <vector>

#include "cfgnn/graph.hpp"
#include "cfgnn/spectral.hpp"
#include "cfgnn/types.hpp"

namespace cfgnn {

enum class PolyBasis { chebyshev, monomial };

inline constexpr int kMaxPolynomialOrder = 16;

/// Per-node polynomial filter coefficients.
///
/// Row i of `psi` holds the K+1 coefficients of the filter centred on node i.
/// For the Chebyshev basis the polynomials are evaluated on the rescaled
/// operator 2L/lambda_max - I, so lambda_max must bound the spectrum of L.
struct PolynomialFilterBank {
  int order = 2;
  PolyBasis basis = PolyBasis::chebyshev;
  Matrix psi;
  double lambda_max = 2.0;
};

/// The operator the polynomials act on: L (monomial) or 2L/lambda_max - I.
Matrix apply_poly_operator(const SymMatrix& laplacian, PolyBasis basis, double lambda_max,
                           const Matrix& x);

/// [p_0(L) X, ..., p_K(L) X].
std::vector<Matrix> polynomial_basis_stack(const SymMatrix& laplacian, const Matrix& x, int order,
                                           PolyBasis basis, double lambda_max);

/// sum_k p_k(L) Y_k by Clenshaw (Chebyshev) or Horner (monomial) recurrence.
Matrix polynomial_combination(const SymMatrix& laplacian, const std::vector<Matrix>& ys,
                              PolyBasis basis, double lambda_max);

/// Column k holds p_k evaluated at each eigenvalue.
Matrix polynomial_response(const Vector& eigenvalues, int order, PolyBasis basis,
                           double lambda_max);

/// Z_i = sum_k psi(i,k) (p_k(L) X)_i.
Matrix localized_filter_output(const PolynomialFilterBank& bank, const SymMatrix& laplacian,
                               const Matrix& x);

/// Node-adaptive spectral filter from a scalar feature x_i and the spectrum
/// x_hat of the whole signal: sqrt(n) * x_i * pinv(x_hat)_l * g_hat(l).
Vector node_adaptive_coeffs(const SpectralBasis& basis, double x_i, const Vector& x_hat,
                            const Vector& g_hat);

double softplus(double x);
double softplus_inverse(double y);
double sigmoid(double x);

/// Per-class positive eigenvalue weights gamma_c = softplus(raw_c).
struct ClassSpectralWeights {
  Matrix raw;  // classes x n

  /// All gammas equal to one.
  static ClassSpectralWeights identity(Index classes, Index n);
  Vector gamma(Index c) const;
};

/// Per-class diagonal eigenvector attention alpha_c = 2 * sigmoid(raw_c),
/// which equals one at raw = 0.
struct EigenvectorAttention {
  Matrix raw;  // classes x n

  static EigenvectorAttention identity(Index classes, Index n);
  Vector alpha(Index c) const;
};

/// Z_i = sum_k psi(i,k) (U diag(weights * p_k(lambda)) U^T X)_i.
Matrix spectral_localized_output(const PolynomialFilterBank& bank, const Vector& weights,
                                 const SpectralBasis& basis, const Matrix& x);

/// Eigenvalue-weighted variant for class c.
Matrix cfgnn_v_forward(const PolynomialFilterBank& bank, const ClassSpectralWeights& gamma,
                       Index c, const SpectralBasis& basis, const Matrix& x);

/// Eigenvector-attention variant for class c.
Matrix cfgnn_e_forward(const PolynomialFilterBank& bank, const EigenvectorAttention& alpha,
                       Index c, const SpectralBasis& basis, const Matrix& x);

}  // namespace cfgnn
