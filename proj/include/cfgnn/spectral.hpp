#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "cfgnn/graph.hpp"
#include "cfgnn/rng.hpp"
#include "cfgnn/types.hpp"

namespace cfgnn {

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
///
/// Each eigenvector's largest-magnitude entry is positive (the lowest index
/// wins among entries tied within 1e-12). Indices whose eigenvalues differ by
/// at most 1e-8 * ||m||_F are grouped, since the GFT is only defined up to a
/// rotation inside such a group.
struct SpectralBasis {
  Vector eigenvalues;
  Matrix vectors;
  std::vector<std::vector<Index>> multiplicity_groups;

  Index size() const noexcept { return eigenvalues.size(); }
  const Matrix& U() const noexcept { return vectors; }
};

using SpectralMap = std::function<double(double)>;

/// Cyclic Jacobi eigensolver. Throws NumericError after `max_sweeps`
/// sweeps without convergence.
SpectralBasis eigendecompose(const SymMatrix& m, int max_sweeps = 100);

struct PowerIterationOptions {
  double eps = 1e-10;
  int max_iterations = 10000;
  bool record_residuals = false;
};

struct EigenPair {
  double value = 0.0;
  Vector vector;
  int iterations = 0;
  /// ||A v_t - lambda_t v_t|| per iterate, when requested.
  std::vector<double> residuals;
};

/// Power iteration from a unit start vector.
///
/// Iterates w = A v, lambda = w.v / ||v||, v' = w / ||w|| and stops when
/// ||v' - v|| < eps. For a negative dominant eigenvalue the iterate flips
/// sign every step, so the test compares against sign(lambda) * v.
/// Throws NumericError when the cap is hit or A v vanishes.
EigenPair power_iteration(const SymMatrix& m, const Vector& v0,
                          const PowerIterationOptions& options = {});

/// The k largest-magnitude eigenpairs by power iteration with Hotelling
/// deflation A <- A - lambda v v^T. Returned in ascending order.
SpectralBasis deflated_spectrum(const SymMatrix& m, Index k, Rng& rng,
                                const PowerIterationOptions& options = {});

/// Graph Fourier transform U^T f (columnwise for matrices).
Vector gft(const SpectralBasis& basis, const Vector& f);
Matrix gft(const SpectralBasis& basis, const Matrix& x);
Vector igft(const SpectralBasis& basis, const Vector& coeffs);
Matrix igft(const SpectralBasis& basis, const Matrix& coeffs);

/// Two-dimensional transform U1^T F U2 for a signal on G1 □ G2 laid out as
/// an N1 x N2 matrix.
Matrix twin_gft(const SpectralBasis& b1, const SpectralBasis& b2, const Matrix& f);
/// Inverse U1 S U2^T.
Matrix twin_igft(const SpectralBasis& b1, const SpectralBasis& b2, const Matrix& spectrum);

/// Eigenpairs of L1 ⊕ L2 assembled from the factors: column lex(k1, k2) is
/// u1_k1 ⊗ u2_k2 with eigenvalue lambda1_k1 + lambda2_k2. Not sorted.
struct ProductEigenpairs {
  Vector eigenvalues;
  Matrix vectors;
};
ProductEigenpairs kronecker_eigenpairs(const SpectralBasis& b1, const SpectralBasis& b2);

/// Generalized translation of a spectral kernel to node i:
/// sqrt(n) * sum_l u_l u_l(i) g_hat(l).
Vector translate(const SpectralBasis& basis, const Vector& g_hat, Index i);

/// h evaluated at every eigenvalue.
Vector spectral_response(const SpectralBasis& basis, const SpectralMap& h);

/// U h(Lambda) U^T x.
Matrix spectral_filter_apply(const SpectralBasis& basis, const SpectralMap& h, const Matrix& x);
Vector spectral_filter_apply(const SpectralBasis& basis, const SpectralMap& h, const Vector& x);

/// Filters an N1 x N2 product-graph signal with h(lambda1 + lambda2) through
/// the twin transform.
Matrix twin_filter_apply(const SpectralBasis& b1, const SpectralBasis& b2, const SpectralMap& h,
                         const Matrix& f);

/// Writes `eigenvalues.csv` (index,eigenvalue) and `eigenvectors.csv`
/// (row-major U, no header) into `dir`.
void write_spectrum(const SpectralBasis& basis, const std::filesystem::path& dir);
Matrix read_dense_csv(const std::filesystem::path& path);

/// Number of eigenvalues within `tol` of zero.
Index count_near_zero(const SpectralBasis& basis, double tol = 1e-9);

}  // namespace cfgnn
