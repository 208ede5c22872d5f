#include "cfgnn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cfgnn/csv.hpp"
#include "cfgnn/error.hpp"

namespace cfgnn {
namespace {

constexpr double kSignTieTol = 1e-12;
constexpr double kGroupRelTol = 1e-8;

void fix_sign(Eigen::Ref<Vector> v) {
  if (v.size() == 0) return;
  const double peak = v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= peak - kSignTieTol) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

std::vector<std::vector<Index>> group_multiplicities(const Vector& sorted, double tol) {
  std::vector<std::vector<Index>> groups;
  for (Index k = 0; k < sorted.size(); ++k) {
    if (groups.empty() || sorted[k] - sorted[groups.back().back()] > tol) groups.emplace_back();
    groups.back().push_back(k);
  }
  return groups;
}

SpectralBasis finalize(Vector values, Matrix vectors, double group_tol) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values[a] < values[b]; });
  SpectralBasis basis;
  basis.eigenvalues.resize(values.size());
  basis.vectors.resize(vectors.rows(), values.size());
  for (Index k = 0; k < values.size(); ++k) {
    basis.eigenvalues[k] = values[order[static_cast<std::size_t>(k)]];
    basis.vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
    fix_sign(basis.vectors.col(k));
  }
  basis.multiplicity_groups = group_multiplicities(basis.eigenvalues, group_tol);
  return basis;
}

void check_rows(const SpectralBasis& basis, Index rows, const char* what) {
  if (rows != basis.size()) {
    throw DataError(std::string(what) + ": signal length " + std::to_string(rows) +
                    " does not match basis size " + std::to_string(basis.size()));
  }
}

Vector random_unit(Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v / v.norm();
}

}  // namespace

SpectralBasis eigendecompose(const SymMatrix& m, int max_sweeps) {
  const Index n = m.size();
  Matrix a = m.matrix();
  Matrix v = Matrix::Identity(n, n);
  const double norm = a.norm();
  const double tol = std::numeric_limits<double>::epsilon() * norm;

  auto off_norm = [&] {
    double s = 0.0;
    for (Index q = 1; q < n; ++q) s += a.col(q).head(q).squaredNorm();
    return std::sqrt(2.0 * s);
  };

  bool converged = false;
  for (int sweep = 0; sweep <= max_sweeps; ++sweep) {
    const double off = off_norm();
    if (off == 0.0 || off <= tol) {
      converged = true;
      break;
    }
    if (sweep == max_sweeps) break;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p), aqq = a(q, q);
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        Vector col_p = c * a.col(p) - s * a.col(q);
        Vector col_q = s * a.col(p) + c * a.col(q);
        a.col(p) = col_p;
        a.col(q) = col_q;
        a.row(p) = col_p.transpose();
        a.row(q) = col_q.transpose();
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;

        Vector vp = c * v.col(p) - s * v.col(q);
        v.col(q) = s * v.col(p) + c * v.col(q);
        v.col(p) = vp;
      }
    }
  }
  if (!converged) {
    throw NumericError("Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) +
                       " sweeps");
  }
  return finalize(a.diagonal(), std::move(v), kGroupRelTol * norm);
}

EigenPair power_iteration(const SymMatrix& m, const Vector& v0,
                          const PowerIterationOptions& options) {
  if (v0.size() != m.size()) throw DataError("power_iteration: start vector has wrong length");
  if (!(options.eps > 0.0)) throw ConfigError("power_iteration: eps must be positive");
  if (std::abs(v0.norm() - 1.0) > 1e-9) {
    throw DataError("power_iteration: start vector must have unit norm");
  }

  EigenPair result;
  Vector v = v0;
  for (int t = 0; t < options.max_iterations; ++t) {
    const Vector w = m.apply(v);
    const double lambda = w.dot(v) / v.norm();
    const double wn = w.norm();
    if (options.record_residuals) result.residuals.push_back((w - lambda * v).norm());
    if (!(wn > std::numeric_limits<double>::min())) {
      throw NumericError("power_iteration: A v vanished; start vector is orthogonal to the "
                         "dominant eigenspace");
    }
    Vector next = w / wn;
    const double sign = lambda < 0.0 ? -1.0 : 1.0;
    const double step = (next - sign * v).norm();
    v = std::move(next);
    if (step < options.eps) {
      result.value = lambda;
      result.vector = std::move(v);
      result.iterations = t + 1;
      return result;
    }
  }
  throw NumericError("power_iteration: no convergence after " +
                     std::to_string(options.max_iterations) + " iterations (eigengap near zero?)");
}

SpectralBasis deflated_spectrum(const SymMatrix& m, Index k, Rng& rng,
                                const PowerIterationOptions& options) {
  const Index n = m.size();
  if (k < 0 || k > n) throw DataError("deflated_spectrum: k must lie in [0, n]");
  Matrix a = m.matrix();
  Vector values(k);
  Matrix vectors(n, k);
  for (Index j = 0; j < k; ++j) {
    if (j == n - 1) {
      // The last direction is the orthogonal complement of the others; the
      // deflated matrix is numerically zero there, so iterating would stall.
      Vector v = random_unit(n, rng);
      for (int pass = 0; pass < 2; ++pass)
        v -= vectors.leftCols(j) * (vectors.leftCols(j).transpose() * v);
      v.normalize();
      values[j] = v.dot(m.matrix() * v);
      vectors.col(j) = v;
      break;
    }
    EigenPair pair = power_iteration(SymMatrix(a), random_unit(n, rng), options);
    values[j] = pair.value;
    vectors.col(j) = pair.vector;
    Matrix next = a - pair.value * pair.vector * pair.vector.transpose();
    a = 0.5 * (next + next.transpose());
  }
  return finalize(std::move(values), std::move(vectors), kGroupRelTol * m.frobenius_norm());
}

Vector gft(const SpectralBasis& basis, const Vector& f) {
  check_rows(basis, f.size(), "gft");
  return basis.vectors.transpose() * f;
}

Matrix gft(const SpectralBasis& basis, const Matrix& x) {
  check_rows(basis, x.rows(), "gft");
  return basis.vectors.transpose() * x;
}

Vector igft(const SpectralBasis& basis, const Vector& coeffs) {
  check_rows(basis, coeffs.size(), "igft");
  return basis.vectors * coeffs;
}

Matrix igft(const SpectralBasis& basis, const Matrix& coeffs) {
  check_rows(basis, coeffs.rows(), "igft");
  return basis.vectors * coeffs;
}

Matrix twin_gft(const SpectralBasis& b1, const SpectralBasis& b2, const Matrix& f) {
  check_rows(b1, f.rows(), "twin_gft");
  check_rows(b2, f.cols(), "twin_gft");
  return b1.vectors.transpose() * f * b2.vectors;
}

Matrix twin_igft(const SpectralBasis& b1, const SpectralBasis& b2, const Matrix& spectrum) {
  check_rows(b1, spectrum.rows(), "twin_igft");
  check_rows(b2, spectrum.cols(), "twin_igft");
  return b1.vectors * spectrum * b2.vectors.transpose();
}

ProductEigenpairs kronecker_eigenpairs(const SpectralBasis& b1, const SpectralBasis& b2) {
  const Index n1 = b1.size(), n2 = b2.size();
  ProductEigenpairs out;
  out.eigenvalues.resize(n1 * n2);
  for (Index k1 = 0; k1 < n1; ++k1)
    for (Index k2 = 0; k2 < n2; ++k2)
      out.eigenvalues[lex_index(k1, k2, n2)] = b1.eigenvalues[k1] + b2.eigenvalues[k2];
  out.vectors = kronecker_product(b1.vectors, b2.vectors);
  return out;
}

Vector translate(const SpectralBasis& basis, const Vector& g_hat, Index i) {
  check_rows(basis, g_hat.size(), "translate");
  if (i < 0 || i >= basis.size()) throw DataError("translate: node index out of range");
  const double root_n = std::sqrt(static_cast<double>(basis.size()));
  const Vector weights = basis.vectors.row(i).transpose().cwiseProduct(g_hat);
  return root_n * (basis.vectors * weights);
}

Vector spectral_response(const SpectralBasis& basis, const SpectralMap& h) {
  Vector r(basis.size());
  for (Index k = 0; k < basis.size(); ++k) r[k] = h(basis.eigenvalues[k]);
  return r;
}

Matrix spectral_filter_apply(const SpectralBasis& basis, const SpectralMap& h, const Matrix& x) {
  check_rows(basis, x.rows(), "spectral_filter_apply");
  const Vector response = spectral_response(basis, h);
  return basis.vectors * (response.asDiagonal() * (basis.vectors.transpose() * x));
}

Vector spectral_filter_apply(const SpectralBasis& basis, const SpectralMap& h, const Vector& x) {
  return spectral_filter_apply(basis, h, Matrix(x)).col(0);
}

Matrix twin_filter_apply(const SpectralBasis& b1, const SpectralBasis& b2, const SpectralMap& h,
                         const Matrix& f) {
  Matrix spectrum = twin_gft(b1, b2, f);
  for (Index k1 = 0; k1 < b1.size(); ++k1)
    for (Index k2 = 0; k2 < b2.size(); ++k2)
      spectrum(k1, k2) *= h(b1.eigenvalues[k1] + b2.eigenvalues[k2]);
  return twin_igft(b1, b2, spectrum);
}

void write_spectrum(const SpectralBasis& basis, const std::filesystem::path& dir) {
  std::ostringstream values;
  values << "index,eigenvalue\n";
  for (Index k = 0; k < basis.size(); ++k) {
    values << k << ',' << csv::format_double(basis.eigenvalues[k]) << '\n';
  }
  std::ostringstream vectors;
  for (Index i = 0; i < basis.vectors.rows(); ++i) {
    for (Index k = 0; k < basis.vectors.cols(); ++k) {
      if (k) vectors << ',';
      vectors << csv::format_double(basis.vectors(i, k));
    }
    vectors << '\n';
  }
  csv::write_file_atomic(dir / "eigenvalues.csv", values.str());
  csv::write_file_atomic(dir / "eigenvectors.csv", vectors.str());
}

Matrix read_dense_csv(const std::filesystem::path& path) {
  // Headerless, unquoted numeric rows.
  std::vector<std::vector<double>> rows;
  std::istringstream is(csv::read_file(path));
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(csv::parse_double(std::string_view(line).substr(
          start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(path.string() + ": ragged matrix row");
    }
    rows.push_back(std::move(row));
  }
  Matrix out(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows[0].size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

Index count_near_zero(const SpectralBasis& basis, double tol) {
  Index c = 0;
  for (Index k = 0; k < basis.size(); ++k)
    if (std::abs(basis.eigenvalues[k]) <= tol) ++c;
  return c;
}

}  // namespace cfgnn
