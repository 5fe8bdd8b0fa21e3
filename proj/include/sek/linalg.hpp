#pragma once

// Dense complex linear algebra shared by every other header.  Matrices are
// plain Eigen::MatrixXcd values; the helpers below add the validation and
// tolerances the rest of the library relies on.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>

#include <Eigen/Dense>

#include "sek/errors.hpp"

namespace sek {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kNotPsdTol = 1e-6;
inline constexpr long kDimensionCap = 4096;

/// Dimension cap for constructed matrices.  SEK_MAX_DIM may lower it.
inline long dimension_cap() {
  if (const char* env = std::getenv("SEK_MAX_DIM")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return std::min(v, kDimensionCap);
  }
  return kDimensionCap;
}

inline void require_dim_within_cap(long dim) {
  if (dim > dimension_cap()) {
    throw CapacityError("matrix dimension " + std::to_string(dim) +
                        " exceeds cap " + std::to_string(dimension_cap()));
  }
}

inline bool all_finite(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
        return false;
  return true;
}

inline double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const Matrix& m, double tol = kHermitianTol) {
  if (m.rows() != m.cols())
    throw ArgumentError("operator is not square");
  if (!all_finite(m)) throw ArgumentError("operator has non-finite entries");
  if (hermiticity_defect(m) > tol)
    throw ArgumentError("operator is not Hermitian");
}

/// Removes the anti-Hermitian roundoff part.
inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline Matrix identity(long d) { return Matrix::Identity(d, d); }

inline Vector basis_ket(long d, long i) {
  Vector v = Vector::Zero(d);
  v(i) = 1.0;
  return v;
}

inline Matrix projector(const Vector& v) { return v * v.adjoint(); }

inline Matrix diag(std::initializer_list<double> entries) {
  Matrix m = Matrix::Zero(static_cast<long>(entries.size()),
                          static_cast<long>(entries.size()));
  long i = 0;
  for (double e : entries) m(i, i) = e, ++i;
  return m;
}

struct EigenSystem {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

inline EigenSystem eig_hermitian(const Matrix& h) {
  require_hermitian(h);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(h));
  if (solver.info() != Eigen::Success)
    throw NumericalFailure("Hermitian eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RealVector eigenvalues_hermitian(const Matrix& h) {
  require_hermitian(h, 1e-8);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(h),
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalFailure("Hermitian eigensolver did not converge");
  return solver.eigenvalues();
}

inline double max_eigenvalue(const Matrix& h) {
  return eigenvalues_hermitian(h).maxCoeff();
}

inline double min_eigenvalue(const Matrix& h) {
  return eigenvalues_hermitian(h).minCoeff();
}

/// Applies f to the eigenvalues of a Hermitian operator.
template <typename F>
Matrix apply_spectral(const EigenSystem& es, F&& f) {
  RealVector mapped(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) mapped(i) = f(es.values(i));
  return es.vectors * mapped.cast<Complex>().asDiagonal() *
         es.vectors.adjoint();
}

/// Principal square root of a PSD operator.  Eigenvalues in [-1e-6 scale, 0)
/// are treated as roundoff and clipped.
inline Matrix matrix_sqrt(const Matrix& h) {
  const EigenSystem es = eig_hermitian(h);
  const double scale = std::max(1.0, es.values.cwiseAbs().maxCoeff());
  if (es.values.size() > 0 && es.values.minCoeff() < -kNotPsdTol * scale)
    throw NotPsdError("matrix_sqrt: operator has eigenvalue " +
                      std::to_string(es.values.minCoeff()));
  return hermitize(
      apply_spectral(es, [](double x) { return x > 0 ? std::sqrt(x) : 0.0; }));
}

inline RealVector singular_values(const Matrix& m) {
  if (m.size() == 0) return RealVector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

/// Largest singular value.
inline double operator_norm(const Matrix& m) {
  if (!all_finite(m)) throw ArgumentError("operator_norm: non-finite entries");
  const RealVector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s.maxCoeff();
}

/// Sum of singular values.
inline double trace_norm(const Matrix& m) {
  const RealVector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s.sum();
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  require_dim_within_cap(a.rows() * b.rows());
  require_dim_within_cap(a.cols() * b.cols());
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  require_dim_within_cap(a.size() * b.size());
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline double real_trace(const Matrix& m) { return m.trace().real(); }

}  // namespace sek
