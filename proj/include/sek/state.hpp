#pragma once

// Labeled multipartite states, partial traces, purification and the
// fidelity-based distances used for smoothing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "sek/errors.hpp"
#include "sek/linalg.hpp"
#include "sek/random.hpp"

namespace sek {

using Dims = std::vector<long>;
using Labels = std::vector<std::string>;

namespace detail {

inline long product(const Dims& dims) {
  long p = 1;
  for (long d : dims) p *= d;
  return p;
}

/// Multi-index digits of `index` for row-major subsystem ordering.
inline void unravel(long index, const Dims& dims, std::vector<long>& digits) {
  digits.resize(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    digits[k] = index % dims[k];
    index /= dims[k];
  }
}

/// Traces out every subsystem whose `keep` flag is false.
inline Matrix partial_trace(const Matrix& op, const Dims& dims,
                            const std::vector<bool>& keep) {
  const long total = product(dims);
  long kept_dim = 1;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (keep[k]) kept_dim *= dims[k];
  std::vector<long> kept_index(total), traced_index(total), digits;
  for (long i = 0; i < total; ++i) {
    unravel(i, dims, digits);
    long ki = 0, ti = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (keep[k]) ki = ki * dims[k] + digits[k];
      else ti = ti * dims[k] + digits[k];
    }
    kept_index[i] = ki;
    traced_index[i] = ti;
  }
  Matrix out = Matrix::Zero(kept_dim, kept_dim);
  for (long j = 0; j < total; ++j)
    for (long i = 0; i < total; ++i)
      if (traced_index[i] == traced_index[j])
        out(kept_index[i], kept_index[j]) += op(i, j);
  return out;
}

/// Reorders subsystems: new subsystem k is old subsystem order[k].
inline Matrix permute_subsystems(const Matrix& op, const Dims& dims,
                                 const std::vector<std::size_t>& order) {
  const long total = product(dims);
  Dims new_dims(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) new_dims[k] = dims[order[k]];
  std::vector<long> target(total), digits;
  for (long i = 0; i < total; ++i) {
    unravel(i, dims, digits);
    long ni = 0;
    for (std::size_t k = 0; k < order.size(); ++k)
      ni = ni * new_dims[k] + digits[order[k]];
    target[i] = ni;
  }
  Matrix out(total, total);
  for (long j = 0; j < total; ++j)
    for (long i = 0; i < total; ++i) out(target[i], target[j]) = op(i, j);
  return out;
}

inline Vector permute_subsystems(const Vector& v, const Dims& dims,
                                 const std::vector<std::size_t>& order) {
  const long total = product(dims);
  Dims new_dims(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) new_dims[k] = dims[order[k]];
  Vector out(total);
  std::vector<long> digits;
  for (long i = 0; i < total; ++i) {
    unravel(i, dims, digits);
    long ni = 0;
    for (std::size_t k = 0; k < order.size(); ++k)
      ni = ni * new_dims[k] + digits[order[k]];
    out(ni) = v(i);
  }
  return out;
}

}  // namespace detail

/// Positive semi-definite operator with trace in (0, 1] on a labeled tensor
/// product space.  Subnormalized states are allowed.
class MultipartiteState {
 public:
  struct Unchecked {};

  MultipartiteState(Matrix op, Dims dims, Labels labels)
      : op_(std::move(op)), dims_(std::move(dims)), labels_(std::move(labels)) {
    validate_structure();
    require_hermitian(op_);
    op_ = hermitize(op_);
    const double tr = real_trace(op_);
    if (!(tr > 0.0) || tr > 1.0 + 1e-9)
      throw ArgumentError("state trace " + std::to_string(tr) +
                          " outside (0, 1]");
    const double lmin = min_eigenvalue(op_);
    if (lmin < -kPsdTol * std::max(1.0, tr))
      throw NotPsdError("state has negative eigenvalue " +
                        std::to_string(lmin));
  }

  /// Skips the spectral checks; for results of trace-non-increasing maps
  /// applied to already valid states.
  MultipartiteState(Unchecked, Matrix op, Dims dims, Labels labels)
      : op_(hermitize(op)), dims_(std::move(dims)), labels_(std::move(labels)) {
    validate_structure();
  }

  const Matrix& op() const { return op_; }
  const Dims& dims() const { return dims_; }
  const Labels& labels() const { return labels_; }
  long dim() const { return op_.rows(); }
  double trace() const { return real_trace(op_); }

  bool has_label(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  std::size_t index_of(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end())
      throw ArgumentError("unknown subsystem label '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  long dim_of(const std::string& label) const { return dims_[index_of(label)]; }

 private:
  void validate_structure() const {
    if (dims_.size() != labels_.size())
      throw ArgumentError("dims and labels differ in length");
    for (long d : dims_)
      if (d <= 0) throw ArgumentError("subsystem dimension must be positive");
    require_dim_within_cap(detail::product(dims_));
    if (detail::product(dims_) != op_.rows() || op_.rows() != op_.cols())
      throw ArgumentError("product of dims does not match operator size");
    Labels sorted = labels_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ArgumentError("subsystem labels must be distinct");
  }

  Matrix op_;
  Dims dims_;
  Labels labels_;
};

/// Vector state with norm at most one.
class PureState {
 public:
  PureState(Vector vector, Dims dims, Labels labels)
      : vector_(std::move(vector)), dims_(std::move(dims)),
        labels_(std::move(labels)) {
    if (dims_.size() != labels_.size())
      throw ArgumentError("dims and labels differ in length");
    if (detail::product(dims_) != vector_.size())
      throw ArgumentError("product of dims does not match vector size");
    const double norm = vector_.norm();
    if (!(norm > 0.0) || norm > 1.0 + 1e-9)
      throw ArgumentError("pure state norm outside (0, 1]");
  }

  const Vector& vector() const { return vector_; }
  const Dims& dims() const { return dims_; }
  const Labels& labels() const { return labels_; }

  MultipartiteState to_state() const {
    return {MultipartiteState::Unchecked{}, projector(vector_), dims_, labels_};
  }

 private:
  Vector vector_;
  Dims dims_;
  Labels labels_;
};

inline MultipartiteState tensor(const MultipartiteState& a,
                                const MultipartiteState& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  Labels labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  return {MultipartiteState::Unchecked{}, kron(a.op(), b.op()), dims, labels};
}

/// Traces out the subsystems named in `discard`; the rest keep their order.
inline MultipartiteState partial_trace(const MultipartiteState& s,
                                       const Labels& discard) {
  std::vector<bool> keep(s.dims().size(), true);
  for (const auto& label : discard) keep[s.index_of(label)] = false;
  if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; }))
    throw ArgumentError("partial_trace cannot discard every subsystem");
  Dims dims;
  Labels labels;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (!keep[k]) continue;
    dims.push_back(s.dims()[k]);
    labels.push_back(s.labels()[k]);
  }
  return {MultipartiteState::Unchecked{},
          detail::partial_trace(s.op(), s.dims(), keep), dims, labels};
}

/// Reorders subsystems to the given label order (a permutation of labels).
inline MultipartiteState permute(const MultipartiteState& s,
                                 const Labels& order) {
  if (order.size() != s.labels().size())
    throw ArgumentError("permute: order must list every label once");
  std::vector<std::size_t> idx;
  Dims dims;
  for (const auto& label : order) {
    idx.push_back(s.index_of(label));
    dims.push_back(s.dim_of(label));
  }
  return {MultipartiteState::Unchecked{},
          detail::permute_subsystems(s.op(), s.dims(), idx), dims, order};
}

/// Marginal on `keep`, with subsystems in the listed order.
inline MultipartiteState marginal(const MultipartiteState& s,
                                  const Labels& keep) {
  Labels discard;
  for (const auto& label : s.labels())
    if (std::find(keep.begin(), keep.end(), label) == keep.end())
      discard.push_back(label);
  for (const auto& label : keep) (void)s.index_of(label);
  const MultipartiteState reduced =
      discard.empty() ? s : partial_trace(s, discard);
  return permute(reduced, keep);
}

/// Eigendecomposition purification with purifier dimension equal to the rank.
/// A subnormalized state yields a vector of squared norm tr(s).
inline PureState purify(const MultipartiteState& s,
                        const std::string& new_label) {
  if (s.has_label(new_label))
    throw ArgumentError("purify: label '" + new_label + "' already in use");
  const EigenSystem es = eig_hermitian(s.op());
  const double lmax = es.values.maxCoeff();
  std::vector<long> support;
  for (long i = es.values.size(); i-- > 0;)
    if (es.values(i) > 1e-13 * std::max(1.0, lmax)) support.push_back(i);
  const long rank = static_cast<long>(support.size());
  Vector psi = Vector::Zero(s.dim() * rank);
  for (long k = 0; k < rank; ++k) {
    const long i = support[k];
    const double w = std::sqrt(es.values(i));
    for (long a = 0; a < s.dim(); ++a) psi(a * rank + k) += w * es.vectors(a, i);
  }
  Dims dims = s.dims();
  dims.push_back(rank);
  Labels labels = s.labels();
  labels.push_back(new_label);
  return {psi, dims, labels};
}

inline void require_same_dim(const MultipartiteState& r,
                             const MultipartiteState& s) {
  if (r.dim() != s.dim())
    throw ArgumentError("states act on spaces of different dimension");
}

/// Factor L with h = L L^dagger, restricted to eigenvalues above rounding
/// level.  Keeping rounding noise out of the support matters: sqrt maps an
/// eigenvalue of 1e-17 to 3e-9.
inline Matrix support_factor(const Matrix& h) {
  const EigenSystem es = eig_hermitian(h);
  const double scale = std::max(1.0, es.values.cwiseAbs().maxCoeff());
  if (es.values.size() > 0 && es.values.minCoeff() < -kNotPsdTol * scale)
    throw NotPsdError("support_factor: operator has eigenvalue " +
                      std::to_string(es.values.minCoeff()));
  const double cut = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  std::vector<long> keep;
  for (long i = 0; i < es.values.size(); ++i)
    if (es.values(i) > cut) keep.push_back(i);
  Matrix f(h.rows(), static_cast<long>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    f.col(static_cast<long>(k)) = std::sqrt(es.values(keep[k])) * es.vectors.col(keep[k]);
  return f;
}

/// Root fidelity tr|sqrt(r) sqrt(s)|, evaluated as the trace norm of L^dagger M
/// for factors r = L L^dagger and s = M M^dagger.
inline double fidelity(const Matrix& r, const Matrix& s) {
  return trace_norm(support_factor(r).adjoint() * support_factor(s));
}

inline double fidelity(const MultipartiteState& r, const MultipartiteState& s) {
  require_same_dim(r, s);
  return std::clamp(fidelity(r.op(), s.op()), 0.0, 1.0);
}

/// Fidelity of the trace-completed operators r + (1 - tr r) and
/// s + (1 - tr s) on the space extended by one dimension.
inline double generalized_fidelity(const MultipartiteState& r,
                                   const MultipartiteState& s) {
  require_same_dim(r, s);
  // a deficit at rounding level would add sqrt(1e-16 * ds) ~ 1e-8
  const auto deficit = [](double tr) { return 1.0 - tr > 1e-12 ? 1.0 - tr : 0.0; };
  const double dr = deficit(r.trace());
  const double ds = deficit(s.trace());
  return std::clamp(fidelity(r.op(), s.op()) + std::sqrt(dr * ds), 0.0, 1.0);
}

inline double purified_distance(const MultipartiteState& r,
                                const MultipartiteState& s) {
  const double f = generalized_fidelity(r, s);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

/// Given a pure extension rho_AB of rho_A and a state tau_A, builds a pure
/// extension tau_AB with P(rho_AB, tau_AB) = P(rho_A, tau_A).  The A labels
/// are those of tau_A; B is the remainder and needs dim B >= dim A.
inline PureState uhlmann_extension(const PureState& rho_ab,
                                   const MultipartiteState& tau_a) {
  const MultipartiteState rho_full = rho_ab.to_state();
  Labels order = tau_a.labels();
  Labels b_labels;
  for (const auto& label : rho_ab.labels())
    if (std::find(order.begin(), order.end(), label) == order.end())
      b_labels.push_back(label);
  order.insert(order.end(), b_labels.begin(), b_labels.end());

  std::vector<std::size_t> idx;
  Dims dims;
  for (const auto& label : order) {
    idx.push_back(rho_full.index_of(label));
    dims.push_back(rho_full.dim_of(label));
  }
  const long da = tau_a.dim();
  const long db = detail::product(dims) / da;
  if (detail::product(Dims(dims.begin(), dims.begin() + tau_a.dims().size())) != da)
    throw ArgumentError("uhlmann_extension: tau_A dims do not match rho_AB");
  if (db < da)
    throw ArgumentError("uhlmann_extension: needs dim B >= dim A");

  const Vector v = detail::permute_subsystems(rho_ab.vector(), rho_ab.dims(), idx);
  // Coefficient matrix Psi(a, b) with |psi> = sum Psi(a,b)|a>|b>.
  Matrix psi(da, db);
  for (long a = 0; a < da; ++a)
    for (long b = 0; b < db; ++b) psi(a, b) = v(a * db + b);

  // Psi = sqrt(rho_A) V with V a co-isometry on supp(rho_A); extend V to a
  // full co-isometry K (K K^dagger = 1_A) using rows orthogonal to V's rows.
  Eigen::JacobiSVD<Matrix> svd(psi, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector sv = svd.singularValues();
  const Matrix& u = svd.matrixU();
  const Matrix& w = svd.matrixV();
  const Matrix k = u * w.leftCols(da).adjoint();
  Matrix sqrt_rho = Matrix::Zero(da, da);
  for (long i = 0; i < sv.size(); ++i)
    sqrt_rho += sv(i) * u.col(i) * u.col(i).adjoint();

  const Matrix sqrt_tau = matrix_sqrt(tau_a.op());
  // Unitary polar factor of sqrt(rho) sqrt(tau) = Wp |.|, take U = Wp^dagger.
  Eigen::JacobiSVD<Matrix> polar(sqrt_rho * sqrt_tau,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix unitary =
      polar.matrixV() * polar.matrixU().adjoint();
  const Matrix phi = sqrt_tau * unitary * k;

  Vector out(da * db);
  for (long a = 0; a < da; ++a)
    for (long b = 0; b < db; ++b) out(a * db + b) = phi(a, b);

  // Return with the caller's original label order.
  std::vector<std::size_t> back(order.size());
  for (std::size_t k2 = 0; k2 < order.size(); ++k2)
    back[k2] = static_cast<std::size_t>(
        std::find(order.begin(), order.end(), rho_ab.labels()[k2]) -
        order.begin());
  return {detail::permute_subsystems(out, dims, back), rho_ab.dims(),
          rho_ab.labels()};
}

inline Labels default_labels(std::size_t n) {
  static const char* names[] = {"A", "B", "C", "D", "E", "F", "G", "H"};
  Labels labels;
  for (std::size_t k = 0; k < n; ++k)
    labels.push_back(k < 8 ? names[k] : "S" + std::to_string(k));
  return labels;
}

/// Haar-random pure state.
inline PureState random_pure(const Dims& dims, Rng& rng,
                             Labels labels = {}) {
  if (labels.empty()) labels = default_labels(dims.size());
  Vector v(detail::product(dims));
  for (long i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
  v /= v.norm();
  return {v, dims, labels};
}

inline PureState random_pure(const Dims& dims, std::uint64_t seed) {
  Rng rng(seed);
  return random_pure(dims, rng);
}

/// Marginal of a Haar-random pure state on dims x rank; rank controls the
/// environment dimension.
inline MultipartiteState random_state(const Dims& dims, long rank, Rng& rng,
                                      Labels labels = {}) {
  const long d = detail::product(dims);
  if (rank < 1 || rank > d)
    throw ArgumentError("random_state: rank must be in [1, product(dims)]");
  if (labels.empty()) labels = default_labels(dims.size());
  const Matrix g = rng.ginibre(d, rank);
  Matrix rho = g * g.adjoint();
  rho /= real_trace(rho);
  return {MultipartiteState::Unchecked{}, rho, dims, labels};
}

inline MultipartiteState random_state(const Dims& dims, long rank,
                                      std::uint64_t seed) {
  Rng rng(seed);
  return random_state(dims, rank, rng);
}

}  // namespace sek
