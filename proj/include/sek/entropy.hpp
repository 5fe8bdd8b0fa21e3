#pragma once

// Conditional min-/max-entropies (plain and smoothed), von Neumann and Renyi
// entropies.  All logarithms are base 2.
//
// Programs solved here, for rho on A (x) B:
//   H_min(A|B)    = -log2 max { <rho, X> : Tr_A X = 1_B, X >= 0 }
//                   (the dual variable of Tr_A X = 1_B is the optimal sigma_B
//                   of  min tr sigma  s.t.  1_A (x) sigma >= rho)
//   H_max(A|B)    = 2 log2 max_sigma F(rho, 1_A (x) sigma)        (direct)
//                 = -H_min(A|C) for any purification rho_ABC       (dual)
//   H_min^eps     = -log2 min tr sigma  s.t.  1 (x) sigma >= rt,
//                   tr rt <= 1,  F(rt + (1 - tr rt), rho + (1 - tr rho))
//                   >= sqrt(1 - eps^2)
// Fidelity constraints use  F(P, Q) = max Re tr(V K)  over
// [[1_r, K], [K^dagger, Q]] >= 0,  where P = V V^dagger has rank r.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sek/errors.hpp"
#include "sek/linalg.hpp"
#include "sek/sdp.hpp"
#include "sek/state.hpp"

namespace sek {

class SmoothingParam {
 public:
  SmoothingParam(double epsilon = 0.0) : epsilon_(epsilon) {  // NOLINT
    if (!(epsilon >= 0.0 && epsilon < 1.0))
      throw ArgumentError("smoothing parameter must lie in [0, 1)");
  }
  double value() const { return epsilon_; }

 private:
  double epsilon_;
};

struct EntropyResult {
  double value = 0.0;  // bits
  std::optional<MultipartiteState> certificate_sigma;
  std::optional<MultipartiteState> certificate_smooth;
  double gap = 0.0;
  int iterations = 0;
};

struct EntropyOptions {
  sdp::SolverOptions solver;
};

namespace detail {

struct Bipartite {
  Matrix rho;
  long da = 1;
  long db = 1;
  Labels labels;  // target first
  Dims dims;
  Dims condition_dims;
  Labels condition_labels;
};

inline Bipartite split(const MultipartiteState& s, const std::string& target,
                       const Labels& condition) {
  for (const auto& c : condition)
    if (c == target)
      throw ArgumentError("target system cannot also be conditioned on");
  Labels order{target};
  order.insert(order.end(), condition.begin(), condition.end());
  const MultipartiteState m = marginal(s, order);
  Bipartite out;
  out.rho = m.op();
  out.da = s.dim_of(target);
  out.db = m.dim() / out.da;
  out.labels = order;
  out.dims = m.dims();
  out.condition_labels = condition;
  out.condition_dims.assign(m.dims().begin() + 1, m.dims().end());
  return out;
}

/// PSD projection (negative eigenvalues clipped) for certificate states.
inline Matrix clip_psd(const Matrix& m) {
  const EigenSystem es = eig_hermitian(hermitize(m));
  return hermitize(apply_spectral(es, [](double x) { return std::max(x, 0.0); }));
}

inline std::optional<MultipartiteState> normalized_certificate(
    const Matrix& sigma, const Dims& dims, const Labels& labels) {
  if (dims.empty()) return std::nullopt;
  Matrix clipped = clip_psd(sigma);
  const double tr = real_trace(clipped);
  if (!(tr > 0.0)) return std::nullopt;
  clipped /= tr;
  return MultipartiteState(MultipartiteState::Unchecked{}, clipped, dims, labels);
}

struct EntryRef {
  std::size_t block;
  long dim;
  long row;
  long col;
  double coef;
};

/// Adds  sum_k coef_k X_k(row_k, col_k) = rhs  as one real constraint for the
/// real part and, for off-diagonal entries, one for the imaginary part.
inline void add_entry_equality(sdp::SdpProblem& p,
                               const std::vector<EntryRef>& refs, Complex rhs) {
  std::vector<sdp::Term> re, im;
  bool off_diagonal = false;
  for (const auto& r : refs) {
    re.push_back({r.block, sdp::SparseHermitian::re_entry(r.dim, r.row, r.col, r.coef)});
    if (r.row != r.col) {
      off_diagonal = true;
      im.push_back({r.block, sdp::SparseHermitian::im_entry(r.dim, r.row, r.col, r.coef)});
    }
  }
  p.add_constraint(std::move(re), sdp::Relation::equal, rhs.real());
  if (off_diagonal) p.add_constraint(std::move(im), sdp::Relation::equal, rhs.imag());
}

/// Columns V with P = V V^dagger, dropping negligible eigenvalues.
inline Matrix factor_psd(const Matrix& p) {
  const EigenSystem es = eig_hermitian(p);
  const double lmax = std::max(es.values.maxCoeff(), 0.0);
  std::vector<long> keep;
  for (long i = 0; i < es.values.size(); ++i)
    if (es.values(i) > 1e-12 * std::max(lmax, 1e-300)) keep.push_back(i);
  Matrix v(p.rows(), static_cast<long>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    v.col(static_cast<long>(k)) = std::sqrt(es.values(keep[k])) * es.vectors.col(keep[k]);
  return v;
}

/// Coefficient for Re tr(V K) with K the r x cols block at (0, r) of a block
/// of dimension `dim`.
inline sdp::SparseHermitian fidelity_functional(const Matrix& v, long dim) {
  const long r = v.cols();
  sdp::SparseHermitian a(dim);
  for (long i = 0; i < r; ++i)
    for (long k = 0; k < v.rows(); ++k)
      if (v(k, i) != Complex(0.0)) a.add(r + k, i, 0.5 * v(k, i));
  return a;
}

/// Pins the top-left r x r block of `block` to the identity.
inline void pin_identity(sdp::SdpProblem& p, std::size_t block, long dim, long r) {
  for (long i = 0; i < r; ++i)
    for (long j = i; j < r; ++j)
      add_entry_equality(p, {{block, dim, i, j, 1.0}}, i == j ? 1.0 : 0.0);
}

inline void require_optimal(const sdp::SdpSolution& sol, const char* what) {
  if (sol.status != sdp::Status::optimal)
    throw NumericalFailure(std::string(what) + ": SDP " + sdp::to_string(sol.status) +
                           " after " + std::to_string(sol.iterations) +
                           " iterations (" + sol.message + ", gap " +
                           std::to_string(sol.gap) + ", residuals " +
                           std::to_string(sol.primal_residual) + "/" +
                           std::to_string(sol.dual_residual) + ")");
}

inline std::string fresh_label(const Labels& used, const std::string& base) {
  std::string label = base;
  int k = 0;
  while (std::find(used.begin(), used.end(), label) != used.end())
    label = base + std::to_string(++k);
  return label;
}

}  // namespace detail

inline EntropyResult h_min(const MultipartiteState& s, const std::string& target,
                           const Labels& condition,
                           const EntropyOptions& options = {}) {
  const detail::Bipartite bp = detail::split(s, target, condition);
  const long da = bp.da, db = bp.db, d = da * db;

  sdp::SdpProblem p;
  p.set_sense(sdp::Sense::maximize);
  const std::size_t x = p.add_block("X", d);
  p.add_objective(x, sdp::SparseHermitian::from_dense(bp.rho));

  // Tr_A X = 1_B, one constraint per real coordinate of a Hermitian on B.
  struct Coord { long b1, b2; bool imag; };
  std::vector<Coord> coords;
  for (long b1 = 0; b1 < db; ++b1)
    for (long b2 = b1; b2 < db; ++b2) {
      std::vector<detail::EntryRef> refs;
      for (long a = 0; a < da; ++a) refs.push_back({x, d, a * db + b1, a * db + b2, 1.0});
      detail::add_entry_equality(p, refs, b1 == b2 ? 1.0 : 0.0);
      coords.push_back({b1, b2, false});
      if (b1 != b2) coords.push_back({b1, b2, true});
    }

  const sdp::SdpSolution sol = sdp::solve(p, options.solver);
  detail::require_optimal(sol, "h_min");

  // sigma = sum_k y_k E_k, with E_k the B-part of constraint k.
  Matrix sigma = Matrix::Zero(db, db);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const auto& c = coords[k];
    const auto e = c.imag ? sdp::SparseHermitian::im_entry(db, c.b1, c.b2)
                          : sdp::SparseHermitian::re_entry(db, c.b1, c.b2);
    sigma += sol.duals[k] * e.to_dense();
  }
  const double tr_sigma = sol.dual_value;
  if (!(tr_sigma > 0.0)) throw NumericalFailure("h_min: non-positive optimum");

  EntropyResult result;
  result.value = -std::log2(tr_sigma);
  result.gap = sol.gap;
  result.iterations = sol.iterations;
  result.certificate_sigma =
      detail::normalized_certificate(sigma, bp.condition_dims, bp.condition_labels);
  return result;
}

/// H_max(A|B) = -H_min(A|C) for a pure state on A, B and the complement C.
inline EntropyResult h_max_dual(const PureState& s_pure, const std::string& target,
                                const Labels& condition,
                                const EntropyOptions& options = {}) {
  const MultipartiteState s = s_pure.to_state();
  Labels complement;
  for (const auto& label : s.labels()) {
    if (label == target) continue;
    if (std::find(condition.begin(), condition.end(), label) != condition.end())
      continue;
    complement.push_back(label);
  }
  (void)s.index_of(target);
  for (const auto& c : condition) (void)s.index_of(c);
  EntropyResult r = h_min(s, target, complement, options);
  r.value = -r.value;
  return r;
}

/// Same as above for a state that must be rank one.
inline EntropyResult h_max_dual(const MultipartiteState& s, const std::string& target,
                                const Labels& condition,
                                const EntropyOptions& options = {}) {
  const RealVector ev = eigenvalues_hermitian(s.op());
  const double tail = ev.sum() - ev.maxCoeff();
  if (tail > 1e-9)
    throw ArgumentError("h_max_dual: state is not pure; purify it first");
  const EigenSystem es = eig_hermitian(s.op());
  const long top = es.values.size() - 1;
  const Vector v = std::sqrt(std::max(es.values(top), 0.0)) * es.vectors.col(top);
  return h_max_dual(PureState(v, s.dims(), s.labels()), target, condition, options);
}

/// Max-entropy from its fidelity form, independent of the duality relation.
inline EntropyResult h_max_direct(const MultipartiteState& s,
                                  const std::string& target, const Labels& condition,
                                  const EntropyOptions& options = {}) {
  const detail::Bipartite bp = detail::split(s, target, condition);
  const long da = bp.da, db = bp.db, d = da * db;
  const Matrix v = detail::factor_psd(bp.rho);
  const long r = v.cols();
  const long nf = r + d;

  sdp::SdpProblem p;
  p.set_sense(sdp::Sense::maximize);
  const std::size_t f = p.add_block("F", nf);
  const std::size_t sig = p.add_block("sigma", db);
  p.add_objective(f, detail::fidelity_functional(v, nf));
  detail::pin_identity(p, f, nf, r);
  for (long i = 0; i < d; ++i)
    for (long j = i; j < d; ++j) {
      std::vector<detail::EntryRef> refs{{f, nf, r + i, r + j, 1.0}};
      if (i / db == j / db) refs.push_back({sig, db, i % db, j % db, -1.0});
      detail::add_entry_equality(p, refs, 0.0);
    }
  p.add_constraint({{sig, sdp::SparseHermitian::identity(db)}}, sdp::Relation::equal, 1.0);

  const sdp::SdpSolution sol = sdp::solve(p, options.solver);
  detail::require_optimal(sol, "h_max_direct");
  if (!(sol.primal_value > 0.0))
    throw NumericalFailure("h_max_direct: non-positive fidelity");

  EntropyResult result;
  result.value = 2.0 * std::log2(sol.primal_value);
  result.gap = sol.gap;
  result.iterations = sol.iterations;
  result.certificate_sigma = detail::normalized_certificate(
      sol.block_values[sig], bp.condition_dims, bp.condition_labels);
  return result;
}

/// Smooth min-entropy over the purified-distance ball of subnormalized states,
/// as a single joint program in (sigma, rho~).
inline EntropyResult h_min_smooth(const MultipartiteState& s, const std::string& target,
                                  const Labels& condition, SmoothingParam eps,
                                  const EntropyOptions& options = {}) {
  if (eps.value() == 0.0) return h_min(s, target, condition, options);
  const detail::Bipartite bp = detail::split(s, target, condition);
  const long da = bp.da, db = bp.db, d = da * db;

  Matrix rho_ext = Matrix::Zero(d + 1, d + 1);
  rho_ext.topLeftCorner(d, d) = bp.rho;
  rho_ext(d, d) = std::max(0.0, 1.0 - real_trace(bp.rho));
  const Matrix v = detail::factor_psd(rho_ext);
  const long r = v.cols();
  const long nf = r + d + 1;

  sdp::SdpProblem p;
  p.set_sense(sdp::Sense::minimize);
  const std::size_t sig = p.add_block("sigma", db);
  const std::size_t slack = p.add_block("S", d);
  const std::size_t f = p.add_block("F", nf);
  p.add_objective(sig, sdp::SparseHermitian::identity(db));

  detail::pin_identity(p, f, nf, r);
  // rho~ (+) t: no coherence between rho~ and the completing dimension
  for (long a = 0; a < d; ++a)
    detail::add_entry_equality(p, {{f, nf, r + a, r + d, 1.0}}, 0.0);
  p.add_constraint({{f, [&] {
                       sdp::SparseHermitian tr(nf);
                       for (long a = 0; a <= d; ++a) tr.add(r + a, r + a, 1.0);
                       return tr;
                     }()}},
                   sdp::Relation::equal, 1.0);
  // 1_A (x) sigma - rho~ - S = 0
  for (long i = 0; i < d; ++i)
    for (long j = i; j < d; ++j) {
      std::vector<detail::EntryRef> refs{{f, nf, r + i, r + j, -1.0},
                                         {slack, d, i, j, -1.0}};
      if (i / db == j / db) refs.push_back({sig, db, i % db, j % db, 1.0});
      detail::add_entry_equality(p, refs, 0.0);
    }
  const double e = eps.value();
  p.add_constraint({{f, detail::fidelity_functional(v, nf)}},
                   sdp::Relation::greater_equal, std::sqrt(1.0 - e * e));

  const sdp::SdpSolution sol = sdp::solve(p, options.solver);
  detail::require_optimal(sol, "h_min_smooth");
  if (!(sol.primal_value > 0.0))
    throw NumericalFailure("h_min_smooth: non-positive optimum");

  EntropyResult result;
  result.value = -std::log2(sol.primal_value);
  result.gap = sol.gap;
  result.iterations = sol.iterations;
  result.certificate_sigma = detail::normalized_certificate(
      sol.block_values[sig], bp.condition_dims, bp.condition_labels);
  const Matrix smoothed =
      detail::clip_psd(sol.block_values[f].block(r, r, d, d));
  if (real_trace(smoothed) > 0.0)
    result.certificate_smooth =
        MultipartiteState(MultipartiteState::Unchecked{}, smoothed, bp.dims, bp.labels);
  return result;
}

/// H_max^eps(A|B) = -H_min^eps(A|C) evaluated on the given purification.
inline EntropyResult h_max_smooth_pure(const PureState& s_pure,
                                       const std::string& target,
                                       const Labels& condition, SmoothingParam eps,
                                       const EntropyOptions& options = {}) {
  const MultipartiteState s = s_pure.to_state();
  Labels complement;
  for (const auto& label : s.labels()) {
    if (label == target) continue;
    if (std::find(condition.begin(), condition.end(), label) != condition.end())
      continue;
    complement.push_back(label);
  }
  for (const auto& c : condition) (void)s.index_of(c);
  EntropyResult r = h_min_smooth(s, target, complement, eps, options);
  r.value = -r.value;
  // the certificates live on the purifying side and are not meaningful here
  r.certificate_sigma.reset();
  r.certificate_smooth.reset();
  return r;
}

/// Smooth max-entropy; the state is purified internally with a private label.
inline EntropyResult h_max_smooth(const MultipartiteState& s, const std::string& target,
                                  const Labels& condition, SmoothingParam eps,
                                  const EntropyOptions& options = {}) {
  Labels keep{target};
  keep.insert(keep.end(), condition.begin(), condition.end());
  const MultipartiteState reduced = marginal(s, keep);
  const PureState pure = purify(reduced, detail::fresh_label(keep, "_purifier"));
  return h_max_smooth_pure(pure, target, condition, eps, options);
}

/// Entropy in bits of a spectrum; eigenvalues below 1e-12 contribute 0.
inline double spectral_entropy(const RealVector& ev) {
  double h = 0.0;
  for (long i = 0; i < ev.size(); ++i)
    if (ev(i) > 1e-12) h -= ev(i) * std::log2(ev(i));
  return h;
}

inline double von_neumann(const MultipartiteState& s) {
  return spectral_entropy(eigenvalues_hermitian(s.op()));
}

/// H(A|B) = H(AB) - H(B).
inline double von_neumann(const MultipartiteState& s, const std::string& target,
                          const Labels& condition) {
  if (std::abs(s.trace() - 1.0) > 1e-8)
    throw ArgumentError("von_neumann: state must be normalized");
  Labels joint{target};
  joint.insert(joint.end(), condition.begin(), condition.end());
  const double h_joint = von_neumann(marginal(s, joint));
  const double h_cond = condition.empty() ? 0.0 : von_neumann(marginal(s, condition));
  return h_joint - h_cond;
}

namespace detail {
inline void check_distribution(const std::vector<double>& p) {
  double sum = 0.0, maxp = 0.0;
  for (double v : p) {
    if (!(v >= -1e-12)) throw ArgumentError("probability vector has a negative entry");
    sum += v;
    maxp = std::max(maxp, v);
  }
  if (sum > 1.0 + 1e-9) throw ArgumentError("probabilities sum above one");
  if (!(maxp > 0.0)) throw ArgumentError("probability vector is all zero");
}
}  // namespace detail

/// H_inf(p) = -log2 max p.
inline double renyi_inf(const std::vector<double>& p) {
  detail::check_distribution(p);
  return -std::log2(*std::max_element(p.begin(), p.end()));
}

/// H_{1/2}(p) = 2 log2 sum sqrt(p).
inline double renyi_half(const std::vector<double>& p) {
  detail::check_distribution(p);
  double s = 0.0;
  for (double v : p) s += std::sqrt(std::max(v, 0.0));
  return 2.0 * std::log2(s);
}

inline double shannon(const std::vector<double>& p) {
  detail::check_distribution(p);
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

inline double binary_entropy(double d) {
  if (!(d >= 0.0 && d <= 1.0))
    throw ArgumentError("binary_entropy: argument outside [0, 1]");
  if (d == 0.0 || d == 1.0) return 0.0;
  return -d * std::log2(d) - (1.0 - d) * std::log2(1.0 - d);
}

}  // namespace sek
