#pragma once

// POVMs, their incompatibility, measurement channels producing
// classical-quantum states, and the Stinespring isometries used to audit the
// operator inequalities behind the uncertainty relation.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sek/errors.hpp"
#include "sek/linalg.hpp"
#include "sek/random.hpp"
#include "sek/state.hpp"

namespace sek {

class Povm {
 public:
  Povm(std::vector<Matrix> elements, std::vector<std::string> outcome_labels,
       std::string name = "")
      : elements_(std::move(elements)),
        outcome_labels_(std::move(outcome_labels)),
        name_(std::move(name)) {
    if (elements_.empty()) throw ArgumentError("POVM has no elements");
    if (outcome_labels_.empty())
      for (std::size_t i = 0; i < elements_.size(); ++i)
        outcome_labels_.push_back(std::to_string(i));
    if (outcome_labels_.size() != elements_.size())
      throw ArgumentError("POVM outcome labels do not match element count");
    dim_ = elements_.front().rows();
    Matrix sum = Matrix::Zero(dim_, dim_);
    for (auto& m : elements_) {
      if (m.rows() != dim_ || m.cols() != dim_)
        throw ArgumentError("POVM elements differ in dimension");
      require_hermitian(m, 1e-9);
      m = hermitize(m);
      if (min_eigenvalue(m) < -kPsdTol)
        throw NotPsdError("POVM element is not positive semi-definite");
      sum += m;
    }
    if ((sum - identity(dim_)).cwiseAbs().maxCoeff() > 1e-9)
      throw ArgumentError("POVM elements do not sum to the identity");
  }

  long dim() const { return dim_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<Matrix>& elements() const { return elements_; }
  const Matrix& element(std::size_t i) const { return elements_[i]; }
  const std::vector<std::string>& outcome_labels() const {
    return outcome_labels_;
  }
  const std::string& name() const { return name_; }

 private:
  long dim_ = 0;
  std::vector<Matrix> elements_;
  std::vector<std::string> outcome_labels_;
  std::string name_;
};

/// Rank-one projective measurement onto the columns of a unitary.
inline Povm projective_povm(const Matrix& basis, std::string name = "") {
  std::vector<Matrix> elements;
  std::vector<std::string> labels;
  for (long i = 0; i < basis.cols(); ++i) {
    elements.push_back(projector(basis.col(i)));
    labels.push_back(std::to_string(i));
  }
  return {std::move(elements), std::move(labels), std::move(name)};
}

inline Povm computational_povm(long d) {
  return projective_povm(identity(d), "computational");
}

/// Qubit measurement in the |+>, |-> basis.
inline Povm hadamard_povm() {
  Matrix h(2, 2);
  h << 1, 1, 1, -1;
  h *= M_SQRT1_2;
  return projective_povm(h, "hadamard");
}

inline Matrix fourier_matrix(long d) {
  Matrix f(d, d);
  for (long j = 0; j < d; ++j)
    for (long k = 0; k < d; ++k)
      f(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(d)),
                           2.0 * M_PI * static_cast<double>(j * k) / d);
  return f;
}

inline Povm fourier_povm(long d) {
  return projective_povm(fourier_matrix(d), "fourier");
}

inline Povm random_projective_povm(long dim, Rng& rng) {
  return projective_povm(rng.haar_unitary(dim), "random-projective");
}

/// Random POVM: M_x = S^{-1/2} G_x S^{-1/2} with Wishart G_x and S = sum G_x.
inline Povm random_povm(long dim, std::size_t outcomes, Rng& rng) {
  if (outcomes == 0) throw ArgumentError("random_povm: need an outcome");
  std::vector<Matrix> g;
  Matrix sum = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < outcomes; ++i) {
    const Matrix a = rng.ginibre(dim, dim);
    g.push_back(a * a.adjoint());
    sum += g.back();
  }
  const EigenSystem es = eig_hermitian(sum);
  const Matrix inv_sqrt =
      apply_spectral(es, [](double x) { return 1.0 / std::sqrt(x); });
  std::vector<Matrix> elements;
  for (const auto& gi : g) elements.push_back(hermitize(inv_sqrt * gi * inv_sqrt));
  return {std::move(elements), {}, "random-povm"};
}

inline Povm random_povm(long dim, std::size_t outcomes, std::uint64_t seed) {
  Rng rng(seed);
  return random_povm(dim, outcomes, rng);
}

struct OverlapResult {
  double c = 1.0;
  double q = 0.0;
  std::pair<std::string, std::string> argmax;
};

/// c = max_{x,z} ||sqrt(M_x) sqrt(N_z)||^2 and q = -log2 c.  Zero elements
/// are skipped.
inline OverlapResult overlap(const Povm& x, const Povm& z) {
  if (x.dim() != z.dim())
    throw ArgumentError("overlap: POVMs act on different dimensions");
  std::vector<Matrix> sx, sz;
  for (const auto& m : x.elements()) sx.push_back(matrix_sqrt(m));
  for (const auto& n : z.elements()) sz.push_back(matrix_sqrt(n));
  auto nonzero = [](const Matrix& m) { return m.cwiseAbs().maxCoeff() > 0.0; };
  bool any_x = false, any_z = false;
  for (const auto& m : x.elements()) any_x = any_x || nonzero(m);
  for (const auto& n : z.elements()) any_z = any_z || nonzero(n);
  if (!any_x || !any_z)
    throw ArgumentError("overlap: a POVM has only zero elements");

  OverlapResult result;
  result.c = -1.0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    if (!nonzero(x.element(i))) continue;
    for (std::size_t j = 0; j < sz.size(); ++j) {
      if (!nonzero(z.element(j))) continue;
      const double norm = operator_norm(sx[i] * sz[j]);
      if (norm * norm > result.c) {
        result.c = norm * norm;
        result.argmax = {x.outcome_labels()[i], z.outcome_labels()[j]};
      }
    }
  }
  result.c = std::clamp(result.c, 1e-300, 1.0);
  result.q = result.c < 1.0 ? -std::log2(result.c) : 0.0;
  return result;
}

/// Post-measurement classical-quantum state sum_x |x><x| (x) tau^x.
struct CqState {
  std::string register_label;
  std::vector<std::string> outcome_labels;
  std::vector<Matrix> conditional;  // tau^x on the kept systems
  Dims kept_dims;
  Labels kept_labels;

  std::vector<double> probabilities() const {
    std::vector<double> p;
    for (const auto& t : conditional) p.push_back(real_trace(t));
    return p;
  }

  /// The cq state with the classical register first.
  MultipartiteState to_state() const {
    const long k = static_cast<long>(conditional.size());
    const long d = detail::product(kept_dims);
    Matrix op = Matrix::Zero(k * d, k * d);
    for (long x = 0; x < k; ++x) op.block(x * d, x * d, d, d) = conditional[x];
    Dims dims{k};
    dims.insert(dims.end(), kept_dims.begin(), kept_dims.end());
    Labels labels{register_label};
    labels.insert(labels.end(), kept_labels.begin(), kept_labels.end());
    return {MultipartiteState::Unchecked{}, op, dims, labels};
  }
};

/// Measures subsystem `measured` with `povm` and keeps the systems in `keep`
/// (in the listed order) alongside the outcome register.
inline CqState measure_to_cq(const MultipartiteState& s, const Povm& povm,
                             const std::string& measured, const Labels& keep,
                             const std::string& register_label = "X") {
  if (povm.dim() != s.dim_of(measured))
    throw ArgumentError("measure_to_cq: POVM dimension " +
                        std::to_string(povm.dim()) + " does not match system '" +
                        measured + "'");
  for (const auto& label : keep)
    if (label == measured)
      throw ArgumentError("measure_to_cq: cannot keep the measured system");
  Labels order{measured};
  order.insert(order.end(), keep.begin(), keep.end());
  const MultipartiteState reduced = marginal(s, order);
  const long da = povm.dim();
  const long dk = reduced.dim() / da;
  std::vector<bool> keep_mask(order.size(), true);
  keep_mask[0] = false;

  CqState cq;
  cq.register_label = register_label;
  cq.outcome_labels = povm.outcome_labels();
  cq.kept_labels = keep;
  for (const auto& label : keep) cq.kept_dims.push_back(s.dim_of(label));
  for (const auto& m : povm.elements()) {
    const Matrix lift = kron(matrix_sqrt(m), identity(dk));
    const Matrix post = lift * reduced.op() * lift.adjoint();
    cq.conditional.push_back(hermitize(
        detail::partial_trace(post, reduced.dims(), keep_mask)));
  }
  return cq;
}

/// Outcome distribution tr(M_x rho) of a single-system state.
inline std::vector<double> born_probabilities(const Matrix& rho,
                                              const Povm& povm) {
  if (rho.rows() != povm.dim())
    throw ArgumentError("born_probabilities: dimension mismatch");
  std::vector<double> p;
  for (const auto& m : povm.elements()) p.push_back((m * rho).trace().real());
  return p;
}

struct Isometry {
  Matrix matrix;
  Dims input_dims;
  Labels input_labels;
  Dims output_dims;
  Labels output_labels;
};

/// U = sum_x |x> (x) |x> (x) sqrt(M_x), outputs ordered (X, X', A).
inline Isometry stinespring(const Povm& povm, const std::string& reg = "X",
                            const std::string& copy = "X'",
                            const std::string& system = "A") {
  const long k = static_cast<long>(povm.size());
  const long d = povm.dim();
  Matrix u = Matrix::Zero(k * k * d, d);
  for (long x = 0; x < k; ++x)
    u.block((x * k + x) * d, 0, d, d) = matrix_sqrt(povm.element(x));
  return {u, {d}, {system}, {k, k, d}, {reg, copy, system}};
}

/// Conjugates the subsystem `target` by an isometry; the output registers
/// replace it in place.
inline MultipartiteState apply_isometry(const MultipartiteState& s,
                                        const Isometry& iso,
                                        const std::string& target) {
  const std::size_t pos = s.index_of(target);
  if (iso.matrix.cols() != s.dims()[pos])
    throw ArgumentError("apply_isometry: input dimension mismatch");
  Labels order{target};
  for (const auto& label : s.labels())
    if (label != target) order.push_back(label);
  const MultipartiteState front = permute(s, order);
  const long rest = s.dim() / s.dims()[pos];
  const Matrix lift = kron(iso.matrix, identity(rest));
  const Matrix op = lift * front.op() * lift.adjoint();

  Dims dims = iso.output_dims;
  Labels labels = iso.output_labels;
  for (std::size_t k = 1; k < order.size(); ++k) {
    dims.push_back(front.dims()[k]);
    labels.push_back(order[k]);
  }
  const MultipartiteState out{MultipartiteState::Unchecked{}, op, dims, labels};
  // restore the original position of the measured system's replacement
  Labels final_order;
  for (const auto& label : s.labels()) {
    if (label == target)
      final_order.insert(final_order.end(), iso.output_labels.begin(),
                         iso.output_labels.end());
    else
      final_order.push_back(label);
  }
  return permute(out, final_order);
}

/// max over (x, z) of lambda_max(sqrt(N_z) M_x sqrt(N_z)) - c.  Never
/// positive beyond roundoff.
inline double proof_operator_bound(const Povm& x, const Povm& z) {
  if (x.dim() != z.dim())
    throw ArgumentError("proof_operator_bound: dimension mismatch");
  const double c = overlap(x, z).c;
  double worst = -INFINITY;
  for (const auto& n : z.elements()) {
    const Matrix sn = matrix_sqrt(n);
    for (const auto& m : x.elements())
      worst = std::max(worst, max_eigenvalue(hermitize(sn * m * sn)) - c);
  }
  return worst;
}

/// Builds W = U V^dagger, evaluates Tr_{X'A}(W (1_Z (x) sigma_{Z'AB}) W^dagger)
/// and returns lambda_max of that operator minus c 1_X (x) sigma_B.
inline double proof_channel_bound(const Povm& z, const Povm& x,
                                  const MultipartiteState& sigma) {
  if (x.dim() != z.dim())
    throw ArgumentError("proof_channel_bound: POVM dimension mismatch");
  if (sigma.dims().size() != 3 ||
      sigma.dims()[0] != static_cast<long>(z.size()) ||
      sigma.dims()[1] != z.dim())
    throw ArgumentError(
        "proof_channel_bound: sigma must act on Z' (x) A (x) B");
  const long kz = static_cast<long>(z.size());
  const long kx = static_cast<long>(x.size());
  const long d = z.dim();
  const long db = sigma.dims()[2];

  const Matrix u = stinespring(x).matrix;
  const Matrix v = stinespring(z).matrix;
  const Matrix w = u * v.adjoint();
  const Matrix lifted = kron(w, identity(db));
  const Matrix input = kron(identity(kz), sigma.op());
  const Matrix output = lifted * input * lifted.adjoint();
  const Matrix lhs =
      detail::partial_trace(output, {kx, kx, d, db}, {true, false, false, true});
  const Matrix sigma_b =
      detail::partial_trace(sigma.op(), sigma.dims(), {false, false, true});
  const double c = overlap(x, z).c;
  return max_eigenvalue(hermitize(lhs - c * kron(identity(kx), sigma_b)));
}

}  // namespace sek
