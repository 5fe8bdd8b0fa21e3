#include <gtest/gtest.h>

#include "sek/measurement.hpp"
#include "sek/random.hpp"
#include "sek/state.hpp"

using namespace sek;

namespace {

Vector phi_plus() {
  Vector v = Vector::Zero(4);
  v(0) = v(3) = M_SQRT1_2;
  return v;
}

Vector plus_ket() {
  Vector v(2);
  v << M_SQRT1_2, M_SQRT1_2;
  return v;
}

MultipartiteState pure_qubit(const Vector& v) { return {projector(v), {2}, {"A"}}; }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(MultipartiteState, Invariants) {
  EXPECT_THROW(MultipartiteState(identity(2), {2}, {"A"}), ArgumentError);  // trace 2
  EXPECT_THROW(MultipartiteState(diag({1.2, -0.2}), {2}, {"A"}), NotPsdError);
  EXPECT_THROW(MultipartiteState(identity(4) / 4, {2, 3}, {"A", "B"}), ArgumentError);
  EXPECT_THROW(MultipartiteState(identity(4) / 4, {2, 2}, {"A", "A"}), ArgumentError);
  EXPECT_NO_THROW(MultipartiteState(0.3 * identity(2) / 2, {2}, {"A"}));
  const MultipartiteState s(identity(4) / 4, {2, 2}, {"A", "B"});
  EXPECT_THROW(s.index_of("Q"), ArgumentError);
  EXPECT_EQ(s.dim_of("B"), 2);
}

TEST(PartialTrace, ProductState) {
  Rng rng(1);
  const MultipartiteState a = random_state({2}, 2, rng, {"A"});
  const MultipartiteState b(0.6 * random_state({3}, 2, rng).op(), {3}, {"B"});
  const MultipartiteState ab = tensor(a, b);
  const MultipartiteState red = partial_trace(ab, {"B"});
  EXPECT_LE(max_abs(red.op() - 0.6 * a.op()), 1e-12);
  EXPECT_EQ(red.labels(), Labels{"A"});
}

TEST(PartialTrace, MaximallyEntangled) {
  const MultipartiteState s(projector(phi_plus()), {2, 2}, {"A", "B"});
  EXPECT_LE(max_abs(partial_trace(s, {"B"}).op() - identity(2) / 2), 1e-15);
}

TEST(PartialTrace, MatchesNaiveContraction) {
  // oracle: explicit sum over the traced index
  const PureState psi = random_pure({2, 2, 2}, 17);
  const MultipartiteState s = psi.to_state();
  const Matrix got = partial_trace(s, {"C"}).op();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2) {
          Complex sum = 0.0;
          for (int c = 0; c < 2; ++c)
            sum += psi.vector()(4 * a + 2 * b + c) * std::conj(psi.vector()(4 * a2 + 2 * b2 + c));
          EXPECT_LE(std::abs(got(2 * a + b, 2 * a2 + b2) - sum), 1e-12);
        }
  // tracing the middle system
  const Matrix mid = partial_trace(s, {"B"}).op();
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int c2 = 0; c2 < 2; ++c2) {
          Complex sum = 0.0;
          for (int b = 0; b < 2; ++b)
            sum += psi.vector()(4 * a + 2 * b + c) * std::conj(psi.vector()(4 * a2 + 2 * b + c2));
          EXPECT_LE(std::abs(mid(2 * a + c, 2 * a2 + c2) - sum), 1e-12);
        }
}

TEST(PartialTrace, PreservesTraceAndOrder) {
  const MultipartiteState s = random_state({2, 3, 2}, 5, 4);
  const MultipartiteState r = partial_trace(s, {"B"});
  EXPECT_NEAR(r.trace(), s.trace(), 1e-10);
  EXPECT_EQ(r.labels(), (Labels{"A", "C"}));
  EXPECT_THROW(partial_trace(s, {"A", "B", "C"}), ArgumentError);
  EXPECT_THROW(partial_trace(s, {"Z"}), ArgumentError);
}

TEST(Permute, RoundTripAndMarginalOrder) {
  const MultipartiteState s = random_state({2, 3, 2}, 4, 8);
  const MultipartiteState p = permute(s, {"C", "A", "B"});
  EXPECT_EQ(p.dims(), (Dims{2, 2, 3}));
  EXPECT_LE(max_abs(permute(p, {"A", "B", "C"}).op() - s.op()), 1e-15);
  const MultipartiteState ba = marginal(s, {"B", "A"});
  const MultipartiteState ab = marginal(s, {"A", "B"});
  EXPECT_LE(max_abs(permute(ba, {"A", "B"}).op() - ab.op()), 1e-15);
}

TEST(Purify, Examples) {
  const MultipartiteState mixed(identity(2) / 2, {2}, {"A"});
  const PureState p = purify(mixed, "R");
  EXPECT_EQ(p.dims(), (Dims{2, 2}));
  EXPECT_LE(max_abs(partial_trace(p.to_state(), {"R"}).op() - mixed.op()), 1e-12);
  // reduced state on the purifier is also maximally mixed
  EXPECT_LE(max_abs(partial_trace(p.to_state(), {"A"}).op() - identity(2) / 2), 1e-12);

  const PureState q = purify(pure_qubit(plus_ket()), "R");
  EXPECT_EQ(q.dims().back(), 1);

  const MultipartiteState r3 = random_state({4}, 3, 21);
  const PureState p3 = purify(r3, "R");
  EXPECT_EQ(p3.dims().back(), 3);
  EXPECT_LE(max_abs(partial_trace(p3.to_state(), {"R"}).op() - r3.op()), 1e-9);
}

TEST(Purify, RoundTripOnRandomStates) {
  Rng rng(33);
  for (int t = 0; t < 20; ++t) {
    const MultipartiteState s = random_state({2, 3}, 1 + rng.below(6), rng);
    const PureState p = purify(s, "R");
    EXPECT_LE(max_abs(partial_trace(p.to_state(), {"R"}).op() - s.op()), 1e-9);
  }
}

TEST(Purify, SubnormalizedKeepsTrace) {
  const MultipartiteState s(0.4 * identity(2) / 2, {2}, {"A"});
  const PureState p = purify(s, "R");
  EXPECT_NEAR(p.vector().squaredNorm(), 0.4, 1e-12);
}

TEST(Fidelity, Examples) {
  const MultipartiteState rho = random_state({3}, 2, 5);
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-9);
  const MultipartiteState zero = pure_qubit(basis_ket(2, 0));
  const MultipartiteState one = pure_qubit(basis_ket(2, 1));
  EXPECT_NEAR(fidelity(zero, one), 0.0, 1e-12);
  EXPECT_NEAR(fidelity(zero, pure_qubit(plus_ket())), M_SQRT1_2, 1e-12);
  const MultipartiteState other = random_state({3}, 3, 6);
  EXPECT_NEAR(fidelity(rho, other), fidelity(other, rho), 1e-10);
  EXPECT_THROW(fidelity(zero, rho), ArgumentError);
}

TEST(Fidelity, PureStateOverlapOracle) {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const PureState a = random_pure({3}, rng), b = random_pure({3}, rng);
    EXPECT_NEAR(fidelity(a.to_state(), b.to_state()), std::abs(a.vector().dot(b.vector())),
                1e-7);
  }
}

TEST(GeneralizedFidelity, Examples) {
  const MultipartiteState r = random_state({2}, 2, 3);
  const MultipartiteState s = random_state({2}, 1, 4);
  EXPECT_NEAR(generalized_fidelity(r, s), fidelity(r, s), 1e-12);
  const MultipartiteState sub(0.7 * r.op(), {2}, {"A"});
  EXPECT_NEAR(generalized_fidelity(sub, sub), 1.0, 1e-9);
  const MultipartiteState half(0.5 * projector(basis_ket(2, 0)), {2}, {"A"});
  EXPECT_NEAR(generalized_fidelity(half, pure_qubit(basis_ket(2, 0))), std::sqrt(0.5), 1e-12);
}

TEST(GeneralizedFidelity, EqualsFidelityOfExtendedOperators) {
  Rng rng(44);
  for (int t = 0; t < 10; ++t) {
    const double tr = 0.3 + 0.7 * rng.uniform(), ts = 0.3 + 0.7 * rng.uniform();
    const MultipartiteState r(tr * random_state({3}, 3, rng).op(), {3}, {"A"});
    const MultipartiteState s(ts * random_state({3}, 2, rng).op(), {3}, {"A"});
    Matrix re = Matrix::Zero(4, 4), se = Matrix::Zero(4, 4);
    re.topLeftCorner(3, 3) = r.op();
    se.topLeftCorner(3, 3) = s.op();
    re(3, 3) = 1.0 - tr;
    se(3, 3) = 1.0 - ts;
    EXPECT_NEAR(generalized_fidelity(r, s), fidelity(re, se), 1e-9);
  }
}

TEST(PurifiedDistance, Examples) {
  const MultipartiteState r = random_state({2}, 2, 9);
  EXPECT_NEAR(purified_distance(r, r), 0.0, 1e-6);
  EXPECT_NEAR(purified_distance(pure_qubit(basis_ket(2, 0)), pure_qubit(basis_ket(2, 1))), 1.0,
              1e-12);
  // F = 0.8 for pure states with overlap 0.8
  Vector v(2);
  v << 0.8, 0.6;
  EXPECT_NEAR(purified_distance(pure_qubit(basis_ket(2, 0)), pure_qubit(v)), 0.6, 1e-12);
}

TEST(PurifiedDistance, MetricProperties) {
  Rng rng(100);
  for (int t = 0; t < 100; ++t) {
    const MultipartiteState a = random_state({2}, 1 + rng.below(2), rng);
    const MultipartiteState b = random_state({2}, 1 + rng.below(2), rng);
    const MultipartiteState c = random_state({2}, 1 + rng.below(2), rng);
    EXPECT_NEAR(purified_distance(a, b), purified_distance(b, a), 1e-12);
    EXPECT_LE(purified_distance(a, c),
              purified_distance(a, b) + purified_distance(b, c) + 1e-9);
  }
}

TEST(PurifiedDistance, ContractsUnderChannels) {
  Rng rng(7);
  const Povm povm = random_povm(2, 3, rng);
  const Isometry iso = stinespring(povm);
  for (int t = 0; t < 30; ++t) {
    const MultipartiteState r = random_state({2, 2}, 1 + rng.below(4), rng);
    MultipartiteState s = random_state({2, 2}, 1 + rng.below(4), rng);
    if (t % 3 == 0)  // subnormalized second argument
      s = MultipartiteState(0.8 * s.op(), s.dims(), s.labels());
    const double p = purified_distance(r, s);
    EXPECT_LE(purified_distance(partial_trace(r, {"B"}), partial_trace(s, {"B"})), p + 1e-9);
    EXPECT_LE(purified_distance(apply_isometry(r, iso, "A"), apply_isometry(s, iso, "A")),
              p + 1e-9);
    EXPECT_LE(purified_distance(measure_to_cq(r, povm, "A", {"B"}).to_state(),
                                measure_to_cq(s, povm, "A", {"B"}).to_state()),
              p + 1e-9);
  }
}

TEST(UhlmannExtension, PreservesDistance) {
  Rng rng(55);
  for (int t = 0; t < 30; ++t) {
    const PureState rho_ab = random_pure({2, 3}, rng);
    const MultipartiteState tau_a = random_state({2}, 1 + rng.below(2), rng);
    const double eps = purified_distance(marginal(rho_ab.to_state(), {"A"}), tau_a);
    const PureState tau_ab = uhlmann_extension(rho_ab, tau_a);
    EXPECT_LE(max_abs(marginal(tau_ab.to_state(), {"A"}).op() - tau_a.op()), 1e-9);
    EXPECT_LE(purified_distance(rho_ab.to_state(), tau_ab.to_state()), eps + 1e-9);
  }
}

TEST(UhlmannExtension, RequiresLargeEnoughB) {
  const PureState rho = random_pure({3, 2}, 1);
  const MultipartiteState tau = random_state({3}, 3, 2);
  EXPECT_THROW(uhlmann_extension(rho, tau), ArgumentError);
}

TEST(RandomState, DeterministicAndValid) {
  const MultipartiteState a = random_state({2}, 1, 7), b = random_state({2}, 1, 7);
  EXPECT_EQ(a.op(), b.op());
  EXPECT_NEAR(a.trace(), 1.0, 1e-12);
  EXPECT_NEAR(eigenvalues_hermitian(a.op()).maxCoeff(), 1.0, 1e-12);  // rank one
  EXPECT_THROW(random_state({2}, 3, 1), ArgumentError);
  const PureState p = random_pure({2, 2}, 3), q = random_pure({2, 2}, 3);
  EXPECT_EQ(p.vector(), q.vector());
  EXPECT_NEAR(p.vector().norm(), 1.0, 1e-12);
}
