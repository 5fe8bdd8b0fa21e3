#include <gtest/gtest.h>

#include "sek/measurement.hpp"

using namespace sek;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Vector phi_plus() {
  Vector v = Vector::Zero(4);
  v(0) = v(3) = M_SQRT1_2;
  return v;
}

}  // namespace

TEST(Povm, Validation) {
  EXPECT_THROW(Povm({diag({1.0, 0.0})}, {}), ArgumentError);  // does not sum to 1
  EXPECT_THROW(Povm({diag({1.5, 0.5}), diag({-0.5, 0.5})}, {}), NotPsdError);
  EXPECT_THROW(Povm({diag({1.0, 0.0}), diag({0.0, 1.0})}, {"a"}), ArgumentError);
  const Povm p({diag({1.0, 0.0}), diag({0.0, 1.0})}, {});
  EXPECT_EQ(p.outcome_labels(), (std::vector<std::string>{"0", "1"}));
}

TEST(Overlap, Examples) {
  const OverlapResult bb84 = overlap(computational_povm(2), hadamard_povm());
  EXPECT_NEAR(bb84.c, 0.5, 1e-12);
  EXPECT_NEAR(bb84.q, 1.0, 1e-12);
  const OverlapResult same = overlap(computational_povm(3), computational_povm(3));
  EXPECT_NEAR(same.c, 1.0, 1e-12);
  EXPECT_EQ(same.q, 0.0);
  const OverlapResult mub = overlap(computational_povm(3), fourier_povm(3));
  EXPECT_NEAR(mub.c, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(mub.q, std::log2(3.0), 1e-9);
}

TEST(Overlap, SkipsZeroElementsAndRejectsAllZero) {
  const Povm padded({diag({1.0, 0.0}), diag({0.0, 1.0}), Matrix::Zero(2, 2)}, {});
  EXPECT_NEAR(overlap(padded, hadamard_povm()).c, 0.5, 1e-12);
  EXPECT_THROW(overlap(computational_povm(2), computational_povm(3)), ArgumentError);
}

TEST(Overlap, RankOneReducesToMaxInnerProduct) {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const long d = 2 + rng.below(3);
    const Matrix u = rng.haar_unitary(d), v = rng.haar_unitary(d);
    double oracle = 0.0;
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j) oracle = std::max(oracle, std::norm(u.col(i).dot(v.col(j))));
    const double c = overlap(projective_povm(u), projective_povm(v)).c;
    EXPECT_NEAR(c, oracle, 1e-12);
  }
}

TEST(Overlap, SymmetricAndBounded) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const long d = 2 + rng.below(3);
    const Povm x = random_povm(d, 2 + rng.below(3), rng);
    const Povm z = random_povm(d, 2 + rng.below(3), rng);
    const OverlapResult a = overlap(x, z), b = overlap(z, x);
    EXPECT_NEAR(a.c, b.c, 1e-12);
    EXPECT_GT(a.c, 0.0);
    EXPECT_LE(a.c, 1.0);
    EXPECT_NEAR(a.q, -std::log2(a.c), 1e-12);
  }
}

TEST(Overlap, ProjectiveIncompatibilityAtMostLogDim) {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const long d = 2 + rng.below(3);
    const OverlapResult r =
        overlap(random_projective_povm(d, rng), random_projective_povm(d, rng));
    EXPECT_GE(r.q, 0.0);
    EXPECT_LE(r.q, std::log2(static_cast<double>(d)) + 1e-12);
  }
}

TEST(Overlap, UnsharpPovmCanExceedLogDim) {
  // k copies of 1/k: c = 1/k^2, so q = 2 log2 k > log2 min(k, k, d) for d = 2
  const long k = 3;
  const Povm trivial(std::vector<Matrix>(k, identity(2) / static_cast<double>(k)), {});
  EXPECT_NEAR(overlap(trivial, trivial).q, 2.0 * std::log2(3.0), 1e-12);
}

TEST(RandomPovm, SumsToIdentity) {
  const Povm p = random_povm(2, 2, 3);
  Matrix sum = Matrix::Zero(2, 2);
  for (const auto& m : p.elements()) sum += m;
  EXPECT_LE(max_abs(sum - identity(2)), 1e-10);
  EXPECT_EQ(random_povm(3, 4, 9).element(2), random_povm(3, 4, 9).element(2));
}

TEST(MeasureToCq, MaximallyEntangled) {
  const MultipartiteState s(projector(phi_plus()), {2, 2}, {"A", "B"});
  const CqState cq = measure_to_cq(s, computational_povm(2), "A", {"B"});
  EXPECT_LE(max_abs(cq.conditional[0] - 0.5 * projector(basis_ket(2, 0))), 1e-15);
  EXPECT_LE(max_abs(cq.conditional[1] - 0.5 * projector(basis_ket(2, 1))), 1e-15);
  const MultipartiteState xb = cq.to_state();
  EXPECT_EQ(xb.labels(), (Labels{"X", "B"}));
}

TEST(MeasureToCq, ProductStateIsUndisturbed) {
  Rng rng(4);
  const MultipartiteState a = random_state({2}, 2, rng, {"A"});
  const MultipartiteState b = random_state({3}, 2, rng, {"B"});
  const Povm povm = random_povm(2, 3, rng);
  const CqState cq = measure_to_cq(tensor(a, b), povm, "A", {"B"});
  for (std::size_t x = 0; x < povm.size(); ++x) {
    const double p = (povm.element(x) * a.op()).trace().real();
    EXPECT_LE(max_abs(cq.conditional[x] - p * b.op()), 1e-12);
  }
}

TEST(MeasureToCq, BornRuleOracle) {
  Rng rng(5);
  const MultipartiteState s = random_state({2, 2, 2}, 3, rng);
  const Povm povm = random_povm(2, 3, rng);
  const CqState cq = measure_to_cq(s, povm, "B", {"A", "C"});
  const Matrix rho_b = marginal(s, {"B"}).op();
  double total = 0.0;
  for (std::size_t x = 0; x < povm.size(); ++x) {
    EXPECT_NEAR(cq.probabilities()[x], (povm.element(x) * rho_b).trace().real(), 1e-10);
    total += cq.probabilities()[x];
  }
  EXPECT_NEAR(total, s.trace(), 1e-9);
  EXPECT_THROW(measure_to_cq(s, computational_povm(3), "A", {"B"}), ArgumentError);
  EXPECT_THROW(measure_to_cq(s, povm, "A", {"A"}), ArgumentError);
}

TEST(Stinespring, IsometryAndExamples) {
  const Isometry z = stinespring(computational_povm(2));
  EXPECT_EQ(z.matrix.adjoint() * z.matrix, identity(2));
  EXPECT_EQ(z.output_labels, (Labels{"X", "X'", "A"}));
  const Isometry triv = stinespring(Povm({identity(3)}, {}));
  EXPECT_EQ(triv.output_dims, (Dims{1, 1, 3}));
  EXPECT_LE(max_abs(triv.matrix - identity(3)), 1e-15);
  const Isometry r = stinespring(random_povm(3, 4, 1));
  EXPECT_LE(max_abs(r.matrix.adjoint() * r.matrix - identity(3)), 1e-9);
}

TEST(Stinespring, ConjugationReproducesCqState) {
  Rng rng(6);
  const Povm povm = random_povm(2, 3, rng);
  const Isometry u = stinespring(povm);
  for (int t = 0; t < 50; ++t) {
    const MultipartiteState s = random_state({2, 2}, 1 + rng.below(4), rng);
    const MultipartiteState out = apply_isometry(s, u, "A");
    const MultipartiteState xb = marginal(out, {"X", "B"});
    const MultipartiteState cq = measure_to_cq(s, povm, "A", {"B"}).to_state();
    EXPECT_LE(max_abs(xb.op() - cq.op()), 1e-10);
    EXPECT_NEAR(out.trace(), s.trace(), 1e-12);
  }
}

TEST(ProofOperatorBound, Examples) {
  EXPECT_LE(proof_operator_bound(computational_povm(2), hadamard_povm()), 1e-12);
  EXPECT_NEAR(proof_operator_bound(computational_povm(2), computational_povm(2)), 0.0, 1e-12);
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const long d = 2 + rng.below(3);
    const Povm x = random_povm(d, 2 + rng.below(3), rng);
    const Povm z = random_povm(d, 2 + rng.below(3), rng);
    EXPECT_LE(proof_operator_bound(x, z), 1e-9);
  }
}

TEST(ProofChannelBound, Examples) {
  const MultipartiteState mixed(identity(8) / 8, {2, 2, 2}, {"Z'", "A", "B"});
  EXPECT_LE(proof_channel_bound(hadamard_povm(), computational_povm(2), mixed), 1e-10);
  EXPECT_LE(proof_channel_bound(computational_povm(2), computational_povm(2), mixed), 1e-10);
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const MultipartiteState sigma = random_state({2, 2, 2}, 1 + rng.below(8), rng);
    EXPECT_LE(proof_channel_bound(hadamard_povm(), computational_povm(2), sigma), 1e-9);
  }
  EXPECT_THROW(proof_channel_bound(hadamard_povm(), computational_povm(2),
                                   MultipartiteState(identity(4) / 4, {4}, {"A"})),
               ArgumentError);
}
