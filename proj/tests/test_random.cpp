#include <gtest/gtest.h>

#include "sek/random.hpp"

using namespace sek;

TEST(Rng, DeterministicPerSeed) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    (void)c;
  }
  EXPECT_NE(Rng(42).next_u64(), Rng(43).next_u64());
}

TEST(Rng, SubstreamsDiffer) {
  EXPECT_NE(Rng::substream(1, 0).next_u64(), Rng::substream(1, 1).next_u64());
  EXPECT_EQ(Rng::substream(1, 5).next_u64(), Rng::substream(1, 5).next_u64());
}

TEST(Rng, UniformAndBelowRanges) {
  Rng rng(7);
  double mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u;
  }
  EXPECT_NEAR(mean / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  for (int i = 0; i < 1000; ++i) ASSERT_LT(rng.below(3), 3u);
}

TEST(Rng, ComplexNormalHasUnitVariance) {
  Rng rng(8);
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += std::norm(rng.complex_normal());
  EXPECT_NEAR(s / n, 1.0, 0.02);
}

TEST(Rng, HaarUnitaryIsUnitary) {
  Rng rng(9);
  for (long d : {1L, 2L, 3L, 6L}) {
    const Matrix u = rng.haar_unitary(d);
    EXPECT_LE((u.adjoint() * u - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Rng, HaarFirstColumnIsUniformOnSphere) {
  // E|u_00|^2 = 1/d for a Haar unitary
  Rng rng(10);
  const long d = 3;
  double s = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) s += std::norm(rng.haar_unitary(d)(0, 0));
  EXPECT_NEAR(s / n, 1.0 / d, 0.01);
}
