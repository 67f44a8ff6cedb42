#include "support.hpp"

using namespace gaudin;
using gaudin::testing::error_kind_of;
using gaudin::testing::expect_all;

class AlgebraSuite : public ::testing::TestWithParam<int> {};

TEST_P(AlgebraSuite, IdentitiesHold) { expect_all(algebra_suite(GetParam(), cplx(0.3, 1.0), 60, 5)); }

INSTANTIATE_TEST_SUITE_P(Ranks, AlgebraSuite, ::testing::Values(2, 3, 4));

TEST(Salg, Sl2Identities) { expect_all(sl2_suite(cplx(0.25, 0.8), 50, 9)); }

TEST(Salg, ClockShiftCommutation) {
  // Lambda Q = e_N(1) Q Lambda, Q^N = Lambda^N = 1, built entrywise here.
  for (int n = 2; n <= 5; ++n) {
    Mat q = Mat::Zero(n, n), l = Mat::Zero(n, n);
    for (int m = 0; m < n; ++m) {
      q(m, m) = std::polar(1.0, 2 * pi * (m + 1) / n);
      l(m, (m + 1) % n) = 1;
    }
    EXPECT_LT((clock_matrix(n) - q).norm(), 1e-15);
    EXPECT_LT((shift_matrix(n) - l).norm(), 0.0 + 1e-300);
    EXPECT_LT((l * q - std::polar(1.0, 2 * pi / n) * q * l).norm(), 1e-14);
  }
}

TEST(Salg, BasisIsTracelessAndOrthogonal) {
  for (int n = 2; n <= 4; ++n) {
    const Algebra& alg = Algebra::get(n);
    EXPECT_EQ(int(alg.labels().size()), n * n - 1);
    for (const Index& a : alg.labels()) {
      EXPECT_LT(std::abs(alg.t(a).trace()), 1e-13);
      for (const Index& b : alg.labels()) {
        // <T_a, T_b>_HS = N delta_ab.
        const cplx hs = (alg.t(a).adjoint() * alg.t(b)).trace();
        EXPECT_LT(std::abs(hs - ((a.a1 == b.a1 && a.a2 == b.a2) ? double(n) : 0.0)), 1e-13);
      }
    }
  }
}

TEST(Salg, CommutatorByMatrixProduct) {
  for (int n = 2; n <= 4; ++n) {
    const Algebra& alg = Algebra::get(n);
    for (const Index& a : alg.labels())
      for (const Index& b : alg.labels()) {
        const Index s = reduce(a + b, n);
        const Mat lhs = comm(alg.t(a), alg.t(b));
        const Mat rhs = (s.a1 || s.a2) ? Mat(bracket_coefficient(a, b, n) * alg.t(s)) : zero_mat(n);
        EXPECT_LT((lhs - rhs).norm(), 1e-13);
      }
  }
}

TEST(Salg, PauliAlgebra) {
  const Mat s1 = pauli(1), s2 = pauli(2), s3 = pauli(3);
  Mat ref1(2, 2), ref2(2, 2), ref3(2, 2);
  ref1 << 0, 1, 1, 0;
  ref2 << 0, -I, I, 0;
  ref3 << 1, 0, 0, -1;
  EXPECT_LT((s1 - ref1).norm(), 1e-14);
  EXPECT_LT((s2 - ref2).norm(), 1e-14);
  EXPECT_LT((s3 - ref3).norm(), 1e-14);
}

TEST(Salg, HalfPeriodsAndRoundTrip) {
  EllipticContext ctx(cplx(0.3, 1.0));
  EXPECT_LT(std::abs(half_period({1, 2}, 3, ctx) - (1.0 + 2.0 * ctx.tau()) / 3.0), 1e-15);
  EXPECT_EQ(error_kind_of([&] { half_period({3, 3}, 3, ctx); }), ErrorKind::domain);
  Mat a(3, 3);
  a << 1, 2, I, 0, -3, 4, cplx(1, 1), 5, 2;
  EXPECT_LT((reconstruct(decompose(a)) - a).norm(), 1e-13);
  EXPECT_EQ(error_kind_of([] { decompose(Mat::Identity(2, 2)); }), ErrorKind::domain);
}
