#include "support.hpp"

using namespace gaudin;
using gaudin::testing::error_kind_of;
using gaudin::testing::expect_all;

namespace {

const cplx taus[] = {cplx(0, 1), cplx(0.3, 1.0), cplx(0.25, 0.8)};

// Direct bilateral sum, independent of the library series and its stop rule.
cplx theta_bruteforce(cplx z, cplx tau) {
  cplx s = 0;
  for (int k = -40; k <= 40; ++k) {
    const double h = k + 0.5;
    s += std::exp(I * pi * tau * h * h + 2.0 * pi * I * h * (z + 0.5));
  }
  return std::exp(-3.0 * I * pi / 4.0) * s;
}

// G2 = sum_n sum'_m (m + n tau)^-2 with the inner sums in closed form.
cplx g2_rowsum(cplx tau) {
  cplx s = pi * pi / 3.0;
  for (int n = 1; n <= 60; ++n) {
    const cplx sn = std::sin(pi * double(n) * tau);
    s += 2.0 * pi * pi / (sn * sn);
  }
  return s;
}

}  // namespace

class EfunSuite : public ::testing::TestWithParam<cplx> {};

TEST_P(EfunSuite, IdentitiesHold) { expect_all(efun_suite(GetParam(), 200, 11)); }

INSTANTIATE_TEST_SUITE_P(Moduli, EfunSuite, ::testing::ValuesIn(taus));

TEST(Efun, ThetaMatchesBruteForceSum) {
  for (cplx tau : taus) {
    EllipticContext ctx(tau);
    for (cplx z : {cplx(0.1, 0.05), cplx(-0.37, 0.2), cplx(0.45, -0.3), cplx(0.2, 0.6)}) {
      const cplx ref = theta_bruteforce(z, tau);
      EXPECT_LT(std::abs(theta(z, ctx) - ref), 1e-13 * std::max(1.0, std::abs(ref)));
      EXPECT_LT(std::abs(theta(z, ctx, ThetaForm::product) - ref), 1e-13 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(Efun, Eta1MatchesLatticeRowSums) {
  for (cplx tau : taus) {
    EllipticContext ctx(tau);
    const cplx ref = g2_rowsum(tau) / 2.0;
    EXPECT_LT(std::abs(eta1(ctx) - ref), 1e-10 * std::abs(ref)) << tau;
  }
}

TEST(Efun, LegendreRelation) {
  // zeta(z + tau) - zeta(z) = 2 eta1 tau - 2 pi i.
  for (cplx tau : taus) {
    EllipticContext ctx(tau);
    const cplx z(0.21, 0.13), e = eta1(ctx);
    const cplx d = weierstrass(WeierstrassKind::zeta, z + tau, ctx, e) - weierstrass(WeierstrassKind::zeta, z, ctx, e);
    EXPECT_LT(std::abs(d - (2.0 * e * tau - 2.0 * pi * I)), 1e-10);
  }
}

TEST(Efun, HalfPeriodValuesSumToZero) {
  for (cplx tau : taus) {
    EllipticContext ctx(tau);
    const cplx e = eta1(ctx);
    cplx s = 0;
    for (cplx w : {cplx(0.5), tau / 2.0, (1.0 + tau) / 2.0}) s += weierstrass(WeierstrassKind::p, w, ctx, e);
    EXPECT_LT(std::abs(s), 1e-10);
  }
}

TEST(Efun, WeierstrassCubic) {
  // (wp')^2 = 4 (wp - e1)(wp - e2)(wp - e3), with wp' = -2 E3.
  for (cplx tau : taus) {
    EllipticContext ctx(tau);
    const cplx e = eta1(ctx);
    cplx r[3];
    int i = 0;
    for (cplx w : {cplx(0.5), tau / 2.0, (1.0 + tau) / 2.0}) r[i++] = weierstrass(WeierstrassKind::p, w, ctx, e);
    for (cplx z : {cplx(0.17, 0.09), cplx(-0.3, 0.25)}) {
      const cplx p = weierstrass(WeierstrassKind::p, z, ctx, e), dp = -2.0 * eisenstein(3, z, ctx);
      const cplx rhs = 4.0 * (p - r[0]) * (p - r[1]) * (p - r[2]);
      EXPECT_LT(std::abs(dp * dp - rhs), 1e-9 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(Efun, PhiFromTheta) {
  // phi(u, z) = theta'(0) theta(u + z) / (theta(u) theta(z)) with theta'(0) by
  // a central difference of the brute-force sum.
  const cplx tau(0.3, 1.0);
  EllipticContext ctx(tau);
  const double h = 1e-5;
  const cplx d0 = (theta_bruteforce(h, tau) - theta_bruteforce(-h, tau)) / (2 * h);
  const cplx u(0.23, 0.11), z(-0.12, 0.31);
  const cplx ref = d0 * theta_bruteforce(u + z, tau) / (theta_bruteforce(u, tau) * theta_bruteforce(z, tau));
  EXPECT_LT(std::abs(phi(u, z, ctx) - ref), 1e-8 * std::abs(ref));
}

TEST(Efun, Errors) {
  EXPECT_EQ(error_kind_of([] { EllipticContext ctx(cplx(0, 0.1)); }), ErrorKind::domain);
  EllipticContext ctx(cplx(0, 1));
  EXPECT_EQ(error_kind_of([&] { E1(cplx(1e-5, 0), ctx); }), ErrorKind::pole);
  EXPECT_EQ(error_kind_of([&] { phi(cplx(0.2), ctx.tau(), ctx); }), ErrorKind::pole);
  EXPECT_EQ(error_kind_of([&] { eisenstein(0, 0.3, ctx); }), ErrorKind::domain);
}
