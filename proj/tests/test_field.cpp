#include "support.hpp"

using namespace gaudin;
using gaudin::testing::error_kind_of;
using gaudin::testing::expect_all;

TEST(Field, SuiteHolds) { expect_all(field_suite(4, 21)); }

TEST(Field, OrbitJetMatchesCentralDifferences) {
  const LoopField f = sample_orbit_field(cplx(0, 1), PhaseSpec{}, 77);
  const double h = 1e-4;
  for (double x : {0.0, 1.3, 4.1}) {
    const Jet j = f.jet(x), jp = f.jet(x + h), jm = f.jet(x - h);
    EXPECT_LT((j.sx - (jp.s - jm.s) / (2 * h)).norm(), 1e-7);
    EXPECT_LT((j.sxx - (jp.s - 2.0 * j.s + jm.s) / (h * h)).norm(), 1e-5);
    // Orbit fields stay on <S^2> = 2 lambda^2.
    EXPECT_LT(std::abs(tr(j.s, j.s) + 2.0), 1e-13);
  }
}

TEST(Field, SpectralRoundTripIsExactForTrigPolynomials) {
  const int g = 32, mm = 5;
  std::vector<cplx> v(g), vx(g);
  for (int j = 0; j < g; ++j) {
    const double x = grid_point(j, g);
    v[j] = std::exp(I * 3.0 * x) + cplx(0.5, 0.2) * std::cos(2 * x) - 0.1;
    vx[j] = 3.0 * I * std::exp(I * 3.0 * x) - cplx(0.5, 0.2) * 2.0 * std::sin(2 * x);
  }
  Spectral sp;
  const Modes c = sp.analyze(v, mm);
  EXPECT_LT(std::abs(c[mm + 3] - 1.0), 1e-14);
  EXPECT_LT(std::abs(c[mm] + 0.1), 1e-14);
  const Samples3 s = sp.synthesize(c, g);
  for (int j = 0; j < g; ++j) {
    EXPECT_LT(std::abs(s.f[j] - v[j]), 1e-13);
    EXPECT_LT(std::abs(s.fx[j] - vx[j]), 1e-12);
  }
}

TEST(Field, OneSiteRationalSecondFlowIsAHeisenbergCommutator) {
  // With one rational site the right-hand side must be c [S, S_xx], with c
  // independent of the field.
  GaudinModel m(ModelKind::rational, 2, {0.0}, {cplx(0, 1)}, 0.7);
  cplx c0 = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const LoopField f = sample_orbit_field(cplx(0, 1), PhaseSpec{}, seed);
    for (double x : {0.4, 2.2}) {
      const std::vector<Jet> j{f.jet(x)};
      const Mat d = field_rhs_point(m, j, FlowId::second(0))[0];
      const Mat c = comm(j[0].s, j[0].sxx);
      const cplx k = (c.adjoint() * d).trace() / (c.adjoint() * c).trace();
      EXPECT_LT((d - k * c).norm(), 1e-12 * std::max(1.0, d.norm()));
      if (c0 == cplx(0)) c0 = k;
      EXPECT_LT(std::abs(k - c0), 1e-12);
    }
  }
}

TEST(Field, PcmStateSatisfiesAllReductions) {
  GaudinModel m(ModelKind::rational, 2, {0.0, 1.0}, {cplx(0, 1), cplx(0, 1)}, 0.7);
  const PcmReport r = pcm_scenario(m, random_orbit_state(m, 5, 64));
  EXPECT_LT(r.conservation, 1e-10);
  EXPECT_LT(r.traditional, 1e-10);
  EXPECT_LT(r.light_cone, 1e-10);
  EXPECT_LT(r.stationary, 1e-10);
}

TEST(Field, Errors) {
  GaudinModel m(ModelKind::rational, 2, {0.0, 1.0}, {1.0, 1.0});
  LoopState st{{sample_orbit_field(1.0, PhaseSpec{}, 1)}, 64};
  EXPECT_EQ(error_kind_of([&] { check_loop(m, st); }), ErrorKind::size_mismatch);
  st.fields.push_back(st.fields[0]);
  st.G = 100;
  EXPECT_EQ(error_kind_of([&] { check_loop(m, st); }), ErrorKind::config);
  PhaseSpec bad;
  bad.winding = 0.5;
  EXPECT_EQ(error_kind_of([&] { sample_orbit_field(1.0, bad, 1); }), ErrorKind::config);
}
