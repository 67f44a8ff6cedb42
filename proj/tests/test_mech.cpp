#include "support.hpp"

#include <Eigen/Eigenvalues>

using namespace gaudin;
using gaudin::testing::error_kind_of;
using gaudin::testing::expect_all;

TEST(Mech, SuiteHolds) { expect_all(mech_suite(20, 3)); }

TEST(Mech, RationalTwoSiteClosedForms) {
  // H_{1,1} = -<S1 S2> / (N z12); dS1/dt = [S2, S1] / z12.
  GaudinModel m(ModelKind::rational, 2, {0.0, cplx(1.0, 0.3)}, {0.8, 1.1});
  std::mt19937_64 rng(4);
  const SpinState s = random_onshell_state(m, rng);
  const cplx z12 = m.point(0) - m.point(1);
  EXPECT_LT(std::abs(hamiltonian_first(m, s, 0) + tr(s[0], s[1]) / (2.0 * z12)), 1e-14);
  const SpinState d = eom_rhs(m, s, FlowId::first(0));
  EXPECT_LT((d[0] - comm(s[1], s[0]) / z12).norm(), 1e-13);
  EXPECT_LT((d[0] + d[1]).norm(), 1e-13);
}

TEST(Mech, OnshellStatesHaveTheRightSpectrum) {
  GaudinModel m(ModelKind::rational, 3, {0.0, 1.0}, {0.7, cplx(0.2, 1.0)});
  std::mt19937_64 rng(8);
  const SpinState s = random_onshell_state(m, rng);
  for (int a = 0; a < 2; ++a) {
    Eigen::ComplexEigenSolver<Mat> es(s[a]);
    std::vector<double> re;
    for (int j = 0; j < 3; ++j) re.push_back(std::abs(es.eigenvalues()(j)));
    std::sort(re.begin(), re.end());
    EXPECT_NEAR(re[0], 0.0, 1e-12);
    EXPECT_NEAR(re[2], std::abs(m.lambda(a)), 1e-12);
  }
}

TEST(Mech, SpectralInvariantsAlongTheFlow) {
  // tr L(z)^2 does not change along any flow; checked on a short RK4 run.
  auto [m, s0] = evolution_top(7);
  EvolutionSpec spec;
  spec.dt = 2e-4;  // the second flow runs at rates ~10; keeps RK4 error near 1e-12
  spec.T = 0.2;
  for (const Flow& f : {Flow(FlowId::first(2)), Flow(FlowId::second(1)), Flow(FlowId::h0())}) {
    const auto traj = require_complete(evolve(m, s0, f, spec));
    const SpinState& s1 = traj.snapshots.back();
    for (cplx z : {cplx(0.7, 0.2), cplx(0.25, 0.55)}) {
      const Mat l0 = lax(m, s0, z), l1 = lax(m, s1, z);
      EXPECT_LT(std::abs(tr(l0, l0) - tr(l1, l1)), 1e-9 * std::max(1.0, std::abs(tr(l0, l0))));
    }
  }
}

TEST(Mech, Errors) {
  EXPECT_EQ(error_kind_of([] { GaudinModel(ModelKind::rational, 2, {0.0, 0.0}, {1.0, 1.0}); }), ErrorKind::config);
  EXPECT_EQ(error_kind_of([] { GaudinModel(ModelKind::elliptic, 2, {0.1}, {1.0}); }), ErrorKind::config);
  EXPECT_EQ(error_kind_of([] { GaudinModel(ModelKind::rational, 3, {0.0}, {1.0}, 1.0, std::nullopt, true); }),
            ErrorKind::unsupported);
  GaudinModel m(ModelKind::rational, 2, {0.0}, {1.0});
  const SpinState s{pauli(3)};
  EXPECT_EQ(error_kind_of([&] { lax(m, s, 0.0); }), ErrorKind::pole);
  EXPECT_EQ(error_kind_of([&] { hamiltonian(m, s, FlowId::h0()); }), ErrorKind::unsupported);
  EXPECT_EQ(error_kind_of([&] { hamiltonian(m, s, FlowId::first(3)); }), ErrorKind::config);
  EXPECT_EQ(error_kind_of([&] { lax(m, SpinState{pauli(3), pauli(1)}, 1.0); }), ErrorKind::size_mismatch);
}
