#include "support.hpp"

#include <Eigen/Eigenvalues>

using namespace gaudin;
using gaudin::testing::error_kind_of;
using gaudin::testing::expect_all;

TEST(Evolve, SuiteHolds) { expect_all(evolution_suite(2, {"heisenberg", "pcm"})); }

TEST(Evolve, RationalTwoSiteExactSolution) {
  // C = S1 + S2 is conserved and S1(t) = exp(t C / z12) S1(0) exp(-t C / z12).
  GaudinModel m(ModelKind::rational, 2, {0.0, cplx(1.0, 0.5)}, {0.8, 1.1});
  std::mt19937_64 rng(6);
  const SpinState s0 = random_onshell_state(m, rng);
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.T = 1.0;
  const auto traj = require_complete(evolve(m, s0, Flow(FlowId::first(0)), spec));
  const cplx z12 = m.point(0) - m.point(1);
  const Mat c = s0[0] + s0[1];
  Eigen::ComplexEigenSolver<Mat> es(c);
  const Mat v = es.eigenvectors();
  const Mat e = (es.eigenvalues() * (spec.T / z12)).array().exp().matrix().asDiagonal();
  const Mat g = v * e * v.inverse();
  const Mat exact = g * s0[0] * g.inverse();
  EXPECT_LT((traj.snapshots.back()[0] - exact).norm(), 1e-10);
  EXPECT_LT((traj.snapshots.back()[0] + traj.snapshots.back()[1] - c).norm(), 1e-12);
}

TEST(Evolve, RungeKuttaIsFourthOrder) {
  auto [m, s] = evolution_top(4);
  const double f = order_factor(m, s, Flow(FlowId::h0()), 0.02, 1.0);
  EXPECT_GE(f, 12.0);
  EXPECT_LE(f, 20.0);
}

TEST(Evolve, OutputCadenceAndMonitors) {
  auto [m, s] = evolution_top(1);
  EvolutionSpec spec;
  spec.dt = 0.01;
  spec.T = 0.1;
  spec.output_every = 3;
  const auto t = evolve(m, s, Flow(FlowId::first(0)), spec);
  // Steps 0, 3, 6, 9 and the final one.
  ASSERT_EQ(t.times.size(), 5u);
  EXPECT_NEAR(t.times.back(), 0.1, 1e-15);
  EXPECT_EQ(t.names.front(), "casimir_1");
  EXPECT_LT(t.max_drift(), 1e-7);  // RK4 at dt = 0.01
}

TEST(Evolve, BlowUpIsReported) {
  // A huge step overflows: the trajectory ends early and require_complete throws.
  GaudinModel m(ModelKind::rational, 2, {0.0, 0.01}, {1e3, 1e3});
  std::mt19937_64 rng(1);
  const SpinState s = random_onshell_state(m, rng);
  EvolutionSpec spec;
  spec.dt = 10.0;
  spec.T = 1e4;
  const auto t = evolve(m, s, Flow(FlowId::first(0)), spec);
  EXPECT_TRUE(t.blew_up);
  EXPECT_EQ(error_kind_of([&] { require_complete(t); }), ErrorKind::blow_up);
}

TEST(Evolve, InvalidSpec) {
  EvolutionSpec spec;
  spec.dt = -1;
  EXPECT_EQ(error_kind_of([&] { spec.validate(); }), ErrorKind::config);
  spec.dt = 0.1;
  spec.T = 0.01;
  EXPECT_EQ(error_kind_of([&] { spec.validate(); }), ErrorKind::config);
}

TEST(Evolve, DriftIsReducedModuloTheQuantum) {
  Trajectory<SpinState> t;
  t.names = {"H1_1", "other"};
  const cplx p(0, 1.75);
  t.series = {{1.0, 1.0 + 2.0 * p + 1e-9, 1.0 - p}, {0.0, 2.0 * p, 0.0}};
  t.periods = {p, 0.0};
  const auto d = t.drift();
  EXPECT_NEAR(d.at("H1_1"), 1e-9, 1e-15);
  EXPECT_NEAR(d.at("other"), 3.5, 1e-15);
}

TEST(Evolve, ThreeSiteFirstFlowKeepsItsCharges) {
  // Square lattice, real separations: su(2) fields stay in su(2).
  const cplx i = I;
  GaudinModel m(ModelKind::elliptic, 2, {cplx(0.15, 0.3), cplx(0.5, 0.3), cplx(0.8, 0.3)}, {i, 0.8 * i, 1.2 * i}, 0.7,
                EllipticContext(cplx(0, 1)));
  EvolutionSpec spec;
  spec.dt = 1e-3;
  spec.T = 0.05;
  spec.output_every = 25;
  spec.modes = 32;
  const auto t = require_complete(evolve(m, random_orbit_state(m, 11, 128), Flow(FlowId::first(1)), spec));
  EXPECT_LT(conserved_drift(m, t), 1e-7);
}
