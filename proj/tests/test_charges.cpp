#include "support.hpp"

using namespace gaudin;
using gaudin::testing::error_kind_of;
using gaudin::testing::expect_all;

namespace {

LoopState constant_state(const GaudinModel& m, std::uint64_t seed) {
  PhaseSpec p;
  p.winding = 0;
  p.harmonics = 0;
  LoopState st{{}, 32};
  for (int a = 0; a < m.n(); ++a) st.fields.push_back(sample_orbit_field(m.lambda(a), p, seed + a));
  return st;
}

}  // namespace

TEST(Charges, SuiteHolds) { expect_all(charges_suite(4, 31)); }

TEST(Charges, ConstantFieldsReduceToTheTop) {
  // No x dependence: the first charge is 2 pi times the mechanical H_{1,a}.
  for (ModelKind kind : {ModelKind::rational, ModelKind::elliptic}) {
    const cplx tau(0.3, 1.0);
    GaudinModel m = kind == ModelKind::rational
                        ? GaudinModel(kind, 2, {0.0, 1.0}, {cplx(0, 1), cplx(0, 1.2)}, 0.7)
                        : GaudinModel(kind, 2, {0.15 + 0.2 * tau, 0.6 + 0.5 * tau}, {cplx(0, 1), cplx(0, 1.2)}, 0.7,
                                      EllipticContext(tau));
    const LoopState st = constant_state(m, 12);
    const SpinState s = values(st.jets_at(0));
    for (int a = 0; a < 2; ++a) {
      const DensityReport d = riccati_densities(m, st, a);
      EXPECT_LT(std::abs(d.H1 - 2.0 * pi * hamiltonian_first(m, s, a)), 1e-10) << to_string(kind);
      EXPECT_LT(std::abs(d.P), 1e-12);
    }
  }
}

TEST(Charges, TranslationInvariance) {
  // Shifting every phase by w x0 translates the field; integrals must not move.
  GaudinModel m(ModelKind::rational, 2, {0.0, 1.0}, {cplx(0, 1), cplx(0, 1)}, 0.7);
  LoopState st = random_orbit_state(m, 3, 128);
  LoopState sh = st;
  const double x0 = 0.7;
  for (auto& f : sh.fields) {
    OrbitSpec o = f.orbit_spec();
    o.phi0 += o.phi_winding * x0;
    for (std::size_t j = 0; j < o.theta_phase.size(); ++j) o.theta_phase[j] += double(j + 1) * x0;
    for (std::size_t j = 0; j < o.phi_phase.size(); ++j) o.phi_phase[j] += double(j + 1) * x0;
    f = LoopField::orbit(o);
  }
  EXPECT_LT((sh.jets_at(0.2)[0].s - st.jets_at(0.9)[0].s).norm(), 1e-13);
  for (int a = 0; a < 2; ++a) {
    const DensityReport d0 = riccati_densities(m, st, a), d1 = riccati_densities(m, sh, a);
    EXPECT_LT(std::abs(d0.H1 - d1.H1), 1e-10);
    EXPECT_LT(std::abs(d0.H2 - d1.H2), 1e-10);
    EXPECT_LT(std::abs(d0.P - d1.P), 1e-10);
  }
}

TEST(Charges, Errors) {
  GaudinModel m3(ModelKind::rational, 3, {0.0, 1.0}, {1.0, 1.0});
  LoopState st;
  EXPECT_ANY_THROW(riccati_densities(m3, st, 0));
  GaudinModel m(ModelKind::rational, 2, {0.0, 1.0}, {cplx(0, 1), cplx(0, 1)});
  const LoopState s2 = random_orbit_state(m, 1, 32);
  EXPECT_EQ(error_kind_of([&] { riccati_densities(m, s2, 0, 2); }), ErrorKind::domain);
}
