#pragma once
// Conserved densities of the 1+1 sl(2) models: local expansion of L(z) at a
// marked point, the scalar (Schrodinger) form of the auxiliary linear problem,
// Riccati densities, momentum and the variational form of the flows.

#include "gaudin/field.hpp"

namespace gaudin {

/// Laurent coefficients L(z) = L^{-1}/(z - z_a) + L^0 + L^1 (z - z_a) + ... with
/// the x-derivatives needed by T.
struct LocalCoeffs {
  Mat lm1, lm1x, lm1xx, l0, l0x, l1;
};

inline void require_sl2(const GaudinModel& m, const char* what) {
  if (m.N() != 2) throw Error(ErrorKind::unsupported, std::string(what) + " is available for N = 2 only");
}

inline LocalCoeffs local_lax_coeffs(const GaudinModel& m, const std::vector<Jet>& j, int a) {
  LocalCoeffs c{j[a].s, j[a].sx, j[a].sxx, zero_mat(m.N()), zero_mat(m.N()), -0.5 * m.wp_hat()(j[a].s)};
  for (int b = 0; b < m.n(); ++b) {
    if (b == a) continue;
    c.l0 += m.phi_hat(a, b)(j[b].s);
    c.l0x += m.phi_hat(a, b)(j[b].sx);
    c.l1 -= m.F_hat(a, b)(j[b].s);
  }
  return c;
}

/// Laurent coefficient of (z - z_a)^{power} by trapezoid quadrature on a small circle.
inline Mat laurent_contour(const GaudinModel& m, const SpinState& s, int a, int power, double radius = 1e-2,
                           int nodes = 64) {
  return residue_contour(m, s, a, power + 1, radius, nodes);
}

/// T(z) = T_{-2}/(z - z_a)^2 + T_{-1}/(z - z_a) + T_0 + ...
struct TCoeffs {
  cplx tm2, tm1, t0;
};

inline constexpr double gauge_floor = 1e-8;

inline TCoeffs schrodinger_T(const LocalCoeffs& c, cplx k) {
  const cplx a12 = c.lm1(0, 1);
  if (std::abs(a12) <= gauge_floor)
    throw Error(ErrorKind::gauge_singularity, "L_12 vanishes; the scalar gauge is singular here");
  const cplx a11 = c.lm1(0, 0), a21 = c.lm1(1, 0);
  const cplx a11x = c.lm1x(0, 0), a12x = c.lm1x(0, 1), a12xx = c.lm1xx(0, 1);
  const cplx b11 = c.l0(0, 0), b12 = c.l0(0, 1), b21 = c.l0(1, 0);
  const cplx b11x = c.l0x(0, 0), b12x = c.l0x(0, 1);
  const cplx c11 = c.l1(0, 0), c12 = c.l1(0, 1), c21 = c.l1(1, 0);
  const cplx r = a12x / a12;
  TCoeffs t;
  t.tm2 = a12 * a21 + a11 * a11;
  t.tm1 = a12 * b21 + b12 * a21 + 2.0 * b11 * a11 + k * a11 * r - k * a11x;
  t.t0 = c12 * a21 + a12 * c21 + 2.0 * c11 * a11 + b12 * b21 + b11 * b11 +
         (k / a12) * (b11 * a12x + a11 * b12x - b12 * a11 * r) - k * b11x - 0.5 * k * k * a12xx / a12 +
         0.75 * k * k * r * r;
  return t;
}

/// Full T(z) at a spectral point, for the contour oracle.
inline cplx schrodinger_T_full(const GaudinModel& m, const std::vector<Jet>& j, cplx z) {
  SpinState s, sx, sxx;
  for (const Jet& x : j) {
    s.push_back(x.s);
    sx.push_back(x.sx);
    sxx.push_back(x.sxx);
  }
  const Mat l = lax(m, s, z), lx = lax(m, sx, z), lxx = lax(m, sxx, z);
  const cplx k = m.k(), r = lx(0, 1) / l(0, 1);
  return l(0, 1) * l(1, 0) + l(0, 0) * l(0, 0) + k * l(0, 0) * r - k * lx(0, 0) - 0.5 * k * k * lxx(0, 1) / l(0, 1) +
         0.75 * k * k * r * r;
}

/// P_a = -(k/2) L_11 d_x L_12 / L_12 with L = L^{a,-1}.
inline cplx momentum_density(const LocalCoeffs& c, cplx k) {
  if (std::abs(c.lm1(0, 1)) <= gauge_floor) throw Error(ErrorKind::gauge_singularity, "L_12 vanishes");
  return -0.5 * k * c.lm1(0, 0) * c.lm1x(0, 1) / c.lm1(0, 1);
}

/// Densities at one point. branch = +1 picks chi_{-1} = lambda_a.
struct DensityPoint {
  TCoeffs t;
  cplx chi0, chi1, h1, h2, p;
};

inline DensityPoint densities_at(const GaudinModel& m, const std::vector<Jet>& j, int a, int branch = 1) {
  require_sl2(m, "the scalar gauge");
  const LocalCoeffs c = local_lax_coeffs(m, j, a);
  const cplx lam = m.lambda(a), chi = double(branch) * lam;
  DensityPoint d;
  d.t = schrodinger_T(c, m.k());
  d.chi0 = d.t.tm1 / (2.0 * chi);
  d.chi1 = (d.t.t0 - d.chi0 * d.chi0) / (2.0 * chi);
  d.h1 = -lam * d.chi0;
  d.h2 = -lam * d.chi1;
  d.p = momentum_density(c, m.k());
  return d;
}

/// Closed forms of the first two densities. They agree with h1, h2 only
/// after integration over the circle.
inline cplx h1_closed(const GaudinModel& m, const std::vector<Jet>& j, int a) {
  const LocalCoeffs c = local_lax_coeffs(m, j, a);
  return momentum_density(c, m.k()) - 0.5 * tr(c.lm1, c.l0);
}

inline cplx h2_closed(const GaudinModel& m, const std::vector<Jet>& j, int a) {
  const LocalCoeffs c = local_lax_coeffs(m, j, a);
  const cplx k = m.k(), l2 = m.lambda(a) * m.lambda(a);
  const Mat& s = c.lm1;
  const cplx q = tr(s, c.l0);
  return -0.25 * tr(c.l0, c.l0) - 0.5 * tr(c.l1, s) + q * q / (8.0 * l2) - (k / (4.0 * l2)) * (c.l0 * c.lm1x * s).trace() +
         (k * k / (16.0 * l2)) * tr(c.lm1x, c.lm1x);
}

/// Both sides of 8 lambda^3 chi_1 = 4 lambda^2 T_0 - T_{-1}^2 in the trace form
/// (equal after integration).
inline std::pair<cplx, cplx> lemma_integrands(const GaudinModel& m, const std::vector<Jet>& j, int a) {
  const LocalCoeffs c = local_lax_coeffs(m, j, a);
  const TCoeffs t = schrodinger_T(c, m.k());
  const cplx k = m.k(), l2 = m.lambda(a) * m.lambda(a);
  const Mat& s = c.lm1;
  const cplx q = tr(s, c.l0);
  const cplx lhs = 4.0 * l2 * t.t0 - t.tm1 * t.tm1;
  const cplx rhs = 2.0 * tr(s, s) * (0.5 * tr(c.l0, c.l0) + tr(c.l1, s)) - q * q +
                   2.0 * k * (c.l0 * c.lm1x * s).trace() - 0.5 * k * k * tr(c.lm1x, c.lm1x);
  return {lhs, rhs};
}

struct DensityReport {
  std::vector<double> x;
  std::vector<cplx> h1, h2, p;
  cplx H1 = 0, H2 = 0, P = 0;
};

inline DensityReport riccati_densities(const GaudinModel& m, const LoopState& st, int a, int branch = 1) {
  check_loop(m, st);
  require_sl2(m, "riccati_densities");
  if (branch != 1 && branch != -1) throw Error(ErrorKind::domain, "branch must be +1 or -1");
  DensityReport r;
  const auto jets = st.grid_jets();
  for (std::size_t i = 0; i < jets.size(); ++i) {
    const DensityPoint d = densities_at(m, jets[i], a, branch);
    r.x.push_back(grid_point(int(i), st.G));
    r.h1.push_back(d.h1);
    r.h2.push_back(d.h2);
    r.p.push_back(d.p);
  }
  r.H1 = periodic_integral(r.h1);
  r.H2 = periodic_integral(r.h2);
  r.P = periodic_integral(r.p);
  return r;
}

/// Grid integral of a pointwise functional of the jets.
template <class Fn>
cplx grid_integral(const LoopState& st, Fn&& fn) {
  std::vector<cplx> v;
  for (const auto& j : st.grid_jets()) v.push_back(fn(j));
  return periodic_integral(v);
}

// ---- variational form -----------------------------------------------------

/// Trace gradient of P_a at one point: with S_22 = -S_11,
/// dP/dS_11 = -(k/2) S_12x / S_12, dP/dS_12 = (k/2) S_11x / S_12.
inline Mat momentum_gradient(const Jet& a, cplx k) {
  const cplx s12 = a.s(0, 1);
  if (std::abs(s12) <= gauge_floor) throw Error(ErrorKind::gauge_singularity, "L_12 vanishes");
  Mat g = zero_mat(2);
  g(0, 0) = -0.25 * k * a.sx(0, 1) / s12;
  g(1, 1) = -g(0, 0);
  g(1, 0) = 0.5 * k * a.sx(0, 0) / s12;
  return g;
}

/// Trace gradients of the integrated density of the given order (1 or 2) at one point.
inline SpinState variational_gradient(const GaudinModel& m, const std::vector<Jet>& j, int a, int order) {
  require_sl2(m, "variational_eom");
  if (order != 1 && order != 2) throw Error(ErrorKind::unsupported, "order must be 1 or 2");
  const cplx k = m.k(), l2 = m.lambda(a) * m.lambda(a);
  const LocalCoeffs c = local_lax_coeffs(m, j, a);
  const Mat& A = c.lm1;
  SpinState g(m.n(), zero_mat(2));
  if (order == 1) {
    g[a] = momentum_gradient(j[a], k) - 0.5 * c.l0;
    for (int b = 0; b < m.n(); ++b)
      if (b != a) g[b] = 0.5 * m.phi_hat(b, a)(A);
    return g;
  }
  const cplx q = tr(A, c.l0);
  g[a] = 0.5 * m.wp_hat()(A) + (q / (4.0 * l2)) * c.l0 -
         (k / (4.0 * l2)) * (c.l0 * c.lm1x - c.lm1x * c.l0 - A * c.l0x) - (k * k / (8.0 * l2)) * c.lm1xx;
  for (int b = 0; b < m.n(); ++b) {
    if (b == a) continue;
    g[a] += 0.5 * m.F_hat(a, b)(j[b].s);
    g[b] = 0.5 * m.F_hat(b, a)(A) + 0.5 * m.phi_hat(b, a)(c.l0) - (q / (4.0 * l2)) * m.phi_hat(b, a)(A) +
           (k / (4.0 * l2)) * m.phi_hat(b, a)(Mat(c.lm1x * A));
  }
  return g;
}

/// d_t S^b = 2 [S^b, G_b] (the N [S, grad H] form at N = 2).
inline SpinState variational_rhs(const GaudinModel& m, const std::vector<Jet>& j, int a, int order) {
  const SpinState g = variational_gradient(m, j, a, order);
  SpinState out;
  for (int b = 0; b < m.n(); ++b) out.push_back(2.0 * comm(j[b].s, g[b]));
  return out;
}

struct VariationalReport {
  std::vector<SpinState> rhs;  // [grid point][site]
  double residual = 0;         // max distance to the zero-curvature right-hand side
};

inline VariationalReport variational_eom(const GaudinModel& m, const LoopState& st, int a, int order) {
  check_loop(m, st);
  const FlowId f = order == 1 ? FlowId::first(a) : FlowId::second(a);
  VariationalReport r;
  for (const auto& j : st.grid_jets()) {
    SpinState v = variational_rhs(m, j, a, order);
    const SpinState ref = field_rhs_point(m, j, f);
    for (int b = 0; b < m.n(); ++b) r.residual = std::max(r.residual, (v[b] - ref[b]).norm());
    r.rhs.push_back(std::move(v));
  }
  return r;
}

/// Max over grid points y and components beta of
/// |{oint P_a, S^b_beta(y)} - k delta_ab d_y S^b_beta(y)|, with the bracket
/// taken through the coefficient structure constants.
inline double momentum_bracket_check(const GaudinModel& m, const LoopState& st, int a) {
  check_loop(m, st);
  require_sl2(m, "momentum_bracket_check");
  const int N = 2;
  const auto& labels = Algebra::get(N).labels();
  double worst = 0;
  for (const auto& j : st.grid_jets()) {
    SpinState g(m.n(), zero_mat(N));
    g[a] = momentum_gradient(j[a], m.k());
    const auto grad_p = coefficient_gradient(g);
    for (int b = 0; b < m.n(); ++b) {
      const SpinCoeffs sx = decompose(j[b].sx);
      for (const Index& be : labels) {
        // {P, S_be} = sum_al dP/dS_al c(al, be) S_{al+be}; S_be is the coefficient, d/dS_be = T_be^{-1}/N.
        std::vector<SpinCoeffs> unit(m.n(), SpinCoeffs(N));
        unit[b][be] = 1.0;
        const cplx br = poisson_bracket(m, grad_p, unit, values(j));
        const cplx expect = b == a ? m.k() * sx[be] : cplx(0);
        worst = std::max(worst, std::abs(br - expect));
      }
    }
  }
  return worst;
}

/// Discrete functional oint h dx on the state grid with spectral x-derivatives;
/// samples[b][i] is S^b at grid point i.
inline cplx discrete_functional(const GaudinModel& m, const std::vector<std::vector<Mat>>& samples, int a,
                                int order) {
  const int g = int(samples[0].size()), n = m.n(), N = m.N();
  Spectral sp;
  std::vector<std::vector<Jet>> jets(g, std::vector<Jet>(n));
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i < g; ++i) jets[i][b] = {samples[b][i], zero_mat(N), zero_mat(N)};
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) {
        std::vector<cplx> v(g);
        for (int i = 0; i < g; ++i) v[i] = samples[b][i](r, c);
        const auto d1 = sp.derivative(v, 1);
        const auto d2 = sp.derivative(v, 2);
        for (int i = 0; i < g; ++i) {
          jets[i][b].sx(r, c) = d1[i];
          jets[i][b].sxx(r, c) = d2[i];
        }
      }
  }
  std::vector<cplx> h(g);
  for (int i = 0; i < g; ++i) h[i] = order == 1 ? h1_closed(m, jets[i], a) : h2_closed(m, jets[i], a);
  return periodic_integral(h);
}

/// Closed-form gradient against central differences of the discrete functional
/// at a few (site, point, direction) probes. Returns the worst relative error
/// over probes, each probe taking the best step of the sweep.
inline double functional_derivative_check(const GaudinModel& m, const LoopState& st, int a, int order,
                                          const std::vector<double>& steps = {1e-3, 1e-4, 1e-5},
                                          int probes = 6) {
  check_loop(m, st);
  require_sl2(m, "functional_derivative_check");
  const auto jets = st.grid_jets();
  const int g = st.G, n = m.n();
  std::vector<std::vector<Mat>> base(n, std::vector<Mat>(g));
  for (int i = 0; i < g; ++i)
    for (int b = 0; b < n; ++b) base[b][i] = jets[i][b].s;
  const auto& labels = Algebra::get(2).labels();
  double worst = 0;
  for (int p = 0; p < probes; ++p) {
    const int b = p % n, i = (p * 37 + 5) % g;
    const Mat dir = Algebra::get(2).t(labels[std::size_t(p) % labels.size()]);
    const cplx exact = tr(variational_gradient(m, jets[i], a, order)[b], dir) * (2.0 * pi / g);
    double best = 1e300;
    for (double h : steps) {
      auto plus = base, minus = base;
      plus[b][i] += h * dir;
      minus[b][i] -= h * dir;
      const cplx fd = (discrete_functional(m, plus, a, order) - discrete_functional(m, minus, a, order)) / (2.0 * h);
      best = std::min(best, std::abs(fd - exact) / std::max(std::abs(exact), 1e-300));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace gaudin
