#pragma once
// Fixed-step classical RK4 for the 0+1 flows and the pseudo-spectral 1+1 flows,
// with conservation monitors.

#include "gaudin/charges.hpp"

#include <map>

namespace gaudin {

struct EvolutionSpec {
  double dt = 1e-3;
  double T = 1.0;
  int output_every = 1;
  bool casimirs = true;
  bool hamiltonians = true;
  bool zero_curvature_spotcheck = false;
  bool reproject = false;  // rescale every S^a onto its initial Casimir level after each step
  int modes = 64;          // 1+1: Fourier modes kept per entry

  void validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw Error(ErrorKind::config, "dt must be positive");
    if (!(T >= dt)) throw Error(ErrorKind::config, "T must be at least dt");
    if (output_every < 1) throw Error(ErrorKind::config, "output_every must be >= 1");
    if (modes < 1) throw Error(ErrorKind::config, "modes must be >= 1");
  }
  int steps() const { return int(std::llround(T / dt)); }
};

/// dt <= c dx^2 lambda^2 / k^2 for second flows (min over sites).
inline double cfl_dt(const GaudinModel& m, int g, double c = 0.2) {
  const double dx = 2.0 * pi / g;
  double lam2 = 1e300;
  for (int a = 0; a < m.n(); ++a) lam2 = std::min(lam2, std::norm(m.lambda(a)));
  const double k2 = std::max(std::norm(m.k()), 1e-300);
  return c * dx * dx * lam2 / k2;
}

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> snapshots;
  std::vector<std::string> names;
  std::vector<std::vector<cplx>> series;  // [monitor][sample]
  // Per monitor: a quantum p != 0 means Q is defined modulo p Z.
  std::vector<cplx> periods;
  bool blew_up = false;
  double last_good_time = 0;
  std::string message;

  /// max |Q(t) - Q(0)| per monitor, reduced modulo the monitor's quantum.
  std::map<std::string, double> drift() const {
    std::map<std::string, double> d;
    for (std::size_t q = 0; q < names.size(); ++q) {
      const cplx p = q < periods.size() ? periods[q] : cplx(0);
      double w = 0;
      for (const cplx& v : series[q]) {
        cplx e = v - series[q].front();
        if (p != cplx(0) && std::isfinite(std::abs(e))) e -= std::round((e / p).real()) * p;
        w = std::max(w, std::abs(e));
      }
      d[names[q]] = w;
    }
    return d;
  }
  double max_drift() const {
    double w = 0;
    for (const auto& [k, v] : drift()) w = std::max(w, v);
    return w;
  }
};

// ---- 0+1 ------------------------------------------------------------------

inline bool finite(const SpinState& s) {
  for (const Mat& x : s)
    if (!finite(x)) return false;
  return true;
}

inline SpinState axpy(const SpinState& x, cplx a, const SpinState& y) {
  SpinState r = x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += a * y[i];
  return r;
}

template <class F>
SpinState step(const GaudinModel& m, const SpinState& s, const F& flow, double dt) {
  const SpinState k1 = eom_rhs(m, s, flow);
  const SpinState k2 = eom_rhs(m, axpy(s, 0.5 * dt, k1), flow);
  const SpinState k3 = eom_rhs(m, axpy(s, 0.5 * dt, k2), flow);
  const SpinState k4 = eom_rhs(m, axpy(s, dt, k3), flow);
  SpinState r = s;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return r;
}

inline void reproject(SpinState& s, const std::vector<cplx>& level) {
  for (std::size_t a = 0; a < s.size(); ++a) {
    const cplx c = tr(s[a], s[a]);
    if (std::abs(c) > 0) s[a] *= std::sqrt(level[a] / c);
  }
}

template <class F>
Trajectory<SpinState> evolve(const GaudinModel& m, const SpinState& s0, const F& flow, const EvolutionSpec& spec) {
  spec.validate();
  check_state(m, s0);
  Trajectory<SpinState> tr_out;
  std::vector<cplx> level;
  for (const Mat& x : s0) level.push_back(tr(x, x));
  if (spec.casimirs)
    for (int a = 0; a < m.n(); ++a) tr_out.names.push_back("casimir_" + std::to_string(a + 1));
  if (spec.hamiltonians) {
    for (int a = 0; a < m.n(); ++a) tr_out.names.push_back("H1_" + std::to_string(a + 1));
    if (m.elliptic()) tr_out.names.push_back("H0");
  }
  if (spec.zero_curvature_spotcheck) tr_out.names.push_back("zc_residual");
  tr_out.series.resize(tr_out.names.size());
  const cplx zprobe = m.point(0) + cplx(0.137, 0.071);
  auto record = [&](double t, const SpinState& s) {
    tr_out.times.push_back(t);
    tr_out.snapshots.push_back(s);
    std::size_t q = 0;
    if (spec.casimirs)
      for (int a = 0; a < m.n(); ++a) tr_out.series[q++].push_back(casimir(m, s, a));
    if (spec.hamiltonians) {
      for (int a = 0; a < m.n(); ++a) tr_out.series[q++].push_back(hamiltonian_first(m, s, a));
      if (m.elliptic()) tr_out.series[q++].push_back(hamiltonian_h0(m, s));
    }
    if (spec.zero_curvature_spotcheck) tr_out.series[q++].push_back(lax_residual(m, s, flow, zprobe));
  };
  SpinState s = s0;
  record(0.0, s);
  const int n = spec.steps();
  for (int i = 1; i <= n; ++i) {
    SpinState next = step(m, s, flow, spec.dt);
    if (spec.reproject) reproject(next, level);
    if (!finite(next)) {
      tr_out.blew_up = true;
      tr_out.last_good_time = (i - 1) * spec.dt;
      tr_out.message = "non-finite state after step " + std::to_string(i);
      return tr_out;
    }
    s = std::move(next);
    if (i % spec.output_every == 0 || i == n) record(i * spec.dt, s);
  }
  tr_out.last_good_time = n * spec.dt;
  return tr_out;
}

// ---- 1+1 ------------------------------------------------------------------

/// Mode coefficients [site][row-major entry].
using ModeState = std::vector<std::vector<Modes>>;

inline ModeState to_modes(const LoopState& st, int modes_m) {
  ModeState out;
  for (const auto& f : st.fields) out.push_back(f.to_fourier(modes_m, std::max(st.G, 2 * modes_m + 2)).fourier_spec().entries);
  return out;
}

inline LoopState from_modes(const ModeState& ms, int N, int g) {
  LoopState st{{}, g};
  for (const auto& e : ms) {
    const int mm = (int(e[0].size()) - 1) / 2;
    st.fields.push_back(LoopField::fourier({N, mm, e}));
  }
  return st;
}

inline bool finite(const ModeState& s) {
  for (const auto& site : s)
    for (const auto& e : site)
      for (const cplx& v : e)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

inline ModeState axpy(const ModeState& x, cplx a, const ModeState& y) {
  ModeState r = x;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t e = 0; e < r[i].size(); ++e)
      for (std::size_t j = 0; j < r[i][e].size(); ++j) r[i][e][j] += a * y[i][e][j];
  return r;
}

/// Pseudo-spectral right-hand side: synthesize on the padded grid, evaluate
/// pointwise, transform back and truncate to |m| <= M.
template <class F>
ModeState loop_rhs(const GaudinModel& m, const ModeState& s, const F& flow) {
  const int N = m.N(), mm = (int(s[0][0].size()) - 1) / 2, p = dealiased_size(mm);
  const LoopState st = from_modes(s, N, p);
  const auto rhs = field_eom_rhs(m, st, flow);
  Spectral sp;
  ModeState out(m.n(), std::vector<Modes>(std::size_t(N * N)));
  std::vector<cplx> v(p);
  for (int a = 0; a < m.n(); ++a)
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) {
        for (int i = 0; i < p; ++i) v[i] = rhs[i][a](r, c);
        out[a][r * N + c] = sp.analyze(v, mm);
      }
  return out;
}

template <class F>
ModeState step(const GaudinModel& m, const ModeState& s, const F& flow, double dt) {
  const ModeState k1 = loop_rhs(m, s, flow);
  const ModeState k2 = loop_rhs(m, axpy(s, 0.5 * dt, k1), flow);
  const ModeState k3 = loop_rhs(m, axpy(s, 0.5 * dt, k2), flow);
  const ModeState k4 = loop_rhs(m, axpy(s, dt, k3), flow);
  ModeState r = s;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t e = 0; e < r[i].size(); ++e)
      for (std::size_t j = 0; j < r[i][e].size(); ++j)
        r[i][e][j] += (dt / 6.0) * (k1[i][e][j] + 2.0 * k2[i][e][j] + 2.0 * k3[i][e][j] + k4[i][e][j]);
  return r;
}

/// One step on a loop state; orbit fields are sampled once into M modes.
template <class F>
LoopState step(const GaudinModel& m, const LoopState& st, const F& flow, double dt, int modes_m = 64) {
  check_loop(m, st);
  const ModeState s = to_modes(st, modes_m);
  return from_modes(step(m, s, flow, dt), m.N(), st.G);
}

inline void reproject(const GaudinModel& m, ModeState& s, int g, const std::vector<std::vector<cplx>>& level) {
  const int N = m.N();
  const int mm = (int(s[0][0].size()) - 1) / 2;
  const auto jets = from_modes(s, N, g).grid_jets();
  Spectral sp;
  for (int a = 0; a < m.n(); ++a) {
    std::vector<Mat> vals(g);
    for (int i = 0; i < g; ++i) {
      vals[i] = jets[i][a].s;
      const cplx c = tr(vals[i], vals[i]);
      if (std::abs(c) > 0) vals[i] *= std::sqrt(level[a][i] / c);
    }
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) {
        std::vector<cplx> v(g);
        for (int i = 0; i < g; ++i) v[i] = vals[i](r, c);
        s[a][r * N + c] = sp.analyze(v, mm);
      }
  }
}

/// Monitors: per-site oint <(S^a)^2>, max pointwise Casimir deviation, oint of
/// the entries of l_0 = sum_a S^a, and for N = 2 the integrated densities.
template <class F>
Trajectory<LoopState> evolve(const GaudinModel& m, const LoopState& init, const F& flow, const EvolutionSpec& spec) {
  spec.validate();
  check_loop(m, init);
  const int N = m.N(), g = init.G;
  if (g < 2 * spec.modes + 2) throw Error(ErrorKind::config, "grid too coarse for the mode count");
  Trajectory<LoopState> out;
  ModeState s = to_modes(init, spec.modes);
  std::vector<std::vector<cplx>> level(m.n(), std::vector<cplx>(g));
  {
    const auto j0 = from_modes(s, N, g).grid_jets();
    for (int i = 0; i < g; ++i)
      for (int a = 0; a < m.n(); ++a) level[a][i] = tr(j0[i][a].s, j0[i][a].s);
  }
  const bool densities = spec.hamiltonians && N == 2;
  for (int a = 0; a < m.n(); ++a) {
    if (spec.casimirs) {
      out.names.push_back("casimir_int_" + std::to_string(a + 1));
      out.names.push_back("casimir_pointwise_dev_" + std::to_string(a + 1));
    }
    if (densities) {
      out.names.push_back("H1_" + std::to_string(a + 1));
      out.names.push_back("H2_" + std::to_string(a + 1));
      out.names.push_back("gauge_min_abs_L12_" + std::to_string(a + 1));
    }
  }
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) out.names.push_back("l0_int_" + std::to_string(r + 1) + std::to_string(c + 1));
  if (spec.zero_curvature_spotcheck) out.names.push_back("zc_residual");
  out.series.resize(out.names.size());
  // oint P_a, and with it oint h_{a,1}, is defined modulo pi i k lambda_a: the
  // scalar gauge divides by L_12, and each time L_12 passes through zero its
  // winding number (hence oint d_x log L_12) jumps by 2 pi i.
  out.periods.assign(out.names.size(), cplx(0));
  for (std::size_t q = 0; q < out.names.size(); ++q)
    if (out.names[q].rfind("H1_", 0) == 0) {
      const int a = std::stoi(out.names[q].substr(3)) - 1;
      out.periods[q] = pi * I * m.k() * m.lambda(a);
    }
  // The densities carry 1/L_12 factors that spike where L_12 is small. The
  // field is band-limited, so it is resampled on doubled grids until the
  // integrals settle (or the grid is 64 times finer).
  auto settled_densities = [&](const LoopState& st, int a) {
    LoopState fine = st;
    fine.G = 2 * g;
    DensityReport d = riccati_densities(m, fine, a);
    while (fine.G < 64 * g) {
      fine.G *= 2;
      DensityReport e = riccati_densities(m, fine, a);
      const double tol = 1e-10 * std::max({1.0, std::abs(e.H1), std::abs(e.H2)});
      const bool done = std::abs(e.H1 - d.H1) <= tol && std::abs(e.H2 - d.H2) <= tol;
      d = std::move(e);
      if (done) break;
    }
    return d;
  };
  const cplx zprobe = m.point(0) + cplx(0.137, 0.071);

  auto record = [&](double t, const ModeState& ms) {
    const LoopState st = from_modes(ms, N, g);
    const auto jets = st.grid_jets();
    out.times.push_back(t);
    out.snapshots.push_back(st);
    std::size_t q = 0;
    for (int a = 0; a < m.n(); ++a) {
      if (spec.casimirs) {
        std::vector<cplx> c(g);
        double dev = 0;
        for (int i = 0; i < g; ++i) {
          c[i] = tr(jets[i][a].s, jets[i][a].s);
          dev = std::max(dev, std::abs(c[i] - level[a][i]));
        }
        out.series[q++].push_back(periodic_integral(c));
        out.series[q++].push_back(dev);
      }
      if (densities) {
        cplx h1 = 0, h2 = 0;
        try {
          const DensityReport d = settled_densities(st, a);
          h1 = d.H1;
          h2 = d.H2;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::gauge_singularity) throw;
          h1 = h2 = cplx(std::nan(""), 0);
        }
        double low = INFINITY;
        for (const auto& j : jets) low = std::min(low, std::abs(j[a].s(0, 1)));
        out.series[q++].push_back(h1);
        out.series[q++].push_back(h2);
        out.series[q++].push_back(low);
      }
    }
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) {
        // The zero mode times 2 pi is the exact integral of the truncated field.
        cplx v = 0;
        for (int a = 0; a < m.n(); ++a) v += ms[a][r * N + c][std::size_t(spec.modes)];
        out.series[q++].push_back(2.0 * pi * v);
      }
    if (spec.zero_curvature_spotcheck)
      out.series[q++].push_back(zero_curvature_residual_at(m, jets[0], flow, zprobe));
  };

  record(0.0, s);
  const int n = spec.steps();
  for (int i = 1; i <= n; ++i) {
    ModeState next = step(m, s, flow, spec.dt);
    if (spec.reproject) reproject(m, next, g, level);
    if (!finite(next)) {
      out.blew_up = true;
      out.last_good_time = (i - 1) * spec.dt;
      out.message = "non-finite field after step " + std::to_string(i);
      return out;
    }
    s = std::move(next);
    if (i % spec.output_every == 0 || i == n) record(i * spec.dt, s);
  }
  out.last_good_time = n * spec.dt;
  return out;
}

/// Throws BlowUp if the trajectory ended early.
template <class State>
const Trajectory<State>& require_complete(const Trajectory<State>& t) {
  if (t.blew_up) throw BlowUp(t.last_good_time, t.message);
  return t;
}

}  // namespace gaudin
