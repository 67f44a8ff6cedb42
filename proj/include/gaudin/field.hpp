#pragma once
// 1+1 loop fields S^a(x) on the circle of circumference 2 pi, the first and
// second flow equations, the eta matrix of the second flow, zero-curvature
// residuals and the two-site chiral reductions.
//
// Two backends: "orbit" fields S = lambda n(x).sigma with closed-form
// derivatives (N = 2, exactly on-shell), and "fourier" fields given by mode
// arrays per matrix entry.

#include "gaudin/mech.hpp"
#include "gaudin/spectral.hpp"

#include <random>
#include <variant>

namespace gaudin {

/// S, S_x, S_xx at one point.
struct Jet {
  Mat s, sx, sxx;
};

/// Angles theta(x) = theta0 + w_t x + sum_j a_j cos(j x + p_j) and
/// phi(x) = phi0 + w_p x + sum_j b_j sin(j x + r_j); S = lambda (n . sigma) with
/// n = (sin theta cos phi, sin theta sin phi, cos theta).
struct OrbitSpec {
  cplx lambda = 1.0;
  double theta0 = pi / 2;
  int theta_winding = 0;
  std::vector<double> theta_amp, theta_phase;
  double phi0 = 0.0;
  int phi_winding = 0;
  std::vector<double> phi_amp, phi_phase;
};

struct FourierSpec {
  int N = 2;
  int M = 0;
  std::vector<Modes> entries;  // row-major N*N mode arrays
};

class LoopField {
 public:
  static LoopField orbit(OrbitSpec o) {
    if (o.theta_amp.size() != o.theta_phase.size() || o.phi_amp.size() != o.phi_phase.size())
      throw Error(ErrorKind::config, "amplitude and phase lists must match");
    LoopField f;
    f.data_ = std::move(o);
    return f;
  }
  static LoopField fourier(FourierSpec s) {
    if (int(s.entries.size()) != s.N * s.N) throw Error(ErrorKind::config, "need N*N mode arrays");
    for (const Modes& m : s.entries)
      if (int(m.size()) != 2 * s.M + 1) throw Error(ErrorKind::config, "mode arrays must have 2M+1 entries");
    LoopField f;
    f.data_ = std::move(s);
    return f;
  }

  bool is_orbit() const { return std::holds_alternative<OrbitSpec>(data_); }
  const OrbitSpec& orbit_spec() const { return std::get<OrbitSpec>(data_); }
  const FourierSpec& fourier_spec() const { return std::get<FourierSpec>(data_); }
  int N() const { return is_orbit() ? 2 : fourier_spec().N; }
  int modes() const { return is_orbit() ? -1 : fourier_spec().M; }

  Jet jet(double x) const {
    if (is_orbit()) return orbit_jet(orbit_spec(), x);
    const FourierSpec& f = fourier_spec();
    Jet j{zero_mat(f.N), zero_mat(f.N), zero_mat(f.N)};
    for (int r = 0; r < f.N; ++r)
      for (int c = 0; c < f.N; ++c) {
        const auto v = eval_modes(f.entries[r * f.N + c], x);
        j.s(r, c) = v[0];
        j.sx(r, c) = v[1];
        j.sxx(r, c) = v[2];
      }
    return j;
  }

  /// Fourier representation with |m| <= M from g samples.
  LoopField to_fourier(int modes_m, int g) const {
    if (!is_orbit()) return *this;
    Spectral sp;
    FourierSpec f{2, modes_m, {}};
    std::vector<Mat> vals(g);
    for (int j = 0; j < g; ++j) vals[j] = jet(grid_point(j, g)).s;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        std::vector<cplx> v(g);
        for (int j = 0; j < g; ++j) v[j] = vals[j](r, c);
        f.entries.push_back(sp.analyze(v, modes_m));
      }
    return fourier(std::move(f));
  }

 private:
  static Jet orbit_jet(const OrbitSpec& o, double x) {
    double th = o.theta0 + o.theta_winding * x, tx = o.theta_winding, txx = 0;
    for (std::size_t j = 0; j < o.theta_amp.size(); ++j) {
      const double w = double(j + 1), arg = w * x + o.theta_phase[j];
      th += o.theta_amp[j] * std::cos(arg);
      tx += -w * o.theta_amp[j] * std::sin(arg);
      txx += -w * w * o.theta_amp[j] * std::cos(arg);
    }
    double ph = o.phi0 + o.phi_winding * x, px = o.phi_winding, pxx = 0;
    for (std::size_t j = 0; j < o.phi_amp.size(); ++j) {
      const double w = double(j + 1), arg = w * x + o.phi_phase[j];
      ph += o.phi_amp[j] * std::sin(arg);
      px += w * o.phi_amp[j] * std::cos(arg);
      pxx += -w * w * o.phi_amp[j] * std::sin(arg);
    }
    const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
    using V = Eigen::Vector3d;
    const V n(st * cp, st * sp, ct);
    const V n_t(ct * cp, ct * sp, -st);
    const V n_p(-st * sp, st * cp, 0);
    const V n_tt(-st * cp, -st * sp, -ct);
    const V n_tp(-ct * sp, ct * cp, 0);
    const V n_pp(-st * cp, -st * sp, 0);
    const V nx = n_t * tx + n_p * px;
    const V nxx = n_tt * tx * tx + 2.0 * n_tp * tx * px + n_pp * px * px + n_t * txx + n_p * pxx;
    auto mat = [&](const V& v) {
      return Mat(o.lambda * from_pauli({cplx(v(0)), cplx(v(1)), cplx(v(2))}));
    };
    return {mat(n), mat(nx), mat(nxx)};
  }

  std::variant<OrbitSpec, FourierSpec> data_;
};

/// Random smooth phases: winding for phi, `harmonics` trig terms of size
/// <= amplitude in both angles, theta0 within theta_spread of pi/2.
struct PhaseSpec {
  double winding = 1;
  int harmonics = 2;
  double amplitude = 0.3;
  double theta_spread = 0.3;
};

inline LoopField sample_orbit_field(cplx lambda, const PhaseSpec& p, std::uint64_t seed) {
  if (std::abs(p.winding - std::round(p.winding)) > 0)
    throw Error(ErrorKind::config, "winding numbers must be integers");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ph(0.0, 2 * pi);
  OrbitSpec o;
  o.lambda = lambda;
  o.theta0 = pi / 2 + p.theta_spread * u(rng);
  o.phi0 = ph(rng);
  o.phi_winding = int(std::round(p.winding));
  for (int j = 0; j < p.harmonics; ++j) {
    o.theta_amp.push_back(p.amplitude * u(rng));
    o.theta_phase.push_back(ph(rng));
    o.phi_amp.push_back(p.amplitude * u(rng));
    o.phi_phase.push_back(ph(rng));
  }
  return LoopField::orbit(o);
}

struct LoopState {
  std::vector<LoopField> fields;
  int G = 256;

  std::vector<Jet> jets_at(double x) const {
    std::vector<Jet> j;
    j.reserve(fields.size());
    for (const auto& f : fields) j.push_back(f.jet(x));
    return j;
  }

  /// Jets on the g-point grid, [grid point][site]. Fourier fields go through the FFT.
  std::vector<std::vector<Jet>> grid_jets(int g = 0) const {
    if (g <= 0) g = G;
    std::vector<std::vector<Jet>> out(g, std::vector<Jet>(fields.size()));
    Spectral sp;
    for (std::size_t a = 0; a < fields.size(); ++a) {
      const LoopField& f = fields[a];
      if (f.is_orbit()) {
        for (int j = 0; j < g; ++j) out[j][a] = f.jet(grid_point(j, g));
        continue;
      }
      const FourierSpec& fs = f.fourier_spec();
      for (int j = 0; j < g; ++j) out[j][a] = {zero_mat(fs.N), zero_mat(fs.N), zero_mat(fs.N)};
      for (int r = 0; r < fs.N; ++r)
        for (int c = 0; c < fs.N; ++c) {
          const Samples3 s = sp.synthesize(fs.entries[r * fs.N + c], g);
          for (int j = 0; j < g; ++j) {
            out[j][a].s(r, c) = s.f[j];
            out[j][a].sx(r, c) = s.fx[j];
            out[j][a].sxx(r, c) = s.fxx[j];
          }
        }
    }
    return out;
  }

  LoopState to_fourier(int modes_m) const {
    LoopState s{{}, G};
    for (const auto& f : fields) s.fields.push_back(f.to_fourier(modes_m, std::max(G, 2 * modes_m + 2)));
    return s;
  }
};

inline void check_loop(const GaudinModel& m, const LoopState& st) {
  if (int(st.fields.size()) != m.n()) throw Error(ErrorKind::size_mismatch, "one field per site");
  for (const auto& f : st.fields)
    if (f.N() != m.N()) throw Error(ErrorKind::size_mismatch, "field rank differs from the model");
  if (!is_pow2(st.G)) throw Error(ErrorKind::config, "grid size must be a power of two");
}

inline SpinState values(const std::vector<Jet>& j) {
  SpinState s;
  for (const auto& x : j) s.push_back(x.s);
  return s;
}

/// eta^a and its x-derivative for the second flow (N = 2):
/// eta = -(k / 4 lambda^2) [S, S_x] + sum phi_ac(S^c) + (H_a / lambda^2) S.
struct EtaJet {
  Mat eta, eta_x, delta;
};

inline EtaJet eta_field(const GaudinModel& m, const std::vector<Jet>& j, int a) {
  if (m.N() != 2) throw Error(ErrorKind::unsupported, "second-flow eta is available for N = 2 only");
  const cplx k = m.k(), l2 = m.lambda(a) * m.lambda(a);
  const Jet& A = j[a];
  Mat l0 = zero_mat(2), l0x = zero_mat(2);
  for (int c = 0; c < m.n(); ++c) {
    if (c == a) continue;
    l0 += m.phi_hat(a, c)(j[c].s);
    l0x += m.phi_hat(a, c)(j[c].sx);
  }
  const cplx h = -0.5 * tr(A.s, l0), hx = -0.5 * (tr(A.sx, l0) + tr(A.s, l0x));
  const Mat delta = (-k / (4.0 * l2)) * comm(A.s, A.sx);
  EtaJet e;
  e.delta = delta;
  e.eta = delta + l0 + (h / l2) * A.s;
  e.eta_x = (-k / (4.0 * l2)) * comm(A.s, A.sxx) + l0x + (hx / l2) * A.s + (h / l2) * A.sx;
  return e;
}

/// Pointwise right-hand side of one flow.
inline SpinState field_rhs_point(const GaudinModel& m, const std::vector<Jet>& j, FlowId f) {
  check_flow(m, f);
  if (f.kind == FlowKind::h0) throw Error(ErrorKind::unsupported, "no 1+1 H0 flow");
  const int a = f.site;
  const cplx k = m.k();
  SpinState out(m.n(), zero_mat(m.N()));
  if (f.kind == FlowKind::first) {
    out[a] += k * j[a].sx;
    for (int c = 0; c < m.n(); ++c) {
      if (c == a) continue;
      out[a] -= comm(j[a].s, m.phi_hat(a, c)(j[c].s));
      out[c] += comm(j[c].s, m.phi_hat(c, a)(j[a].s));
    }
    return out;
  }
  const EtaJet e = eta_field(m, j, a);
  const Mat& A = j[a].s;
  out[a] = k * e.eta_x + comm(A, m.wp_hat()(A));
  for (int c = 0; c < m.n(); ++c) {
    if (c == a) continue;
    out[a] += comm(e.eta, m.phi_hat(c, a)(j[c].s)) - comm(m.F_hat(c, a)(j[c].s), A);
    out[c] = comm(m.phi_hat(a, c)(e.eta), j[c].s) + comm(j[c].s, m.F_hat(c, a)(A));
  }
  return out;
}

inline SpinState field_rhs_point(const GaudinModel& m, const std::vector<Jet>& j, const Flow& f) {
  SpinState out(m.n(), zero_mat(m.N()));
  for (const auto& [c, id] : f.terms) {
    const SpinState r = field_rhs_point(m, j, id);
    for (int b = 0; b < m.n(); ++b) out[b] += c * r[b];
  }
  return out;
}

/// Tangent fields on the state grid, [grid point][site].
template <class F>
std::vector<SpinState> field_eom_rhs(const GaudinModel& m, const LoopState& st, const F& flow) {
  check_loop(m, st);
  const auto jets = st.grid_jets();
  std::vector<SpinState> out;
  out.reserve(jets.size());
  for (const auto& j : jets) out.push_back(field_rhs_point(m, j, flow));
  return out;
}

/// M and M_x of one flow at (z, x).
inline std::pair<Mat, Mat> field_m_matrix(const GaudinModel& m, const std::vector<Jet>& j, FlowId f, cplx z) {
  const cplx d = z - m.point(f.site);
  if (f.kind == FlowKind::first) {
    const Hat h = m.phi_hat_at(d);
    return {h(j[f.site].s), h(j[f.site].sx)};
  }
  if (f.kind == FlowKind::h0) throw Error(ErrorKind::unsupported, "no 1+1 H0 flow");
  const EtaJet e = eta_field(m, j, f.site);
  const Hat hf = m.F_hat_at(d), hp = m.phi_hat_at(d);
  return {hf(j[f.site].s) + hp(e.eta), hf(j[f.site].sx) + hp(e.eta_x)};
}

/// || dL/dt - k dM/dx - [L, M] ||_F at (z, x); perturb scales the EOM by (1 + perturb).
template <class F>
double zero_curvature_residual_at(const GaudinModel& m, const std::vector<Jet>& j, const F& flow, cplx z,
                                  double perturb = 0.0) {
  m.check_spectral_point(z);
  SpinState ds = field_rhs_point(m, j, flow);
  if (perturb != 0.0)
    for (Mat& x : ds) x *= (1.0 + perturb);
  Flow fl(flow);
  Mat mm = zero_mat(m.N()), mx = zero_mat(m.N());
  for (const auto& [c, id] : fl.terms) {
    const auto [a, b] = field_m_matrix(m, j, id, z);
    mm += c * a;
    mx += c * b;
  }
  const SpinState s = values(j);
  return (lax(m, ds, z) - m.k() * mx - comm(lax(m, s, z), mm)).norm();
}

template <class F>
double zero_curvature_residual(const GaudinModel& m, const LoopState& st, const F& flow, cplx z, double x,
                               double perturb = 0.0) {
  check_loop(m, st);
  return zero_curvature_residual_at(m, st.jets_at(x), flow, z, perturb);
}

/// The three extra terms [E(S), D] + [S, E(D)] - E([S, D]) of the general-N
/// second flow, with D = Delta eta and E a chosen diagonal operator.
inline Mat extra_e1_terms(const GaudinModel& m, const std::vector<Jet>& j, int a, const Hat& e) {
  const EtaJet eta = eta_field(m, j, a);
  const Mat& s = j[a].s;
  return comm(e(s), eta.delta) + comm(s, e(eta.delta)) - e(comm(s, eta.delta));
}

/// Named flows.
inline Flow pcm_flow() { return Flow(FlowId::first(0)).add(-1.0, FlowId::first(1)); }

struct PcmReport {
  // d_t l0 - k d_x l1 + 2([S1, phi_12(S2)] + [phi_21(S1), S2]); the bracket
  // term cancels in the rational model.
  double conservation = 0;
  double traditional = 0;   // d_t l1 - k d_x l0 + (2/(z1-z2)) [l1, l0] (rational only)
  double light_cone = 0;    // d_eta S1 + 2 [S1, phi_12(S2)],  d_xi S2 - 2 [S2, phi_21(S1)]
  double stationary = 0;    // elliptic top from S2 = -(1/2) phi_21(S1)
};

/// Two-site chiral checks on the state grid.
inline PcmReport pcm_scenario(const GaudinModel& m, const LoopState& st) {
  if (m.n() != 2) throw Error(ErrorKind::config, "the chiral reduction needs n = 2");
  check_loop(m, st);
  const Flow fl = pcm_flow();
  const cplx k = m.k();
  PcmReport r;
  for (const auto& j : st.grid_jets()) {
    const SpinState d = field_rhs_point(m, j, fl);
    const Mat l0t = d[0] + d[1], l1t = d[0] - d[1];
    const Mat l0 = j[0].s + j[1].s, l1 = j[0].s - j[1].s;
    const Mat l0x = j[0].sx + j[1].sx, l1x = j[0].sx - j[1].sx;
    const Mat cross =
        2.0 * (comm(j[0].s, m.phi_hat(0, 1)(j[1].s)) + comm(m.phi_hat(1, 0)(j[0].s), j[1].s));
    r.conservation = std::max(r.conservation, (l0t - k * l1x + cross).norm());
    if (!m.elliptic()) {
      const cplx z12 = m.point(0) - m.point(1);
      r.traditional = std::max(r.traditional, (l1t - k * l0x + (2.0 / z12) * comm(l1, l0)).norm());
    }
    // d_eta = d_t - k d_x and d_xi = d_t + k d_x.
    const Mat eta1 = d[0] - k * j[0].sx, xi2 = d[1] + k * j[1].sx;
    r.light_cone = std::max(r.light_cone, (eta1 + 2.0 * comm(j[0].s, m.phi_hat(0, 1)(j[1].s))).norm());
    r.light_cone = std::max(r.light_cone, (xi2 - 2.0 * comm(j[1].s, m.phi_hat(1, 0)(j[0].s))).norm());
    // Stationary reduction: d_xi S = 0 fixed by S2 = -(1/2) phi_21(S1).
    const Mat s2 = -0.5 * m.phi_hat(1, 0)(j[0].s);
    const Mat top = -2.0 * comm(j[0].s, m.phi_hat(0, 1)(s2));
    const Mat expect = m.elliptic() ? comm(j[0].s, m.wp_hat()(j[0].s))
                                    : Mat(comm(j[0].s, j[0].s));  // rational: wp-hat -> 0
    r.stationary = std::max(r.stationary, (top - expect).norm());
    r.stationary = std::max(r.stationary, comm(s2, m.phi_hat(1, 0)(j[0].s)).norm());
  }
  return r;
}

}  // namespace gaudin
