#pragma once
// 0+1 Gaudin mechanics: Lax and M matrices, Hamiltonians, closed-form
// equations of motion, trace gradients, the linear Poisson bracket and the
// Lax residual. Rational and elliptic kinds share one code path through the
// hat operators (rational: phi -> 1/z, F -> 1/z^2, wp -> 0).
//
// Flow convention: dS^a/dt = N [S^a, grad_a H], grad the trace gradient
// (dH = sum_a Tr(grad_a H dS^a)). In bracket language dF/dt = {H, F}.

#include "gaudin/core.hpp"
#include "gaudin/efun.hpp"
#include "gaudin/salg.hpp"

#include <optional>
#include <random>
#include <utility>

namespace gaudin {

enum class ModelKind { rational, elliptic };

inline const char* to_string(ModelKind k) { return k == ModelKind::rational ? "rational" : "elliptic"; }

enum class FlowKind { first, second, h0 };

/// First(a), Second(a) or H0. Site indices are 0-based here.
struct FlowId {
  FlowKind kind = FlowKind::first;
  int site = 0;
  static FlowId first(int a) { return {FlowKind::first, a}; }
  static FlowId second(int a) { return {FlowKind::second, a}; }
  static FlowId h0() { return {FlowKind::h0, 0}; }
};

/// Linear combination of flows, e.g. First(1) - First(2) for the chiral model.
struct Flow {
  std::vector<std::pair<cplx, FlowId>> terms;
  Flow() = default;
  Flow(FlowId f) : terms{{1.0, f}} {}  // NOLINT: implicit on purpose
  Flow& add(cplx c, FlowId f) {
    terms.emplace_back(c, f);
    return *this;
  }
};

using SpinState = std::vector<Mat>;

class GaudinModel {
 public:
  GaudinModel(ModelKind kind, int n_rank, std::vector<cplx> points, std::vector<cplx> lambda,
              cplx k = 1.0, std::optional<EllipticContext> ctx = std::nullopt,
              std::optional<bool> sl2_mode = std::nullopt)
      : kind_(kind), N_(n_rank), z_(std::move(points)), lambda_(std::move(lambda)), k_(k), ctx_(ctx) {
    if (N_ < 2 || N_ > max_rank) throw Error(ErrorKind::config, "N out of range");
    if (z_.empty()) throw Error(ErrorKind::config, "need at least one marked point");
    if (lambda_.size() != z_.size()) throw Error(ErrorKind::config, "one orbit level per site");
    for (std::size_t a = 0; a < z_.size(); ++a) {
      if (std::abs(lambda_[a]) == 0.0) throw Error(ErrorKind::config, "orbit level must be nonzero");
      for (std::size_t c = a + 1; c < z_.size(); ++c)
        if (std::abs(z_[a] - z_[c]) <= 1e-8) throw Error(ErrorKind::config, "marked points must be distinct");
    }
    if (kind_ == ModelKind::elliptic) {
      if (!ctx_) throw Error(ErrorKind::config, "elliptic model needs a modular parameter");
      const cplx tau = ctx_->tau();
      for (std::size_t a = 0; a < z_.size(); ++a) {
        const double t = z_[a].imag() / tau.imag();
        const double s = (z_[a] - t * tau).real();
        if (t < 0 || t >= 1 || s < 0 || s >= 1)
          throw Error(ErrorKind::config, "elliptic marked points must lie in the fundamental cell");
        for (std::size_t c = a + 1; c < z_.size(); ++c)
          if (ctx_->lattice_distance(z_[a] - z_[c]) <= ctx_->pole_radius())
            throw Error(ErrorKind::config, "marked points coincide modulo the lattice");
      }
      eta_ = eta1(*ctx_);
    }
    sl2_ = sl2_mode.value_or(N_ == 2);
    if (sl2_ && N_ != 2) throw Error(ErrorKind::unsupported, "the H_a^2/(2 lambda^2) term exists only for N = 2");
    precompute();
  }

  ModelKind kind() const { return kind_; }
  int N() const { return N_; }
  int n() const { return int(z_.size()); }
  const std::vector<cplx>& points() const { return z_; }
  cplx point(int a) const { return z_[a]; }
  const std::vector<cplx>& lambdas() const { return lambda_; }
  cplx lambda(int a) const { return lambda_[a]; }
  cplx k() const { return k_; }
  bool sl2_mode() const { return sl2_; }
  const EllipticContext& ctx() const {
    if (!ctx_) throw Error(ErrorKind::unsupported, "rational model has no elliptic context");
    return *ctx_;
  }
  bool elliptic() const { return kind_ == ModelKind::elliptic; }
  cplx eta1_value() const { return eta_; }

  /// Copy with a different sl(2) flag or orbit levels.
  GaudinModel with_sl2_mode(bool on) const { return GaudinModel(kind_, N_, z_, lambda_, k_, ctx_, on); }
  GaudinModel with_lambdas(std::vector<cplx> l) const { return GaudinModel(kind_, N_, z_, std::move(l), k_, ctx_, sl2_); }
  GaudinModel with_k(cplx k) const { return GaudinModel(kind_, N_, z_, lambda_, k, ctx_, sl2_); }

  // Hat operators at argument z_a - z_c (cached) or at a free argument.
  const Hat& phi_hat(int a, int c) const { return phi_[a * n() + c]; }
  const Hat& F_hat(int a, int c) const { return F_[a * n() + c]; }
  const Hat& f_hat(int a, int c) const {
    if (!elliptic()) throw Error(ErrorKind::unsupported, "f-hat is defined for the elliptic kind only");
    return f_[a * n() + c];
  }
  const Hat& wp_hat() const { return wp_; }

  Hat phi_hat_at(cplx d) const { return hat_at(SectionKind::vf, d); }
  Hat F_hat_at(cplx d) const { return hat_at(SectionKind::F, d); }
  Hat f_hat_at(cplx d) const {
    if (!elliptic()) throw Error(ErrorKind::unsupported, "f-hat is defined for the elliptic kind only");
    return hat_at(SectionKind::f, d);
  }
  /// Scalar wp(z) for the elliptic kind, 1/z^2 for the rational kind.
  cplx wp_scalar(cplx z) const {
    return elliptic() ? weierstrass(WeierstrassKind::p, z, *ctx_, eta_) : 1.0 / (z * z);
  }
  /// Scalar E1(z) for the elliptic kind, 1/z for the rational kind.
  cplx e1_scalar(cplx z) const { return elliptic() ? E1(z, *ctx_) : 1.0 / z; }

  void check_spectral_point(cplx z) const {
    for (int c = 0; c < n(); ++c) {
      const double d = elliptic() ? ctx_->lattice_distance(z - z_[c]) : std::abs(z - z_[c]);
      if (d <= 1e-8) throw Error(ErrorKind::pole, "spectral parameter at a marked point");
    }
  }

 private:
  Hat hat_at(SectionKind kind, cplx d) const {
    if (elliptic()) return section_hat(kind, N_, d, *ctx_);
    if (kind == SectionKind::vf) return Hat(N_, 1.0 / d);
    if (kind == SectionKind::F) return Hat(N_, 1.0 / (d * d));
    throw Error(ErrorKind::unsupported, "rational f-hat");
  }

  void precompute() {
    const int nn = n();
    phi_.assign(nn * nn, Hat(N_));
    F_.assign(nn * nn, Hat(N_));
    f_.assign(nn * nn, Hat(N_));
    for (int a = 0; a < nn; ++a)
      for (int c = 0; c < nn; ++c) {
        if (a == c) continue;
        const cplx d = z_[a] - z_[c];
        phi_[a * nn + c] = hat_at(SectionKind::vf, d);
        F_[a * nn + c] = hat_at(SectionKind::F, d);
        if (elliptic()) f_[a * nn + c] = hat_at(SectionKind::f, d);
      }
    wp_ = elliptic() ? gaudin::wp_hat(N_, *ctx_, eta_) : Hat(N_, 0.0);
  }

  ModelKind kind_;
  int N_;
  std::vector<cplx> z_;
  std::vector<cplx> lambda_;
  cplx k_;
  std::optional<EllipticContext> ctx_;
  bool sl2_ = false;
  cplx eta_ = 0;
  std::vector<Hat> phi_, F_, f_;
  Hat wp_;
};

inline void check_state(const GaudinModel& m, const SpinState& s) {
  if (int(s.size()) != m.n()) throw Error(ErrorKind::size_mismatch, "one matrix per site");
  for (const Mat& x : s)
    if (x.rows() != m.N() || x.cols() != m.N()) throw Error(ErrorKind::size_mismatch, "site matrix must be N x N");
}

inline void check_flow(const GaudinModel& m, FlowId f) {
  if (f.kind != FlowKind::h0 && (f.site < 0 || f.site >= m.n()))
    throw Error(ErrorKind::config, "flow site out of range");
  if (f.kind == FlowKind::h0 && !m.elliptic())
    throw Error(ErrorKind::unsupported, "H0 is an elliptic-only flow");
}

/// L(z) = sum_c phi-hat(z - z_c)(S^c).
inline Mat lax(const GaudinModel& m, const SpinState& s, cplx z) {
  check_state(m, s);
  m.check_spectral_point(z);
  Mat l = zero_mat(m.N());
  for (int c = 0; c < m.n(); ++c) l += m.phi_hat_at(z - m.point(c))(s[c]);
  return l;
}

/// L^{a,0} = sum_{c != a} phi-hat_{ac}(S^c).
inline Mat local_sum(const GaudinModel& m, const SpinState& s, int a) {
  Mat e = zero_mat(m.N());
  for (int c = 0; c < m.n(); ++c)
    if (c != a) e += m.phi_hat(a, c)(s[c]);
  return e;
}

/// H_{1,a} = -(1/N) sum_{c != a} <S^a phi-hat_{ac}(S^c)>.
inline cplx hamiltonian_first(const GaudinModel& m, const SpinState& s, int a) {
  return -tr(s[a], local_sum(m, s, a)) / double(m.N());
}

/// H_{2,a} = (1/2N) <(S^a)^2>.
inline cplx casimir(const GaudinModel& m, const SpinState& s, int a) {
  return tr(s[a], s[a]) / (2.0 * m.N());
}

/// H_0 = (1/2N) sum_c <S^c wp-hat(S^c)> - (1/2N) sum_{b != c} <S^b f-hat_{bc}(S^c)>.
inline cplx hamiltonian_h0(const GaudinModel& m, const SpinState& s) {
  if (!m.elliptic()) throw Error(ErrorKind::unsupported, "H0 is an elliptic-only flow");
  cplx h = 0;
  for (int c = 0; c < m.n(); ++c) h += tr(s[c], m.wp_hat()(s[c]));
  for (int b = 0; b < m.n(); ++b)
    for (int c = 0; c < m.n(); ++c)
      if (b != c) h -= tr(s[b], m.f_hat(b, c)(s[c]));
  return h / (2.0 * m.N());
}

/// eta'^a = sum_{c != a} phi-hat_{ac}(S^c), plus (H_a / lambda_a^2) S^a in sl(2) mode.
inline Mat eta_prime(const GaudinModel& m, const SpinState& s, int a) {
  Mat e = local_sum(m, s, a);
  if (m.sl2_mode()) e += (hamiltonian_first(m, s, a) / (m.lambda(a) * m.lambda(a))) * s[a];
  return e;
}

/// Compact reformulated Hamiltonian:
/// (1/2N)<S^a wp(S^a)> - (1/2N)<eta' eta'> + (1/N) sum <S^a F_{ac}(S^c)>, eta' without the
/// sl(2) term; sl(2) mode adds H_a^2 / (2 lambda_a^2).
inline cplx hamiltonian_second(const GaudinModel& m, const SpinState& s, int a) {
  const double N = m.N();
  const Mat e = local_sum(m, s, a);
  cplx h = tr(s[a], m.wp_hat()(s[a])) / (2 * N) - tr(e, e) / (2 * N);
  for (int c = 0; c < m.n(); ++c)
    if (c != a) h += tr(s[a], m.F_hat(a, c)(s[c])) / N;
  if (m.sl2_mode()) {
    const cplx ha = hamiltonian_first(m, s, a);
    h += ha * ha / (2.0 * m.lambda(a) * m.lambda(a));
  }
  return h;
}

/// Long form of the reformulated Hamiltonian, with the double sum written out:
/// (1/2N)<S^a wp(S^a)> + (1/N) sum <S^a F_{ac}(S^c)>
///   + (1/2N) sum_{b,c != a} <S^c phi_{ca}(phi_{ab}(S^b))>. No sl(2) term.
inline cplx hamiltonian_second_long(const GaudinModel& m, const SpinState& s, int a) {
  const double N = m.N();
  cplx h = tr(s[a], m.wp_hat()(s[a])) / (2 * N);
  for (int c = 0; c < m.n(); ++c) {
    if (c == a) continue;
    h += tr(s[a], m.F_hat(a, c)(s[c])) / N;
    for (int b = 0; b < m.n(); ++b)
      if (b != a) h += tr(s[c], m.phi_hat(c, a)(m.phi_hat(a, b)(s[b]))) / (2 * N);
  }
  return h;
}

inline cplx hamiltonian(const GaudinModel& m, const SpinState& s, FlowId f) {
  check_state(m, s);
  check_flow(m, f);
  switch (f.kind) {
    case FlowKind::first: return hamiltonian_first(m, s, f.site);
    case FlowKind::second: return hamiltonian_second(m, s, f.site);
    case FlowKind::h0: return hamiltonian_h0(m, s);
  }
  return 0;
}

inline cplx hamiltonian(const GaudinModel& m, const SpinState& s, const Flow& f) {
  cplx h = 0;
  for (const auto& [c, id] : f.terms) h += c * hamiltonian(m, s, id);
  return h;
}

/// Trace gradients grad_b H for every site b.
inline SpinState gradient(const GaudinModel& m, const SpinState& s, FlowId f) {
  check_state(m, s);
  check_flow(m, f);
  const double N = m.N();
  SpinState g(m.n(), zero_mat(m.N()));
  const int a = f.site;
  auto add_first = [&](cplx w) {
    // d/dS^a: -(1/N) sum phi_ac(S^c); d/dS^c: -(1/N) phi_ac^T(S^a) = (1/N) phi_ca(S^a).
    g[a] += (-w / N) * local_sum(m, s, a);
    for (int c = 0; c < m.n(); ++c)
      if (c != a) g[c] += (w / N) * m.phi_hat(c, a)(s[a]);
  };
  switch (f.kind) {
    case FlowKind::first: add_first(1.0); break;
    case FlowKind::h0:
      for (int b = 0; b < m.n(); ++b) {
        g[b] += m.wp_hat()(s[b]) / N;
        for (int c = 0; c < m.n(); ++c)
          if (c != b) g[b] -= m.f_hat(b, c)(s[c]) / N;
      }
      break;
    case FlowKind::second: {
      const Mat e = local_sum(m, s, a);
      g[a] += m.wp_hat()(s[a]) / N;
      for (int c = 0; c < m.n(); ++c) {
        if (c == a) continue;
        g[a] += m.F_hat(a, c)(s[c]) / N;
        g[c] += (m.phi_hat(c, a)(e) + m.F_hat(c, a)(s[a])) / N;
      }
      if (m.sl2_mode()) add_first(hamiltonian_first(m, s, a) / (m.lambda(a) * m.lambda(a)));
      break;
    }
  }
  return g;
}

/// Closed-form right-hand sides.
inline SpinState eom_rhs(const GaudinModel& m, const SpinState& s, FlowId f) {
  check_state(m, s);
  check_flow(m, f);
  SpinState out(m.n(), zero_mat(m.N()));
  const int a = f.site;
  auto first = [&](cplx w) {
    for (int c = 0; c < m.n(); ++c) {
      if (c == a) continue;
      out[a] -= w * comm(s[a], m.phi_hat(a, c)(s[c]));
      out[c] += w * comm(s[c], m.phi_hat(c, a)(s[a]));
    }
  };
  switch (f.kind) {
    case FlowKind::first: first(1.0); break;
    case FlowKind::h0:
      for (int b = 0; b < m.n(); ++b) {
        out[b] += comm(s[b], m.wp_hat()(s[b]));
        for (int c = 0; c < m.n(); ++c)
          if (c != b) out[b] -= comm(s[b], m.f_hat(b, c)(s[c]));
      }
      break;
    case FlowKind::second: {
      const Mat e = local_sum(m, s, a);
      out[a] += comm(s[a], m.wp_hat()(s[a]));
      for (int c = 0; c < m.n(); ++c) {
        if (c == a) continue;
        out[a] += comm(s[a], m.F_hat(a, c)(s[c]));
        out[c] += comm(s[c], m.phi_hat(c, a)(e)) + comm(s[c], m.F_hat(c, a)(s[a]));
      }
      if (m.sl2_mode()) first(hamiltonian_first(m, s, a) / (m.lambda(a) * m.lambda(a)));
      break;
    }
  }
  return out;
}

inline SpinState eom_rhs(const GaudinModel& m, const SpinState& s, const Flow& f) {
  SpinState out(m.n(), zero_mat(m.N()));
  for (const auto& [c, id] : f.terms) {
    const SpinState r = eom_rhs(m, s, id);
    for (int b = 0; b < m.n(); ++b) out[b] += c * r[b];
  }
  return out;
}

/// M-matrices: M_a = phi-hat(z - z_a)(S^a); M_0 = -sum_b f-hat(z - z_b)(S^b);
/// second: F-hat(z - z_a)(S^a) + phi-hat(z - z_a)(eta'^a).
inline Mat m_matrix(const GaudinModel& m, const SpinState& s, FlowId f, cplx z) {
  check_state(m, s);
  check_flow(m, f);
  m.check_spectral_point(z);
  switch (f.kind) {
    case FlowKind::first: return m.phi_hat_at(z - m.point(f.site))(s[f.site]);
    case FlowKind::h0: {
      Mat r = zero_mat(m.N());
      for (int b = 0; b < m.n(); ++b) r -= m.f_hat_at(z - m.point(b))(s[b]);
      return r;
    }
    case FlowKind::second: {
      const cplx d = z - m.point(f.site);
      return m.F_hat_at(d)(s[f.site]) + m.phi_hat_at(d)(eta_prime(m, s, f.site));
    }
  }
  return zero_mat(m.N());
}

inline Mat m_matrix(const GaudinModel& m, const SpinState& s, const Flow& f, cplx z) {
  Mat r = zero_mat(m.N());
  for (const auto& [c, id] : f.terms) r += c * m_matrix(m, s, id, z);
  return r;
}

/// || dL/dt - [L, M] ||_F with dL/dt assembled from eom_rhs by linearity.
template <class F>
double lax_residual(const GaudinModel& m, const SpinState& s, const F& flow, cplx z, double perturb = 0.0) {
  SpinState ds = eom_rhs(m, s, flow);
  if (perturb != 0.0)
    for (Mat& x : ds) x *= (1.0 + perturb);
  return (lax(m, ds, z) - comm(lax(m, s, z), m_matrix(m, s, flow, z))).norm();
}

/// |(1/2N)<L^2(z)> - sum_c (H_{2,c} wp(z - z_c) - H_{1,c} E1(z - z_c)) + H_0|;
/// the rational analogue uses 1/z^2, 1/z and no H_0.
inline double generating_check(const GaudinModel& m, const SpinState& s, cplx z) {
  const Mat l = lax(m, s, z);
  cplx r = tr(l, l) / (2.0 * m.N());
  for (int c = 0; c < m.n(); ++c) {
    const cplx d = z - m.point(c);
    r -= casimir(m, s, c) * m.wp_scalar(d) - hamiltonian_first(m, s, c) * m.e1_scalar(d);
  }
  if (m.elliptic()) r += hamiltonian_h0(m, s);
  return std::abs(r);
}

/// {F, G} = sum_a sum_{al, be} dF/dS^a_al dG/dS^a_be k_{al,be} S^a_{al+be}, with
/// gradients given as coefficient vectors and k the reduced-basis bracket coefficient.
inline cplx poisson_bracket(const GaudinModel& m, const std::vector<SpinCoeffs>& grad_f,
                            const std::vector<SpinCoeffs>& grad_g, const SpinState& s) {
  const int N = m.N();
  const auto& labels = Algebra::get(N).labels();
  cplx r = 0;
  for (int a = 0; a < m.n(); ++a) {
    const SpinCoeffs sc = decompose(s[a]);
    for (const Index& al : labels)
      for (const Index& be : labels) {
        const Index sum = reduce(al + be, N);
        if (sum.a1 == 0 && sum.a2 == 0) continue;
        r += grad_f[a][al] * grad_g[a][be] * bracket_coefficient(al, be, N) * sc[sum];
      }
  }
  return r;
}

/// Coefficient gradients dH/dS_al = Tr(grad H T_al).
inline std::vector<SpinCoeffs> coefficient_gradient(const SpinState& g) {
  std::vector<SpinCoeffs> out;
  for (const Mat& x : g) {
    const int N = int(x.rows());
    SpinCoeffs c(N);
    for (const Index& l : Algebra::get(N).labels()) c[l] = tr(x, Algebra::get(N).t(l));
    out.push_back(c);
  }
  return out;
}

/// Res_{z = z_a} L(z)/(z - z_a) by trapezoid quadrature on a circle.
inline Mat residue_contour(const GaudinModel& m, const SpinState& s, int a, int power = 1,
                           double radius = 1e-2, int nodes = 64) {
  Mat r = zero_mat(m.N());
  for (int j = 0; j < nodes; ++j) {
    const cplx w = radius * std::exp(2.0 * pi * I * double(j) / double(nodes));
    r += lax(m, s, m.point(a) + w) * std::pow(w, 1 - power);
  }
  return r / double(nodes);
}

/// How the conjugating matrix of a random on-shell state is drawn.
enum class Conjugation { general, unitary };

/// Random on-shell state: S^a = g diag(eigs) g^{-1}, eigenvalues
/// lambda_a (N-1-2j)/(N-1). general: g = 1 + 0.5 X with X complex Gaussian,
/// redrawn until reasonably conditioned; unitary: g from the QR factor of X.
template <class Rng>
SpinState random_onshell_state(const GaudinModel& m, Rng& rng, Conjugation how = Conjugation::general) {
  std::normal_distribution<double> nd(0.0, 1.0);
  SpinState s;
  const int N = m.N();
  for (int a = 0; a < m.n(); ++a) {
    for (;;) {
      Mat x(N, N);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) x(i, j) = cplx(nd(rng), nd(rng));
      Mat g;
      if (how == Conjugation::unitary) {
        g = Eigen::HouseholderQR<Mat>(x).householderQ();
      } else {
        g = Mat::Identity(N, N) + 0.5 * x;
        Eigen::JacobiSVD<Mat> svd(g);
        const auto sv = svd.singularValues();
        if (sv(N - 1) < 0.2 * sv(0)) continue;
      }
      Mat d = zero_mat(N);
      for (int j = 0; j < N; ++j) d(j, j) = m.lambda(a) * double(N - 1 - 2 * j) / double(N - 1);
      s.push_back(g * d * g.inverse());
      break;
    }
  }
  return s;
}

/// Random traceless state without the orbit constraint.
template <class Rng>
SpinState random_state(const GaudinModel& m, Rng& rng, double scale = 0.5) {
  std::normal_distribution<double> nd(0.0, 1.0);
  SpinState s;
  const int N = m.N();
  for (int a = 0; a < m.n(); ++a) {
    Mat x(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) x(i, j) = scale * cplx(nd(rng), nd(rng));
    x -= (x.trace() / double(N)) * Mat::Identity(N, N);
    s.push_back(x);
  }
  return s;
}

}  // namespace gaudin
