#pragma once
// Theta function, Eisenstein functions E_j, eta_1, Weierstrass zeta/p, and
// the Kronecker function phi(u,z) with its u-derivative f(u,z).
//
// Conventions: q = exp(2 pi i tau), lattice Z + tau Z, theta odd with
// theta(z+1) = -theta(z).

#include "gaudin/core.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace gaudin {

enum class ThetaForm { sum, product };

class EllipticContext {
 public:
  /// series_tol: relative truncation; pole_radius: exclusion distance from the
  /// lattice; im_floor: smallest admissible Im tau.
  explicit EllipticContext(cplx tau, double series_tol = 1e-16, int max_terms = 256,
                           double pole_radius = 1e-3, double im_floor = 0.2)
      : tau_(tau), series_tol_(series_tol), max_terms_(max_terms),
        pole_radius_(pole_radius), im_floor_(im_floor) {
    if (!(tau.imag() >= im_floor))
      throw Error(ErrorKind::domain, "Im tau below the configured floor");
    if (!(series_tol > 0) || max_terms < 1 || !(pole_radius > 0))
      throw Error(ErrorKind::config, "invalid series policy");
    q_ = std::exp(2.0 * pi * I * tau);
    dtheta0_ = compute_dtheta0();
  }

  cplx tau() const { return tau_; }
  cplx q() const { return q_; }
  double series_tol() const { return series_tol_; }
  int max_terms() const { return max_terms_; }
  double pole_radius() const { return pole_radius_; }
  double im_floor() const { return im_floor_; }
  /// theta'(0), from the differentiated sum form.
  cplx dtheta0() const { return dtheta0_; }

  /// Distance from z to the nearest lattice point m + n tau.
  double lattice_distance(cplx z) const {
    const double nr = std::round(z.imag() / tau_.imag());
    double best = std::numeric_limits<double>::infinity();
    for (double n = nr - 1; n <= nr + 1; n += 1) {
      const cplx w = z - n * tau_;
      const double mr = std::round(w.real());
      for (double m = mr - 1; m <= mr + 1; m += 1) best = std::min(best, std::abs(w - m));
    }
    return best;
  }

  void check_pole(cplx z, const char* what) const {
    if (lattice_distance(z) <= pole_radius_)
      throw Error(ErrorKind::pole, std::string(what) + " argument within exclusion radius of the lattice");
  }

 private:
  cplx compute_dtheta0() const {
    cplx s = 0;
    for (int n = 0; n < max_terms_; ++n) {
      const double h = n + 0.5;
      const double env = std::exp(-pi * tau_.imag() * h * h) * (2 * n + 1) * pi;
      const cplx t = ((n % 2) ? -1.0 : 1.0) * std::exp(I * pi * tau_ * h * h) * double(2 * n + 1) * pi;
      s += t;
      if (env <= series_tol_ * std::abs(s)) return 2.0 * std::exp(I * pi / 4.0) * s;
    }
    throw Error(ErrorKind::convergence, "theta'(0) series hit max_terms");
  }

  cplx tau_;
  cplx q_;
  double series_tol_;
  int max_terms_;
  double pole_radius_;
  double im_floor_;
  cplx dtheta0_;
};

namespace detail {

/// Envelope-based stop rule shared by the q-series: stop once an upper bound of
/// the next term is below tol * |partial sum| (or underflows).
inline bool negligible(double bound, cplx partial, double tol) {
  return bound <= tol * std::abs(partial) || bound < 1e-300;
}

/// Li_{-p}(x) = x A_p(x) / (1-x)^{p+1} with A_p the Eulerian polynomial.
inline cplx polylog_neg(int p, cplx x) {
  // Eulerian polynomial coefficients via A_{p+1} = (1 + p x) A_p + x (1 - x) A_p'.
  std::array<double, 32> a{};
  a[0] = 1.0;
  for (int k = 0; k < p; ++k) {
    std::array<double, 32> b{};
    for (int i = 0; i <= k; ++i) {
      b[i] += a[i];                       // 1 * A
      b[i + 1] += k * a[i];               // k x A
      if (i >= 1) {
        b[i] += i * a[i];                 // x A'  (x * i a_i x^{i-1})
        b[i + 1] -= i * a[i];             // -x^2 A'
      }
    }
    a = b;
  }
  cplx poly = 0;
  for (int i = p; i >= 0; --i) poly = poly * x + a[i];
  return x * poly / std::pow(1.0 - x, p + 1);
}

/// r-th z-derivative of pi^2/sin^2(pi z), via polynomials in c = cot(pi z):
/// D_0 = 1 + c^2, D_{r+1} = -(1 + c^2) D_r'(c), result pi^{2+r} D_r(c).
inline cplx csc2_derivative(int r, cplx z) {
  std::array<double, 40> d{};
  d[0] = 1.0;
  d[2] = 1.0;
  int deg = 2;
  for (int k = 0; k < r; ++k) {
    std::array<double, 40> dp{};
    for (int i = 1; i <= deg; ++i) dp[i - 1] = i * d[i];
    std::array<double, 40> nd{};
    for (int i = 0; i < deg; ++i) {
      nd[i] -= dp[i];
      nd[i + 2] -= dp[i];
    }
    d = nd;
    deg += 1;
  }
  const cplx c = std::cos(pi * z) / std::sin(pi * z);
  cplx poly = 0;
  for (int i = deg; i >= 0; --i) poly = poly * c + d[i];
  return std::pow(pi, 2 + r) * poly;
}

}  // namespace detail

/// theta(z|tau) from either the sum or the product representation.
inline cplx theta(cplx z, const EllipticContext& ctx, ThetaForm form = ThetaForm::sum) {
  const cplx tau = ctx.tau();
  const double tol = ctx.series_tol();
  if (form == ThetaForm::sum) {
    cplx s = 0;
    const double grow = std::abs(z.imag()) * pi;
    for (int n = 0; n < ctx.max_terms(); ++n) {
      const double h = n + 0.5;
      const cplx t = ((n % 2) ? -1.0 : 1.0) * std::exp(I * pi * tau * h * h) * std::sin(double(2 * n + 1) * pi * z);
      s += t;
      const double env = std::exp(-pi * tau.imag() * h * h + (2 * n + 1) * grow);
      if (n > 0 && detail::negligible(env, s, tol)) return 2.0 * std::exp(I * pi / 4.0) * s;
    }
    throw Error(ErrorKind::convergence, "theta sum form hit max_terms");
  }
  const cplx q = ctx.q();
  const cplx w = std::exp(2.0 * pi * I * z);
  const double wm = std::max(std::abs(w), 1.0 / std::abs(w));
  cplx p = std::exp(I * pi * tau / 4.0) * std::exp(-I * pi / 4.0) *
           (std::exp(I * pi * z) - std::exp(-I * pi * z));
  cplx qn = 1.0;
  for (int n = 1; n < ctx.max_terms(); ++n) {
    qn *= q;
    p *= (1.0 - qn) * (1.0 - qn * w) * (1.0 - qn / w);
    if (std::abs(qn) * wm <= tol) return p;
  }
  throw Error(ErrorKind::convergence, "theta product form hit max_terms");
}

/// Theta with rational characteristics: sum_j e((j+a)^2 tau/2 + (j+a)(z+b)).
inline cplx theta_char(double a, double b, cplx z, const EllipticContext& ctx) {
  const cplx tau = ctx.tau();
  cplx s = std::exp(2.0 * pi * I * (a * a * tau / 2.0 + a * (z + b)));
  for (int j = 1; j < ctx.max_terms(); ++j) {
    double bound = 0;
    for (int sg : {1, -1}) {
      const double m = sg * j + a;
      s += std::exp(2.0 * pi * I * (m * m * tau / 2.0 + m * (z + b)));
      bound = std::max(bound, std::exp(-pi * tau.imag() * m * m - 2 * pi * m * z.imag()));
    }
    if (detail::negligible(bound, s, ctx.series_tol())) return s;
  }
  throw Error(ErrorKind::convergence, "theta with characteristics hit max_terms");
}

/// E_j(z|tau), j >= 1, as exact term-wise derivatives of the log-theta series.
inline cplx eisenstein(int j, cplx z, const EllipticContext& ctx) {
  if (j < 1 || j > 20) throw Error(ErrorKind::domain, "Eisenstein order must be in 1..20");
  ctx.check_pole(z, "eisenstein");
  const cplx q = ctx.q();
  const cplx w = std::exp(2.0 * pi * I * z);
  const double wm = std::max(std::abs(w), 1.0 / std::abs(w));
  const double tol = ctx.series_tol();
  const cplx tpi = 2.0 * pi * I;
  cplx s;
  cplx qn = 1.0;
  if (j == 1) {
    s = pi * std::cos(pi * z) / std::sin(pi * z);
    for (int n = 1; n < ctx.max_terms(); ++n) {
      qn *= q;
      const cplx xm = qn / w, xp = qn * w;
      const cplx t = tpi * (xm / (1.0 - xm) - xp / (1.0 - xp));
      s += t;
      const double b = std::abs(qn) * wm;
      if (b < 0.5 && detail::negligible(std::abs(t), s, tol)) return s;
    }
    throw Error(ErrorKind::convergence, "E1 series hit max_terms");
  }
  // E_j = (-1)^j/(j-1)! d^{j-2} E2, and E2 = pi^2/sin^2 - 4 pi^2 sum Li_{-1}(x_-) + Li_{-1}(x_+).
  const int r = j - 2;
  s = detail::csc2_derivative(r, z);
  const cplx dm = std::pow(-tpi, r), dp = std::pow(tpi, r);
  for (int n = 1; n < ctx.max_terms(); ++n) {
    qn *= q;
    const cplx xm = qn / w, xp = qn * w;
    const cplx t = -4.0 * pi * pi * (dm * detail::polylog_neg(1 + r, xm) + dp * detail::polylog_neg(1 + r, xp));
    s += t;
    const double b = std::abs(qn) * wm;
    if (b < 0.5 && detail::negligible(std::abs(t), s, tol)) {
      double fact = 1;
      for (int i = 2; i <= j - 1; ++i) fact *= i;
      return ((j % 2) ? -1.0 : 1.0) / fact * s;
    }
  }
  throw Error(ErrorKind::convergence, "E_j series hit max_terms");
}

inline cplx E1(cplx z, const EllipticContext& ctx) { return eisenstein(1, z, ctx); }
inline cplx E2(cplx z, const EllipticContext& ctx) { return eisenstein(2, z, ctx); }

/// eta_1(tau) from the small-z expansion E1(z) = 1/z - 2 eta_1 z + O(z^3):
/// Richardson extrapolation of g(h) = (1/h - E1(h)) / (2h) in powers of h^2.
inline cplx eta1(const EllipticContext& ctx) {
  constexpr int levels = 6;
  std::array<std::array<cplx, levels>, levels> r{};
  double h = 0.2;
  for (int k = 0; k < levels; ++k, h *= 0.5) r[k][0] = (1.0 / h - E1(h, ctx)) / (2.0 * h);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (int m = 1; m < levels; ++m) {
    const double f = std::pow(4.0, m);
    for (int k = m; k < levels; ++k) r[k][m] = (f * r[k][m - 1] - r[k - 1][m - 1]) / (f - 1.0);
    const double gap = std::abs(r[m][m] - r[m - 1][m - 1]);
    // Once at roundoff level, further columns only shuffle noise.
    if (gap > prev_gap && prev_gap > 1e-11 * std::abs(r[m][m]))
      throw Error(ErrorKind::numerical, "eta1 extrapolation residuals are not decreasing");
    prev_gap = gap;
  }
  return r[levels - 1][levels - 1];
}

enum class WeierstrassKind { zeta, p };

inline cplx weierstrass(WeierstrassKind kind, cplx z, const EllipticContext& ctx, cplx eta = cplx(NAN, 0)) {
  if (std::isnan(eta.real())) eta = eta1(ctx);
  if (kind == WeierstrassKind::zeta) return E1(z, ctx) + 2.0 * eta * z;
  return E2(z, ctx) - 2.0 * eta;
}

/// phi(u,z) = theta(u+z) theta'(0) / (theta(u) theta(z)).
inline cplx phi(cplx u, cplx z, const EllipticContext& ctx) {
  ctx.check_pole(u, "phi(u,.)");
  ctx.check_pole(z, "phi(.,z)");
  return theta(u + z, ctx) * ctx.dtheta0() / (theta(u, ctx) * theta(z, ctx));
}

/// f(u,z) = d/du phi(u,z) = phi(u,z) (E1(u+z) - E1(u)).
inline cplx f_fn(cplx u, cplx z, const EllipticContext& ctx) {
  ctx.check_pole(u + z, "f(u+z)");
  return phi(u, z, ctx) * (E1(u + z, ctx) - E1(u, ctx));
}

enum class PhiKind { phi, f };

inline cplx phi_family(PhiKind kind, cplx u, cplx z, const EllipticContext& ctx) {
  return kind == PhiKind::phi ? phi(u, z, ctx) : f_fn(u, z, ctx);
}

}  // namespace gaudin
