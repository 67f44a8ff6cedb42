#pragma once
// sl(N) sin-algebra: clock/shift basis T_a, structure constants, Killing form,
// coefficient decomposition, the section functions phi_g, f_g, F_g and the
// diagonal "hat" operators acting on coefficients. Pauli helpers for N = 2.

#include "gaudin/core.hpp"
#include "gaudin/efun.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <map>

namespace gaudin {

/// Lattice label (a1, a2). Stored as given; reduce() maps to {0..N-1}^2.
struct Index {
  int a1 = 0;
  int a2 = 0;
  friend bool operator==(const Index&, const Index&) = default;
};

inline int mod(int a, int n) { return ((a % n) + n) % n; }
inline Index reduce(Index a, int n) { return {mod(a.a1, n), mod(a.a2, n)}; }
inline Index operator+(Index a, Index b) { return {a.a1 + b.a1, a.a2 + b.a2}; }
inline Index operator-(Index a) { return {-a.a1, -a.a2}; }
inline int cross(Index a, Index b) { return a.a1 * b.a2 - a.a2 * b.a1; }
inline int flat(Index a, int n) { a = reduce(a, n); return a.a1 * n + a.a2; }

/// Q = diag(e_N(1), ..., e_N(N)).
inline Mat clock_matrix(int n) {
  Mat q = zero_mat(n);
  for (int m = 0; m < n; ++m) q(m, m) = e_n(m + 1, n);
  return q;
}

/// Lambda: ones on the superdiagonal and in the bottom-left corner.
inline Mat shift_matrix(int n) {
  Mat l = zero_mat(n);
  for (int i = 0; i < n; ++i) l(i, (i + 1) % n) = 1.0;
  return l;
}

/// T_a = e_N(a1 a2 / 2) Q^{a1} Lambda^{a2}; accepts unreduced labels.
inline Mat basis_matrix(Index a, int n) {
  if (n < 2 || n > max_rank) throw Error(ErrorKind::domain, "N out of range");
  // Q^{a1} Lambda^{a2} has entry (i, i + a2) = e_N(a1 (i + 1)).
  Mat t = zero_mat(n);
  const cplx ph = e_n(0.5 * double(a.a1) * double(a.a2), n);
  for (int i = 0; i < n; ++i) t(i, mod(i + a.a2, n)) = ph * e_n(double(mod(a.a1, n)) * (i + 1), n);
  return t;
}

/// Sign s with T_a = s T_{reduce(a)}.
inline double reduction_sign(Index a, int n) {
  const Index r = reduce(a, n);
  const long k1 = (a.a1 - r.a1) / n, k2 = (a.a2 - r.a2) / n;
  const long e = long(r.a1) * k2 + long(r.a2) * k1 + long(n) * k1 * k2;
  return (e % 2 == 0) ? 1.0 : -1.0;
}

/// c_{a,b} with [T_a, T_b] = c_{a,b} T_{a+b} (unreduced sum).
/// Follows from T_a T_b = e_N(-(a x b)/2) T_{a+b}: c = -2i sin(pi (a x b) / N).
inline cplx structure_constant(Index a, Index b, int n) {
  return -2.0 * I * std::sin(pi * double(cross(a, b)) / double(n));
}

/// Coefficient against the reduced representative: [T_a, T_b] = k T_{reduce(a+b)}.
inline cplx bracket_coefficient(Index a, Index b, int n) {
  return structure_constant(a, b, n) * reduction_sign(a + b, n);
}

inline cplx killing(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw Error(ErrorKind::size_mismatch, "killing form needs equal square sizes");
  return (a * b).trace();
}

/// Precomputed basis for one N. Immutable after construction.
class Algebra {
 public:
  explicit Algebra(int n) : n_(n) {
    if (n < 2 || n > max_rank) throw Error(ErrorKind::domain, "N out of range");
    t_.resize(n * n);
    tinv_.resize(n * n);
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = 0; a2 < n; ++a2) {
        const Index a{a1, a2};
        t_[flat(a, n)] = basis_matrix(a, n);
        tinv_[flat(a, n)] = t_[flat(a, n)].adjoint();  // unitary
        if (a1 || a2) labels_.push_back(a);
      }
  }
  int n() const { return n_; }
  const std::vector<Index>& labels() const { return labels_; }
  const Mat& t(Index a) const { return t_[flat(a, n_)]; }
  const Mat& tinv(Index a) const { return tinv_[flat(a, n_)]; }

  /// Shared instance per N.
  static const Algebra& get(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Algebra>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& p = cache[n];
    if (!p) p = std::make_unique<Algebra>(n);
    return *p;
  }

 private:
  int n_;
  std::vector<Mat> t_, tinv_;
  std::vector<Index> labels_;
};

/// Coefficients S_a of A = sum_a S_a T_a over reduced a != 0; slot 0 unused.
struct SpinCoeffs {
  int n = 2;
  std::vector<cplx> c;
  explicit SpinCoeffs(int n_ = 2) : n(n_), c(std::size_t(n_ * n_), cplx(0)) {}
  cplx& operator[](Index a) { return c[flat(a, n)]; }
  cplx operator[](Index a) const { return c[flat(a, n)]; }
};

inline SpinCoeffs decompose(const Mat& a) {
  const int n = int(a.rows());
  if (a.cols() != n) throw Error(ErrorKind::size_mismatch, "decompose needs a square matrix");
  if (std::abs(a.trace()) > 1e-12 * std::max(1.0, a.norm()))
    throw Error(ErrorKind::domain, "decompose needs a traceless matrix");
  const Algebra& alg = Algebra::get(n);
  SpinCoeffs s(n);
  for (const Index& l : alg.labels()) s[l] = a.cwiseProduct(alg.t(l).conjugate()).sum() / double(n);
  return s;
}

inline Mat reconstruct(const SpinCoeffs& s) {
  const Algebra& alg = Algebra::get(s.n);
  Mat a = zero_mat(s.n);
  for (const Index& l : alg.labels()) a += s[l] * alg.t(l);
  return a;
}

/// A diagonal operator on coefficients: S_a -> m(a) S_a. m is indexed by the
/// flattened reduced label; slot 0 is ignored.
struct Hat {
  int n = 2;
  std::vector<cplx> m;
  explicit Hat(int n_ = 2, cplx fill = 0) : n(n_), m(std::size_t(n_ * n_), fill) {}
  cplx operator[](Index a) const { return m[flat(a, n)]; }
  cplx& operator[](Index a) { return m[flat(a, n)]; }

  Mat apply(const Mat& a) const {
    const Algebra& alg = Algebra::get(n);
    Mat out = zero_mat(n);
    for (const Index& l : alg.labels()) {
      // Tr(A T^{-1}) with T unitary is the entrywise pairing with conj(T).
      const cplx s = a.cwiseProduct(alg.t(l).conjugate()).sum() / double(n);
      out += (m[flat(l, n)] * s) * alg.t(l);
    }
    return out;
  }
  Mat operator()(const Mat& a) const { return apply(a); }

  /// Adjoint under the trace pairing: <X K(Y)> = <K^T(X) Y>, i.e. m^T(a) = m(-a).
  Hat transpose() const {
    Hat h(n);
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = 0; a2 < n; ++a2) h[Index{a1, a2}] = (*this)[Index{-a1, -a2}];
    return h;
  }
  static Hat scalar(int n, cplx v) { return Hat(n, v); }
};

inline Hat operator*(cplx s, Hat h) {
  for (auto& v : h.m) v *= s;
  return h;
}
inline Hat operator+(Hat a, const Hat& b) {
  for (std::size_t i = 0; i < a.m.size(); ++i) a.m[i] += b.m[i];
  return a;
}

/// omega_g = (g1 + g2 tau) / N for the reduced label.
inline cplx half_period(Index g, int n, const EllipticContext& ctx) {
  g = reduce(g, n);
  if (g.a1 == 0 && g.a2 == 0) throw Error(ErrorKind::domain, "omega_0 is undefined");
  return (double(g.a1) + double(g.a2) * ctx.tau()) / double(n);
}

enum class SectionKind { vf, f, F };

/// phi_g(z) = e_N(g2 z) phi(omega_g, z); f_g; F_g = phi_g (E1(z) + E1(w) - E1(w + z)).
inline cplx section_function(SectionKind kind, Index g, int n, cplx z, const EllipticContext& ctx) {
  g = reduce(g, n);
  const cplx w = half_period(g, n, ctx);
  const cplx v = std::exp(2.0 * pi * I * double(g.a2) * z / double(n)) * phi(w, z, ctx);
  switch (kind) {
    case SectionKind::vf: return v;
    case SectionKind::f: return v * (E1(w + z, ctx) - E1(w, ctx));
    case SectionKind::F: return v * (E1(z, ctx) + E1(w, ctx) - E1(w + z, ctx));
  }
  return 0;
}

/// Multiplier table of a section function at fixed argument.
inline Hat section_hat(SectionKind kind, int n, cplx z, const EllipticContext& ctx) {
  Hat h(n);
  for (const Index& l : Algebra::get(n).labels()) h[l] = section_function(kind, l, n, z, ctx);
  return h;
}

/// S_a -> S_a wp(omega_a).
inline Hat wp_hat(int n, const EllipticContext& ctx, cplx eta) {
  Hat h(n);
  for (const Index& l : Algebra::get(n).labels())
    h[l] = weierstrass(WeierstrassKind::p, half_period(l, n, ctx), ctx, eta);
  return h;
}

/// S_a -> S_a E1(omega_a).
inline Hat e1_hat(int n, const EllipticContext& ctx) {
  Hat h(n);
  for (const Index& l : Algebra::get(n).labels()) h[l] = E1(half_period(l, n, ctx), ctx);
  return h;
}

/// S_a -> S_a (E1(omega_a) + 2 pi i a2 / N): the constant term of phi_a at z = 0.
inline Hat laurent_constant_hat(int n, const EllipticContext& ctx) {
  Hat h(n);
  for (const Index& l : Algebra::get(n).labels())
    h[l] = E1(half_period(l, n, ctx), ctx) + 2.0 * pi * I * double(l.a2) / double(n);
  return h;
}

enum class HatKind { phi_ab, f_ab, F_ab, wp, E1 };

/// Coefficient-level application of the hat operators.
inline SpinCoeffs apply_hat(HatKind kind, const SpinCoeffs& s, cplx a_point, cplx b_point,
                            const EllipticContext& ctx) {
  Hat h(s.n);
  switch (kind) {
    case HatKind::phi_ab:
    case HatKind::f_ab:
    case HatKind::F_ab: {
      if (std::abs(a_point - b_point) <= 1e-12)
        throw Error(ErrorKind::domain, "coincident marked points");
      const SectionKind sk = kind == HatKind::phi_ab ? SectionKind::vf
                             : kind == HatKind::f_ab ? SectionKind::f
                                                     : SectionKind::F;
      h = section_hat(sk, s.n, a_point - b_point, ctx);
      break;
    }
    case HatKind::wp: h = wp_hat(s.n, ctx, eta1(ctx)); break;
    case HatKind::E1: h = e1_hat(s.n, ctx); break;
  }
  SpinCoeffs out(s.n);
  for (const Index& l : Algebra::get(s.n).labels()) out[l] = h[l] * s[l];
  return out;
}

// ---- sl(2) helpers -------------------------------------------------------

/// sigma_1 = T(0,1), sigma_2 = T(1,1), sigma_3 = -T(1,0).
inline Mat pauli(int k) {
  switch (k) {
    case 1: return basis_matrix({0, 1}, 2);
    case 2: return basis_matrix({1, 1}, 2);
    case 3: return -basis_matrix({1, 0}, 2);
    default: break;
  }
  throw Error(ErrorKind::domain, "pauli index must be 1..3");
}

/// Label of sigma_k in the T basis and the sign relating them.
inline Index pauli_label(int k) {
  static const Index l[4] = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  return l[k];
}

inline std::array<cplx, 3> pauli_coeffs(const Mat& a) {
  std::array<cplx, 3> c{};
  for (int k = 1; k <= 3; ++k) c[k - 1] = (a * pauli(k)).trace() / 2.0;
  return c;
}

inline Mat from_pauli(const std::array<cplx, 3>& c) {
  Mat a = zero_mat(2);
  for (int k = 1; k <= 3; ++k) a += c[k - 1] * pauli(k);
  return a;
}

/// Half-periods in table order: labels (1,0), (0,1), (1,1) with
/// omega = 1/2, tau/2, (1+tau)/2, and the constants attached to them.
struct Sl2Tables {
  std::array<Index, 3> label{Index{1, 0}, Index{0, 1}, Index{1, 1}};
  std::array<cplx, 3> omega{};
  std::array<cplx, 3> e1{};
  std::array<cplx, 3> wp{};
};

inline Sl2Tables sl2_tables(const EllipticContext& ctx) {
  Sl2Tables t;
  const cplx eta = eta1(ctx);
  for (int i = 0; i < 3; ++i) {
    t.omega[i] = half_period(t.label[i], 2, ctx);
    t.e1[i] = E1(t.omega[i], ctx);
    t.wp[i] = weierstrass(WeierstrassKind::p, t.omega[i], ctx, eta);
  }
  return t;
}

}  // namespace gaudin
