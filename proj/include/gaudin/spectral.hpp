#pragma once
// Fourier helpers on the circle [0, 2 pi): mode arrays c_m, |m| <= M, stored at
// index m + M, with f(x) = sum_m c_m e^{i m x}.

#include "gaudin/core.hpp"

#include <unsupported/Eigen/FFT>

namespace gaudin {

inline bool is_pow2(int g) { return g > 0 && (g & (g - 1)) == 0; }
inline int next_pow2(int g) {
  int p = 1;
  while (p < g) p <<= 1;
  return p;
}

/// Padded grid size for cubic products of fields with |m| <= M.
inline int dealiased_size(int modes_m) { return next_pow2(3 * (2 * modes_m + 1)); }

inline double grid_point(int j, int g) { return 2.0 * pi * double(j) / double(g); }

using Modes = std::vector<cplx>;

/// Samples of f, f_x, f_xx on a g-point grid.
struct Samples3 {
  std::vector<cplx> f, fx, fxx;
};

class Spectral {
 public:
  /// Grid values -> modes |m| <= M (requires g >= 2M + 1).
  Modes analyze(const std::vector<cplx>& values, int modes_m) {
    const int g = int(values.size());
    if (g < 2 * modes_m + 1) throw Error(ErrorKind::config, "grid too coarse for the mode count");
    std::vector<cplx> out;
    fft_.fwd(out, values);
    Modes c(2 * modes_m + 1);
    for (int m = -modes_m; m <= modes_m; ++m) c[m + modes_m] = out[std::size_t((m % g + g) % g)] / double(g);
    // A Nyquist bin at m = +-g/2 would be split; callers keep g > 2M.
    return c;
  }

  /// Modes -> f, f_x, f_xx on a g-point grid.
  Samples3 synthesize(const Modes& c, int g, bool derivatives = true) {
    const int mm = (int(c.size()) - 1) / 2;
    if (g < 2 * mm + 1) throw Error(ErrorKind::config, "grid too coarse for the mode count");
    Samples3 s;
    std::vector<cplx> a(g, cplx(0));
    for (int m = -mm; m <= mm; ++m) a[std::size_t((m % g + g) % g)] = c[m + mm] * double(g);
    fft_.inv(s.f, a);
    if (!derivatives) return s;
    std::vector<cplx> b(g, cplx(0)), d(g, cplx(0));
    for (int m = -mm; m <= mm; ++m) {
      const std::size_t i = std::size_t((m % g + g) % g);
      b[i] = a[i] * (I * double(m));
      d[i] = a[i] * (-double(m) * double(m));
    }
    fft_.inv(s.fx, b);
    fft_.inv(s.fxx, d);
    return s;
  }

  /// Spectral derivative of periodic grid samples (order 1 or 2).
  std::vector<cplx> derivative(const std::vector<cplx>& values, int order = 1) {
    const int g = int(values.size());
    std::vector<cplx> hat;
    fft_.fwd(hat, values);
    for (int i = 0; i < g; ++i) {
      int m = i <= g / 2 ? i : i - g;
      if (g % 2 == 0 && i == g / 2) m = 0;  // drop the unpaired Nyquist bin
      hat[i] *= std::pow(I * double(m), order);
    }
    std::vector<cplx> out;
    fft_.inv(out, hat);
    return out;
  }

 private:
  Eigen::FFT<double> fft_;
};

/// Direct evaluation of a mode array and its first two derivatives at x.
inline std::array<cplx, 3> eval_modes(const Modes& c, double x) {
  const int mm = (int(c.size()) - 1) / 2;
  std::array<cplx, 3> r{};
  for (int m = -mm; m <= mm; ++m) {
    const cplx e = c[m + mm] * std::exp(I * (double(m) * x));
    r[0] += e;
    r[1] += (I * double(m)) * e;
    r[2] += -double(m) * double(m) * e;
  }
  return r;
}

/// Trapezoid quadrature over one period.
inline cplx periodic_integral(const std::vector<cplx>& values) {
  cplx s = 0;
  for (const cplx& v : values) s += v;
  return s * (2.0 * pi / double(values.size()));
}

}  // namespace gaudin
