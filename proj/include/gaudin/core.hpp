#pragma once
// Shared scalar/matrix types and the error hierarchy.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaudin {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Largest supported N. Matrices carry a fixed upper bound so small products
/// never touch the heap.
inline constexpr int max_rank = 8;

using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          max_rank, max_rank>;

inline Mat zero_mat(int n) { return Mat::Zero(n, n); }
inline Mat comm(const Mat& a, const Mat& b) { return a * b - b * a; }
inline cplx tr(const Mat& a) { return a.trace(); }
inline cplx tr(const Mat& a, const Mat& b) { return (a * b).trace(); }
inline double fnorm(const Mat& a) { return a.norm(); }

/// e_N(x) = exp(2 pi i x / N).
inline cplx e_n(double x, int n) { return std::exp(2.0 * pi * I * x / double(n)); }

enum class ErrorKind {
  convergence,
  pole,
  numerical,
  config,
  unsupported,
  blow_up,
  gauge_singularity,
  size_mismatch,
  domain,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::pole: return "pole";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::config: return "config";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::blow_up: return "blow_up";
    case ErrorKind::gauge_singularity: return "gauge_singularity";
    case ErrorKind::size_mismatch: return "size_mismatch";
    case ErrorKind::domain: return "domain";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when evolution produces non-finite values; carries the last good time.
class BlowUp : public Error {
 public:
  BlowUp(double last_good_time, const std::string& what)
      : Error(ErrorKind::blow_up, what), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }
inline bool finite(const Mat& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!finite(m.data()[i])) return false;
  return true;
}

}  // namespace gaudin
