#pragma once

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "chebqr/cheb_series.hpp"

namespace chebqr {

/// Chebyshev points of the second kind, x_j = cos(j*pi/n), j = 0..n,
/// in descending order.  Symmetry x_j = -x_{n-j} holds exactly: the
/// second half is mirrored rather than recomputed.
struct ChebGrid {
  int n = 0;
  std::vector<double> points;
};

inline ChebGrid cheb_points(int n) {
  if (n < 0) throw std::invalid_argument("cheb_points: negative n");
  ChebGrid g;
  g.n = n;
  g.points.assign(n + 1, 0.0);
  if (n == 0) {
    g.points[0] = 1.0;
    return g;
  }
  g.points[0] = 1.0;
  g.points[n] = -1.0;
  for (int j = 1; j <= n / 2; ++j) {
    const double x = std::cos(j * M_PI / n);
    g.points[j] = x;
    g.points[n - j] = -x;
  }
  if (n % 2 == 0) g.points[n / 2] = 0.0;
  return g;
}

namespace detail {

// Direct O(n^2) evaluation of the interpolation coefficients:
//   c_k = (2 - [k==0] - [k==n]) / (2n) * (v_0 + (-1)^k v_n
//         + 2 sum_{j=1}^{n-1} v_j cos(pi j k / n)).
// Retained permanently as the oracle for the DCT path.
template <class S>
std::vector<S> dct1_direct(const std::vector<S>& v) {
  const int n = static_cast<int>(v.size()) - 1;
  std::vector<S> c(n + 1);
  if (n == 0) {
    c[0] = v[0];
    return c;
  }
  for (int k = 0; k <= n; ++k) {
    S acc = v[0] + (k % 2 == 0 ? v[n] : -v[n]);
    for (int j = 1; j < n; ++j) acc += 2.0 * std::cos(M_PI * j * k / n) * v[j];
    const double w = (k == 0 || k == n) ? 1.0 / (2.0 * n) : 1.0 / n;
    c[k] = acc * w;
  }
  return c;
}

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// DCT-I of length n+1 through FFTW's REDFT00, same normalization as above.
inline void dct1_fftw(const double* in, double* out, int n) {
  std::vector<double> buf(in, in + n + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_r2r_1d(n + 1, buf.data(), out, FFTW_REDFT00, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  const double wk = 1.0 / n, we = 1.0 / (2.0 * n);
  for (int k = 0; k <= n; ++k) out[k] *= (k == 0 || k == n) ? we : wk;
}

}  // namespace detail

/// Interpolation coefficients from values sampled on cheb_points(n).
/// Uses the FFT-based DCT-I; falls back to the direct summation for
/// tiny grids (or when `force_direct` is set, which keeps the oracle
/// reachable from tests).
template <class S>
ChebSeries<S> values_to_coeffs(const std::vector<S>& values, bool force_direct = false) {
  if (values.empty()) throw std::invalid_argument("values_to_coeffs: empty input");
  for (const auto& x : values)
    if (!finite_(x)) throw std::invalid_argument("values_to_coeffs: non-finite value");
  const int n = static_cast<int>(values.size()) - 1;
  if (force_direct || n < 8) return ChebSeries<S>(detail::dct1_direct(values));

  if constexpr (is_complex_v<S>) {
    std::vector<double> re(n + 1), im(n + 1), cre(n + 1), cim(n + 1);
    for (int j = 0; j <= n; ++j) {
      re[j] = values[j].real();
      im[j] = values[j].imag();
    }
    detail::dct1_fftw(re.data(), cre.data(), n);
    detail::dct1_fftw(im.data(), cim.data(), n);
    std::vector<S> c(n + 1);
    for (int k = 0; k <= n; ++k) c[k] = S(cre[k], cim[k]);
    return ChebSeries<S>(std::move(c));
  } else {
    std::vector<double> c(n + 1);
    detail::dct1_fftw(values.data(), c.data(), n);
    return ChebSeries<S>(std::move(c));
  }
}

/// Thrown when the adaptive interpolation exhausts the degree budget;
/// carries the best series seen so that callers can inspect it.
struct interpolation_error : std::runtime_error {
  RealSeries best;
  interpolation_error(const std::string& msg, RealSeries b)
      : std::runtime_error(msg), best(std::move(b)) {}
};

/// Lower bound on the usable plateau threshold.  Function evaluation
/// noise (argument-scaled rounding in oscillatory integrands) keeps
/// trailing coefficients near 1e-13 * max|c| no matter how far the grid
/// is refined, so tolerances below this floor would never converge.
inline constexpr double kPlateauFloor = 2048.0 * std::numeric_limits<double>::epsilon();

/// Adaptive Chebyshev interpolation on [-1,1].  Doubles the grid through
/// 16, 32, ..., 2^16 until the trailing max(3, n/8) coefficients all fall
/// below max(tol, floor) * max|c|, then trims trailing negligible
/// coefficients.
template <class F>
RealSeries adapt_interpolate(F&& f, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("adapt_interpolate: tol out of range");
  const double eff_tol = std::max(tol, kPlateauFloor);
  constexpr int kMaxN = 1 << 16;

  RealSeries best;
  double best_tail = std::numeric_limits<double>::infinity();
  for (int n = 16; n <= kMaxN; n *= 2) {
    const ChebGrid grid = cheb_points(n);
    std::vector<double> v(n + 1);
    for (int j = 0; j <= n; ++j) {
      v[j] = f(grid.points[j]);
      if (!std::isfinite(v[j]))
        throw std::domain_error("adapt_interpolate: non-finite value at x = " +
                                std::to_string(grid.points[j]));
    }
    RealSeries c = values_to_coeffs(v);
    const double mx = c.max_abs();
    if (mx == 0.0) return RealSeries(std::vector<double>{0.0});

    const int m = std::max(3, n / 8);
    double tail = 0.0;
    for (int k = n - m + 1; k <= n; ++k) tail = std::max(tail, std::abs(c.coeffs[k]));
    if (tail <= eff_tol * mx) return trim(c, eff_tol);
    if (tail / mx < best_tail) {
      best_tail = tail / mx;
      best = c;
    }
  }
  throw interpolation_error("adapt_interpolate: no coefficient plateau up to degree 65536",
                            std::move(best));
}

}  // namespace chebqr
