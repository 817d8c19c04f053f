#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "chebqr/scalar.hpp"

namespace chebqr {

/// A polynomial in the Chebyshev basis: coeffs[k] multiplies T_k(x).
/// A series with `monic` set has been normalized so the leading
/// coefficient is exactly one; trimming never drops that coefficient.
template <class S>
struct ChebSeries {
  std::vector<S> coeffs;
  bool monic = false;

  ChebSeries() = default;
  explicit ChebSeries(std::vector<S> c, bool m = false) : coeffs(std::move(c)), monic(m) {
    if (coeffs.empty()) throw std::invalid_argument("ChebSeries: empty coefficient vector");
  }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs) m = std::max(m, std::abs(c));
    return m;
  }

  double norm2() const {
    double s = 0.0;
    for (const auto& c : coeffs) s += abs2(c);
    return std::sqrt(s);
  }
};

using RealSeries = ChebSeries<double>;
using ComplexSeries = ChebSeries<cdouble>;

/// Drops trailing coefficients of magnitude <= tol * max|c|.
/// Keeps at least the constant term, and the leading term of a monic series.
template <class S>
ChebSeries<S> trim(const ChebSeries<S>& p, double tol) {
  if (p.monic) return p;
  const double thresh = tol * p.max_abs();
  int last = p.degree();
  while (last > 0 && std::abs(p.coeffs[last]) <= thresh) --last;
  ChebSeries<S> out;
  out.coeffs.assign(p.coeffs.begin(), p.coeffs.begin() + last + 1);
  return out;
}

/// Divides by the leading coefficient. Throws when it is negligible
/// relative to the rest of the series (the caller must trim first).
template <class S>
ChebSeries<S> normalize_monic(const ChebSeries<S>& p, double monic_tol = 0.0) {
  const S lead = p.coeffs.back();
  const double floor_tol =
      monic_tol > 0.0 ? monic_tol : 1e-300 * static_cast<double>(p.coeffs.size());
  if (std::abs(lead) <= floor_tol * std::max(1.0, p.max_abs()))
    throw std::domain_error("normalize_monic: leading coefficient underflow");
  ChebSeries<S> out = p;
  for (auto& c : out.coeffs) c /= lead;
  out.coeffs.back() = S(1);
  out.monic = true;
  return out;
}

/// Clenshaw backward recurrence for sum c_k T_k(x). Works for complex x
/// and/or complex coefficients.
template <class S, class X>
auto clenshaw_eval(const ChebSeries<S>& p, const X& x) {
  using R = decltype(S{} * X{});
  R b1{}, b2{};
  const X two_x = X(2) * x;
  for (int k = p.degree(); k >= 1; --k) {
    R b = R(p.coeffs[k]) + two_x * b1 - b2;
    b2 = b1;
    b1 = b;
  }
  return R(p.coeffs[0]) + x * b1 - b2;
}

namespace detail {

// In-place multiplication of a Chebyshev coefficient vector by (x - r),
// using x*T_0 = T_1 and x*T_k = (T_{k+1} + T_{k-1})/2.
template <class S>
void mul_linear(std::vector<S>& c, const S& r) {
  const std::size_t n = c.size();
  std::vector<S> out(n + 1, S(0));
  for (std::size_t j = 0; j < n; ++j) {
    const S& cj = c[j];
    if (j == 0) {
      out[1] += cj;
    } else {
      out[j + 1] += cj * 0.5;
      out[j - 1] += cj * 0.5;
    }
    out[j] -= r * cj;
  }
  c.swap(out);
}

// Multiplication by the real quadratic x^2 - s*x + t (s = 2 Re r, t = |r|^2).
template <class S>
void mul_quadratic(std::vector<S>& c, double s, double t) {
  std::vector<S> tmp = c;
  mul_linear(tmp, S(0));   // x * c
  mul_linear(tmp, S(0));   // x^2 * c
  std::vector<S> xc = c;
  mul_linear(xc, S(0));    // x * c
  std::vector<S> out(c.size() + 2, S(0));
  for (std::size_t j = 0; j < tmp.size(); ++j) out[j] += tmp[j];
  for (std::size_t j = 0; j < xc.size(); ++j) out[j] -= S(s) * xc[j];
  for (std::size_t j = 0; j < c.size(); ++j) out[j] += S(t) * c[j];
  c.swap(out);
}

inline void sort_complex(std::vector<cdouble>& v) {
  std::sort(v.begin(), v.end(), [](const cdouble& a, const cdouble& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

// True when the multiset of roots is closed under conjugation to within
// `tol` on the imaginary pairing; pairs up conjugates in place so that
// v[2i], v[2i+1] are partners and real roots come last.
inline bool pair_conjugates(std::vector<cdouble>& v, double tol) {
  std::vector<cdouble> complex_part, real_part;
  for (const auto& z : v) {
    if (z.imag() == 0.0)
      real_part.push_back(z);
    else
      complex_part.push_back(z);
  }
  sort_complex(complex_part);
  // sorted order puts z and conj(z) adjacently (same real part)
  if (complex_part.size() % 2 != 0) return false;
  std::vector<cdouble> paired;
  for (std::size_t i = 0; i < complex_part.size(); i += 2) {
    const cdouble a = complex_part[i], b = complex_part[i + 1];
    const double scale = std::max(1.0, std::abs(a));
    if (std::abs(a.real() - b.real()) > tol * scale ||
        std::abs(a.imag() + b.imag()) > tol * scale)
      return false;
    paired.push_back(a);
    paired.push_back(b);
  }
  v = paired;
  v.insert(v.end(), real_part.begin(), real_part.end());
  return true;
}

}  // namespace detail

/// Product series with a power-of-two scale factor split off, so that
/// degrees beyond ~1000 do not underflow (the monic product has leading
/// Chebyshev coefficient 2^(1-n)).  True coefficients = coeffs * 2^exponent.
struct ScaledComplexSeries {
  ComplexSeries series;
  long exponent = 0;
};

/// Chebyshev coefficients of the monic polynomial prod (x - y_j), with
/// renormalization bookkeeping.  When the root set is closed under
/// conjugation the product is accumulated with real quadratic factors and
/// the imaginary parts of the result are exactly zero.
inline ScaledComplexSeries roots_to_cheb_scaled(const std::vector<cdouble>& roots) {
  if (roots.empty()) throw std::invalid_argument("roots_to_cheb: need at least one root");
  for (const auto& r : roots)
    if (!finite_(r)) throw std::invalid_argument("roots_to_cheb: non-finite root");

  std::vector<cdouble> rs = roots;
  const bool real_closed = detail::pair_conjugates(rs, 1e-13);

  std::vector<cdouble> c{cdouble(1.0, 0.0)};
  long expo = 0;
  auto renorm = [&]() {
    double m = 0.0;
    for (const auto& x : c) m = std::max(m, std::abs(x));
    if (m == 0.0) return;
    int e = 0;
    std::frexp(m, &e);
    if (e > 400 || e < -400) {
      for (auto& x : c) x = cdouble(std::ldexp(x.real(), -e), std::ldexp(x.imag(), -e));
      expo += e;
    }
  };

  if (real_closed) {
    std::size_t i = 0;
    while (i < rs.size() && rs[i].imag() != 0.0) {
      detail::mul_quadratic(c, 2.0 * rs[i].real(), abs2(rs[i]));
      i += 2;
      renorm();
    }
    for (; i < rs.size(); ++i) {
      detail::mul_linear(c, cdouble(rs[i].real(), 0.0));
      renorm();
    }
    for (auto& x : c) x = cdouble(x.real(), 0.0);
  } else {
    for (const auto& r : rs) {
      detail::mul_linear(c, r);
      renorm();
    }
  }
  return {ComplexSeries(std::move(c)), expo};
}

/// Plain variant; exact for moderate degrees (the scale factor is unity
/// until coefficients leave [2^-400, 2^400]).
inline ComplexSeries roots_to_cheb(const std::vector<cdouble>& roots) {
  ScaledComplexSeries s = roots_to_cheb_scaled(roots);
  if (s.exponent != 0) {
    const double f = std::ldexp(1.0, static_cast<int>(s.exponent));
    for (auto& c : s.series.coeffs) c *= f;
  }
  return s.series;
}

}  // namespace chebqr
