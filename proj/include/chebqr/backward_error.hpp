#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "chebqr/cheb_series.hpp"

namespace chebqr {

/// Result of the polynomial backward-error functional
///   B(p; x) = min_alpha || c - alpha c_hat ||_2 / || c ||_2,
/// where c_hat are the Chebyshev coefficients of the monic polynomial
/// vanishing at the computed roots.  alpha ranges over the reals for
/// real input and over the complex numbers for complex input
/// (complex_alpha records which).  alpha is reported against the
/// unit-normalized product polynomial, which sidesteps the 2^(1-n)
/// leading-coefficient underflow at large degrees.
struct BackwardErrorReport {
  double B = 0.0;
  double alpha = 0.0;
  double alpha_imag = 0.0;
  bool complex_alpha = false;
  double residual_norm = 0.0;
  double p_norm = 0.0;
};

template <class S>
BackwardErrorReport backward_error(const ChebSeries<S>& p, const std::vector<cdouble>& roots) {
  const int n = p.degree();
  if (static_cast<int>(roots.size()) != n)
    throw std::invalid_argument("backward_error: root count must equal the degree");
  if (!p.monic) throw std::invalid_argument("backward_error: series must be monic-normalized");

  const ScaledComplexSeries hat = roots_to_cheb_scaled(roots);
  const std::vector<cdouble>& ch = hat.series.coeffs;

  double hn2 = 0.0;
  for (const auto& z : ch) hn2 += abs2(z);
  const double hnorm = std::sqrt(hn2);
  if (hnorm == 0.0) throw std::invalid_argument("backward_error: degenerate product polynomial");

  // inner product <c, w> with w = c_hat / ||c_hat||
  cdouble dot = 0.0;
  double cn2 = 0.0;
  for (int k = 0; k <= n; ++k) {
    dot += to_complex(p.coeffs[k]) * std::conj(ch[k]);
    cn2 += abs2(p.coeffs[k]);
  }
  dot /= hnorm;
  const double cnorm = std::sqrt(cn2);

  BackwardErrorReport rep;
  rep.complex_alpha = is_complex_v<S>;
  const cdouble alpha = rep.complex_alpha ? dot : cdouble(dot.real(), 0.0);
  rep.alpha = alpha.real();
  rep.alpha_imag = alpha.imag();

  double r2 = 0.0;
  for (int k = 0; k <= n; ++k) {
    const cdouble d = to_complex(p.coeffs[k]) - alpha * (ch[k] / hnorm);
    r2 += abs2(d);
  }
  rep.residual_norm = std::sqrt(r2);
  rep.p_norm = cnorm;
  rep.B = (cnorm == 0.0) ? 0.0 : rep.residual_norm / cnorm;
  return rep;
}

}  // namespace chebqr
