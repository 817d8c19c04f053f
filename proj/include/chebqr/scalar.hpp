#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

namespace chebqr {

using cdouble = std::complex<double>;

template <class S>
inline constexpr bool is_complex_v = false;
template <class R>
inline constexpr bool is_complex_v<std::complex<R>> = true;

template <class S>
struct real_of {
  using type = S;
};
template <class R>
struct real_of<std::complex<R>> {
  using type = R;
};
template <class S>
using real_t = typename real_of<S>::type;

// std::conj promotes double to complex; these keep the scalar type.
inline double conj_(double x) { return x; }
inline cdouble conj_(const cdouble& x) { return std::conj(x); }

inline double real_(double x) { return x; }
inline double real_(const cdouble& x) { return x.real(); }

inline double imag_(double) { return 0.0; }
inline double imag_(const cdouble& x) { return x.imag(); }

inline double abs2(double x) { return x * x; }
inline double abs2(const cdouble& x) { return x.real() * x.real() + x.imag() * x.imag(); }

inline bool finite_(double x) { return std::isfinite(x); }
inline bool finite_(const cdouble& x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); }

template <class S>
inline cdouble to_complex(const S& x) {
  if constexpr (is_complex_v<S>)
    return x;
  else
    return cdouble(x, 0.0);
}

}  // namespace chebqr
