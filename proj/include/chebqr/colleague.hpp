#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "chebqr/cheb_series.hpp"
#include "chebqr/dense_matrix.hpp"
#include "chebqr/scalar.hpp"

namespace chebqr {

/// Off-Hessenberg entries created during a sweep.  A single-shift sweep
/// carries one entry at (col+2, col); a double-shift sweep carries three,
/// at (col+2, col), (col+3, col) and (col+3, col+1).  Indices are 0-based.
template <class S>
struct BulgeBuffer {
  int col = -1;
  std::array<S, 3> e{S(0), S(0), S(0)};
  bool three = false;

  bool empty() const { return col < 0; }
  void clear() {
    col = -1;
    e = {S(0), S(0), S(0)};
    three = false;
  }
};

/// Generator representation of an upper-Hessenberg Hermitian-plus-rank-one
/// matrix A = F + u v*.  diag and sub hold the diagonal and subdiagonal of
/// A itself; everything above the first superdiagonal is implied by u, v:
///
///   A(i,j) = diag[i]                                  i == j
///   A(i,j) = sub[j]                                   i == j + 1
///   A(i,j) = conj(sub[i]) - conj(u[i+1]) v[i] + u[i] conj(v[i+1])   j == i + 1
///   A(i,j) = u[i] conj(v[j]) - conj(u[j]) v[i]        j >  i + 1
///
/// (0-based indices).  lo..hi delimit the active unreduced window.
template <class S>
struct Generators {
  std::vector<S> diag;  // length n
  std::vector<S> sub;   // length n-1
  std::vector<S> u, v;  // length n
  int lo = 0, hi = -1;
  BulgeBuffer<S> bulge;

  int size() const { return static_cast<int>(diag.size()); }

  S super(int i) const {  // A(i, i+1)
    return conj_(sub[i]) - conj_(u[i + 1]) * v[i] + u[i] * conj_(v[i + 1]);
  }

  S upper(int i, int j) const {  // A(i, j), j > i+1
    return u[i] * conj_(v[j]) - conj_(u[j]) * v[i];
  }
};

using RealGenerators = Generators<double>;
using ComplexGenerators = Generators<cdouble>;

/// Colleague matrix of a Chebyshev-basis polynomial in generator form:
/// F is the tridiagonal with 1/2 couplings (sqrt(2)/2 on the last pair)
/// and the rank-one row carries -(1/(2 p_n)) [p_{n-1} ... p_1 sqrt(2) p_0].
/// u = e_1, so the only nonzero diagonal entry of A is conj(v_0).
template <class S>
Generators<S> build_colleague(const ChebSeries<S>& p, double monic_tol = 0.0) {
  const int n = p.degree();
  if (n < 2) throw std::invalid_argument("build_colleague: degree must be at least 2");
  const S lead = p.coeffs[n];
  const double floor_tol = monic_tol > 0.0 ? monic_tol : 1e-300 * n;
  if (std::abs(lead) <= floor_tol * std::max(1.0, p.max_abs()))
    throw std::domain_error("build_colleague: leading coefficient too small");

  Generators<S> g;
  g.diag.assign(n, S(0));
  g.sub.assign(n - 1, S(0.5));
  g.sub[n - 2] = S(std::sqrt(0.5));
  g.u.assign(n, S(0));
  g.u[0] = S(1);
  g.v.assign(n, S(0));
  const S scale = S(-0.5) / lead;
  for (int j = 0; j < n - 1; ++j) g.v[j] = conj_(scale * p.coeffs[n - 1 - j]);
  g.v[n - 1] = conj_(scale * p.coeffs[0] * std::sqrt(2.0));
  g.diag[0] = conj_(g.v[0]);  // u = e_1 puts conj(v_0) on A(0,0)
  g.lo = 0;
  g.hi = n - 1;
  return g;
}

/// Reconstructs A(i, j) from the generators, including any recorded
/// bulge entry.  0-based indices.
template <class S>
S entry(const Generators<S>& g, int i, int j) {
  const int n = g.size();
  if (i < 0 || j < 0 || i >= n || j >= n) throw std::out_of_range("entry: index out of range");
  if (!g.bulge.empty()) {
    const int c = g.bulge.col;
    if (j == c && i == c + 2) return g.bulge.e[0];
    if (g.bulge.three) {
      if (j == c && i == c + 3) return g.bulge.e[1];
      if (j == c + 1 && i == c + 3) return g.bulge.e[2];
    }
  }
  if (i == j) return g.diag[i];
  if (i == j + 1) return g.sub[j];
  if (j == i + 1) return g.super(i);
  if (j > i + 1) {
    S e = g.upper(i, j);
    // a bulge entry at the mirror position (j, i) contributes its
    // conjugate to the Hermitian part
    if (!g.bulge.empty()) {
      const int c = g.bulge.col;
      if (i == c && j == c + 2) e += conj_(g.bulge.e[0]);
      if (g.bulge.three) {
        if (i == c && j == c + 3) e += conj_(g.bulge.e[1]);
        if (i == c + 1 && j == c + 3) e += conj_(g.bulge.e[2]);
      }
    }
    return e;
  }
  return S(0);
}

inline constexpr int kDensifyGuard = 4096;

/// Dense reconstruction; a test oracle.  Guarded so production paths can
/// never accidentally materialize an n^2 matrix.
template <class S>
Mat<S> densify(const Generators<S>& g) {
  const int n = g.size();
  if (n > kDensifyGuard) throw std::length_error("densify: size guard exceeded");
  Mat<S> m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = entry(g, i, j);
  return m;
}

/// Generator slices for a trailing k x k principal block (the diagonal
/// blocks of a Hermitian-plus-rank-one Hessenberg matrix inherit the
/// representation).  The slice copies; AED works on views instead.
template <class S>
Generators<S> trailing_slice(const Generators<S>& g, int k) {
  const int n = g.size();
  if (k < 1 || k > n) throw std::invalid_argument("trailing_slice: bad size");
  Generators<S> s;
  s.diag.assign(g.diag.end() - k, g.diag.end());
  s.sub.assign(g.sub.end() - (k - 1), g.sub.end());
  s.u.assign(g.u.end() - k, g.u.end());
  s.v.assign(g.v.end() - k, g.v.end());
  s.lo = 0;
  s.hi = k - 1;
  return s;
}

template <class S>
Generators<S> leading_slice(const Generators<S>& g, int k) {
  if (k < 1 || k > g.size()) throw std::invalid_argument("leading_slice: bad size");
  Generators<S> s;
  s.diag.assign(g.diag.begin(), g.diag.begin() + k);
  s.sub.assign(g.sub.begin(), g.sub.begin() + (k - 1));
  s.u.assign(g.u.begin(), g.u.begin() + k);
  s.v.assign(g.v.begin(), g.v.begin() + k);
  s.lo = 0;
  s.hi = k - 1;
  return s;
}

}  // namespace chebqr
