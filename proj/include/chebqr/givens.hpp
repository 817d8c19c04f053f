#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "chebqr/scalar.hpp"

namespace chebqr {

/// A 2x2 unitary acting on two consecutive indices,
///   G = [ c  -conj(s) ]        G* = [    c     conj(s) ]
///       [ s      c    ]             [   -s        c    ]
/// with c real and >= 0, c^2 + |s|^2 = 1.  In double-shift (real) mode
/// s is real as well.
template <class S>
struct Givens {
  double c = 1.0;
  S s = S(0);

  bool is_identity() const { return c == 1.0 && s == S(0); }

  /// Left application: (x, y) <- G* (x, y)^T.
  void apply_left(S& x, S& y) const {
    const S nx = c * x + conj_(s) * y;
    const S ny = -s * x + c * y;
    x = nx;
    y = ny;
  }

  /// Right application to a row pair: (p, q) <- (p, q) G.
  void apply_right(S& p, S& q) const {
    const S np = c * p + s * q;
    const S nq = -conj_(s) * p + c * q;
    p = np;
    q = nq;
  }

  /// Undo: (x, y) <- G (x, y)^T.
  void apply_left_adjoint(S& x, S& y) const {
    const S nx = c * x - conj_(s) * y;
    const S ny = s * x + c * y;
    x = nx;
    y = ny;
  }
};

/// Computes G with G* (a, b)^T = (r, 0)^T and |r| = ||(a,b)||_2.
/// Magnitudes are rescaled before squaring so inputs up to the largest
/// finite double do not overflow (coefficient vectors can reach 1e16).
/// Zero b gives the identity; zero a gives c = 0, |s| = 1, r = |b|.
template <class S>
std::pair<Givens<S>, S> make_givens(const S& a, const S& b) {
  if (!finite_(a) || !finite_(b)) throw std::invalid_argument("make_givens: non-finite input");
  if (b == S(0)) return {Givens<S>{1.0, S(0)}, a};
  if (a == S(0)) {
    const double bn = std::abs(b);
    return {Givens<S>{0.0, conj_(b) / bn}, S(bn)};
  }
  const double aa = std::abs(a), ab = std::abs(b);
  double h;
  if (aa >= ab) {
    const double t = ab / aa;
    h = aa * std::sqrt(1.0 + t * t);
  } else {
    const double t = aa / ab;
    h = ab * std::sqrt(1.0 + t * t);
  }
  Givens<S> g;
  g.c = aa / h;
  g.s = (conj_(a) / aa) * (b / h);
  const S r = (a / aa) * h;
  return {g, r};
}

}  // namespace chebqr
