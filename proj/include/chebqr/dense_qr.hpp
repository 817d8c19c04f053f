#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "chebqr/dense_matrix.hpp"
#include "chebqr/givens.hpp"
#include "chebqr/qr_core.hpp"

namespace chebqr {

struct DenseQrOptions {
  bool balance = false;  // diagonal scaling pre-pass (emulates eig for comparison)
  long max_sweep_factor = 50;
  double deflation_eps = std::numeric_limits<double>::epsilon();
};

/// Householder reduction of a general dense matrix to upper Hessenberg
/// form (similarity; eigenvalues preserved).
inline void hessenberg_reduce(Mat<cdouble>& A) {
  const int n = A.n;
  for (int c = 0; c + 2 < n; ++c) {
    double scale = 0.0;
    for (int r = c + 1; r < n; ++r) scale += std::abs(A(r, c));
    if (scale == 0.0) continue;
    std::vector<cdouble> w(n - c - 1);
    double norm2 = 0.0;
    for (int r = c + 1; r < n; ++r) {
      w[r - c - 1] = A(r, c) / scale;
      norm2 += abs2(w[r - c - 1]);
    }
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) continue;
    const cdouble x0 = w[0];
    const cdouble phase = (x0 == cdouble(0.0)) ? cdouble(1.0) : x0 / std::abs(x0);
    w[0] += phase * norm;
    double wn2 = 0.0;
    for (const auto& z : w) wn2 += abs2(z);
    if (wn2 == 0.0) continue;
    // A <- (I - 2 w w*/|w|^2) A (I - 2 w w*/|w|^2)
    for (int col = 0; col < n; ++col) {
      cdouble dot = 0.0;
      for (int r = c + 1; r < n; ++r) dot += std::conj(w[r - c - 1]) * A(r, col);
      dot *= 2.0 / wn2;
      for (int r = c + 1; r < n; ++r) A(r, col) -= w[r - c - 1] * dot;
    }
    for (int row = 0; row < n; ++row) {
      cdouble dot = 0.0;
      for (int cc = c + 1; cc < n; ++cc) dot += A(row, cc) * w[cc - c - 1];
      dot *= 2.0 / wn2;
      for (int cc = c + 1; cc < n; ++cc) A(row, cc) -= dot * std::conj(w[cc - c - 1]);
    }
    for (int r = c + 2; r < n; ++r) A(r, c) = 0.0;
  }
}

/// Parlett–Reinsch diagonal balancing with radix-2 scale factors.
inline void balance_inplace(Mat<cdouble>& A) {
  const int n = A.n;
  bool converged = false;
  int iter = 0;
  while (!converged && iter++ < 50) {
    converged = true;
    for (int i = 0; i < n; ++i) {
      double cn = 0.0, rn = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        cn += std::abs(A(k, i));
        rn += std::abs(A(i, k));
      }
      if (cn == 0.0 || rn == 0.0) continue;
      double f = 1.0;
      const double s = cn + rn;
      while (cn < rn / 2.0) {
        cn *= 2.0;
        rn /= 2.0;
        f *= 2.0;
      }
      while (cn >= rn * 2.0) {
        cn /= 2.0;
        rn *= 2.0;
        f /= 2.0;
      }
      if (cn + rn < 0.95 * s && f != 1.0) {
        converged = false;
        for (int k = 0; k < n; ++k) A(k, i) *= f;
        for (int k = 0; k < n; ++k) A(i, k) /= f;
      }
    }
  }
}

/// Unstructured shifted Hessenberg QR with Wilkinson shifts — the
/// unbalanced dense baseline (no balancing unless requested).  General
/// input is reduced to Hessenberg form first.
inline std::vector<cdouble> dense_hessenberg_qr(Mat<cdouble> H, const DenseQrOptions& opts = {}) {
  const int n = H.n;
  if (n == 0) return {};
  if (n > 1024) throw std::length_error("dense_hessenberg_qr: n > 1024");
  if (opts.balance) balance_inplace(H);
  bool hess = true;
  for (int i = 0; i < n && hess; ++i)
    for (int j = 0; j + 1 < i && hess; ++j)
      if (H(i, j) != cdouble(0.0)) hess = false;
  if (!hess) hessenberg_reduce(H);

  std::vector<cdouble> eig(n);
  const double eps = opts.deflation_eps;
  const long max_sweeps = opts.max_sweep_factor * n;
  long sweeps = 0;
  int hi = n - 1;
  int stagnation = 0, last_hi = hi;
  std::mt19937_64 rng(0x5eedULL);

  auto subdiag_negligible = [&](int i) {
    return std::abs(H(i + 1, i)) <= eps * (std::abs(H(i, i)) + std::abs(H(i + 1, i + 1)));
  };

  while (hi >= 0) {
    int lo = 0;
    for (int i = hi - 1; i >= 0; --i) {
      if (H(i + 1, i) == cdouble(0.0) || subdiag_negligible(i)) {
        H(i + 1, i) = 0.0;
        lo = i + 1;
        break;
      }
    }
    const int m = hi - lo + 1;
    if (m == 1) {
      eig[hi] = H(hi, hi);
      --hi;
      continue;
    }
    if (m == 2) {
      auto [l1, l2] = eig2x2(H(lo, lo), H(lo, lo + 1), H(lo + 1, lo), H(lo + 1, lo + 1));
      eig[lo] = l1;
      eig[lo + 1] = l2;
      hi -= 2;
      continue;
    }
    if (sweeps >= max_sweeps)
      throw std::runtime_error("dense_hessenberg_qr: no convergence within 50*n sweeps");
    if (hi != last_hi) {
      stagnation = 0;
      last_hi = hi;
    }

    cdouble sigma;
    {
      const cdouble a = H(hi - 1, hi - 1), b = H(hi - 1, hi);
      const cdouble c = H(hi, hi - 1), d = H(hi, hi);
      const cdouble p = 0.5 * (a - d);
      const cdouble sq = std::sqrt(p * p + b * c);
      const cdouble t = (abs2(p + sq) >= abs2(p - sq)) ? p + sq : p - sq;
      sigma = (t == cdouble(0.0)) ? d : d - (b * c) / t;
    }
    if (stagnation >= 15) {
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      const double pr = U(rng);
      const double pi = U(rng);
      sigma = H(hi, hi) + cdouble(pr, pi) * (std::abs(H(hi, hi - 1)) + 0.25 * std::abs(H(hi, hi)));
      stagnation = 0;
    }

    for (int r = lo; r < hi; ++r) {
      cdouble a, b;
      if (r == lo) {
        a = H(lo, lo) - sigma;
        b = H(lo + 1, lo);
      } else {
        a = H(r, r - 1);
        b = H(r + 1, r - 1);
      }
      auto [G, rv] = make_givens(a, b);
      if (r > lo) {
        H(r, r - 1) = rv;
        H(r + 1, r - 1) = 0.0;
      }
      for (int c = r; c < n; ++c) G.apply_left(H(r, c), H(r + 1, c));
      const int rmax = std::min(r + 2, hi);
      for (int row = 0; row <= rmax; ++row) G.apply_right(H(row, r), H(row, r + 1));
    }
    ++sweeps;
    ++stagnation;
  }
  return eig;
}

}  // namespace chebqr
