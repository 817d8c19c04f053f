#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "chebqr/colleague.hpp"

namespace chebqr {

/// ||u[w .. min(w+j+1, n-1)]||_2 * ||v[max(0, w-1) .. w+j]||_2 — the local
/// window product whose running supremum over all rotations is the
/// backward-error amplification certificate.  Accumulation order is
/// ascending-index so incremental and full-rescan evaluations agree
/// bit for bit.
template <class S>
double gamma_window_product(const std::vector<S>& u, const std::vector<S>& v, int w, int j) {
  const int n = static_cast<int>(u.size());
  double su = 0.0, sv = 0.0;
  const int ub = std::min(w + j + 1, n - 1);
  for (int t = w; t <= ub; ++t) su += abs2(u[t]);
  const int va = std::max(0, w - 1), vb = w + j;
  for (int t = va; t <= vb; ++t) sv += abs2(v[t]);
  return std::sqrt(su) * std::sqrt(sv);
}

/// Folds into `acc` the window products of all windows overlapping the
/// touched index range [tlo, thi].  Windows outside that set are
/// unchanged since their last evaluation, so the running max over the
/// initial full scan plus these incremental folds equals the true
/// supremum.
template <class S>
void fold_gamma_windows(const std::vector<S>& u, const std::vector<S>& v, int tlo, int thi,
                        int j, double& acc) {
  const int n = static_cast<int>(u.size());
  const int wlo = std::max(0, tlo - j - 1);
  const int whi = std::min(n - j - 1, thi + 1);
  for (int w = wlo; w <= whi; ++w) acc = std::max(acc, gamma_window_product(u, v, w, j));
}

/// Running gamma-hat suprema (both window sizes), rotation and sweep
/// counters.  Monotone except for an explicit rollback when an AED
/// window solve is aborted and undone.
struct StabilityTracker {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  long rotations = 0;
  long sweeps = 0;

  template <class S>
  void seed(const Generators<S>& g) {
    const int n = g.size();
    for (int w = 0; w <= n - 2; ++w)
      gamma1 = std::max(gamma1, gamma_window_product(g.u, g.v, w, 1));
    for (int w = 0; w <= n - 3; ++w)
      gamma2 = std::max(gamma2, gamma_window_product(g.u, g.v, w, 2));
  }

  template <class S>
  void on_rotation(const Generators<S>& g, int tlo, int thi) {
    ++rotations;
    fold_gamma_windows(g.u, g.v, tlo, thi, 1, gamma1);
    fold_gamma_windows(g.u, g.v, tlo, thi, 2, gamma2);
  }

  double gamma_hat(int j) const { return j == 2 ? gamma2 : gamma1; }

  // max-merge is associative and commutative, so parallel tickets can
  // fold locally and merge on retirement.
  void merge(const StabilityTracker& o) {
    gamma1 = std::max(gamma1, o.gamma1);
    gamma2 = std::max(gamma2, o.gamma2);
    rotations += o.rotations;
    sweeps += o.sweeps;
  }
};

}  // namespace chebqr
