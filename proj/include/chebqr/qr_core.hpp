#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chebqr/colleague.hpp"
#include "chebqr/givens.hpp"
#include "chebqr/tracker.hpp"

namespace chebqr {

struct DeflationEvent {
  int position;  // 1-based subdiagonal index
  long sweep;
};

struct SolveOptions {
  bool use_aed = true;
  int aed_every = 5;              // sweeps between AED attempts
  int aed_window_override = 0;    // 0: min(32, max(4, active/16)); parallel sets 9*workers
  int exceptional_interval = 15;  // stagnant sweeps before a random shift
  long max_sweep_factor = 50;     // hard cap: 50*n sweeps
  double deflation_eps = std::numeric_limits<double>::epsilon();
  double aed_eps = std::numeric_limits<double>::epsilon();
  std::uint64_t seed = 0;  // 0: CHEBQR_SEED env var, else a fixed default
  std::ostream* diagnostics = nullptr;
};

struct RootReport {
  std::vector<cdouble> eigenvalues;
  long iterations = 0;  // driver-level sweeps (AED window solves excluded)
  long rotations = 0;
  double gamma_hat = 0.0;  // certificate for the window size that ran
  double gamma_hat_1 = 0.0;
  double gamma_hat_2 = 0.0;
  int window_j = 1;
  std::vector<DeflationEvent> deflations;
};

struct convergence_error : std::runtime_error {
  RootReport partial;
  convergence_error(const std::string& msg, RootReport r)
      : std::runtime_error(msg), partial(std::move(r)) {}
};

/// Shift data for one sweep: sigma for the single-shift (complex) mode,
/// rho(z) = z^2 - s z + t for the double-shift (real) mode.
struct SweepPlan {
  cdouble sigma{0.0, 0.0};
  double s = 0.0, t = 0.0;
};

inline std::uint64_t resolve_seed(std::uint64_t seed) {
  if (seed != 0) return seed;
  if (const char* env = std::getenv("CHEBQR_SEED")) {
    char* end = nullptr;
    const unsigned long long val = std::strtoull(env, &end, 10);
    if (end != env) return static_cast<std::uint64_t>(val);
  }
  return 0x9e3779b97f4a7c15ULL;
}

// ---------------------------------------------------------------------------
// chasing kernels
// ---------------------------------------------------------------------------

template <class S, class Sink>
inline void rotate_uv(Generators<S>& g, const Givens<S>& G, int r, Sink&& sink) {
  G.apply_left(g.u[r], g.u[r + 1]);
  G.apply_left(g.v[r], g.v[r + 1]);
  sink(G, r);
}

namespace detail {

// Similarity by G at rows (r, r+1) applied to the explicit band: the 3x2
// block rows (r..r+2) x cols (r..r+1).  The caller handles column r-1
// (the annihilated pair).  Returns the created entry at (r+2, r), zero
// when row r+2 lies beyond the window.
template <class S>
S apply_local_single(Generators<S>& g, const Givens<S>& G, int r) {
  S m11 = g.diag[r], m12 = g.super(r);
  S m21 = g.sub[r], m22 = g.diag[r + 1];
  const bool has_row3 = (r + 2 <= g.hi);
  S m31 = S(0), m32 = has_row3 ? g.sub[r + 1] : S(0);
  G.apply_left(m11, m21);
  G.apply_left(m12, m22);
  G.apply_right(m11, m12);
  G.apply_right(m21, m22);
  if (has_row3) G.apply_right(m31, m32);
  g.diag[r] = m11;
  g.sub[r] = m21;
  g.diag[r + 1] = m22;
  if (has_row3) g.sub[r + 1] = m32;
  return m31;
}

// The 4x3 band update shared by the double-shift opening and chasing
// steps: block rows (b..b+3) x cols (b..b+2), left-multiplied by
// G1* G2* (G2 on block rows 1,2; G1 on rows 0,1) and right-multiplied
// by G2 G1.  m20 carries the incoming third bulge entry.  Stores the
// updated band back and returns the new bulge triple (e0 at (b+2, b);
// e1, e2 at row b+3 when it exists).
template <class S>
void apply_local_double(Generators<S>& g, const Givens<S>& G1, const Givens<S>& G2, int b,
                        const S& m20, BulgeBuffer<S>& bulge) {
  S m[4][3];
  m[0][0] = g.diag[b];
  m[0][1] = g.super(b);
  // A(b, b+2) mirrors the riding bulge entry at (b+2, b): the Hermitian
  // part there is m20 - u v*, so conj(m20) joins the rank-one formula.
  m[0][2] = conj_(m20) + g.upper(b, b + 2);
  m[1][0] = g.sub[b];
  m[1][1] = g.diag[b + 1];
  m[1][2] = g.super(b + 1);
  m[2][0] = m20;
  m[2][1] = g.sub[b + 1];
  m[2][2] = g.diag[b + 2];
  const bool has_row4 = (b + 3 <= g.hi);
  m[3][0] = S(0);
  m[3][1] = S(0);
  m[3][2] = has_row4 ? g.sub[b + 2] : S(0);

  for (int j = 0; j < 3; ++j) G2.apply_left(m[1][j], m[2][j]);
  for (int j = 0; j < 3; ++j) G1.apply_left(m[0][j], m[1][j]);
  const int nrows = has_row4 ? 4 : 3;
  for (int i = 0; i < nrows; ++i) G2.apply_right(m[i][1], m[i][2]);
  for (int i = 0; i < nrows; ++i) G1.apply_right(m[i][0], m[i][1]);

  g.diag[b] = m[0][0];
  g.sub[b] = m[1][0];
  g.diag[b + 1] = m[1][1];
  g.sub[b + 1] = m[2][1];
  g.diag[b + 2] = m[2][2];
  if (has_row4) g.sub[b + 2] = m[3][2];

  bulge.col = b;
  bulge.e[0] = m[2][0];
  if (has_row4) {
    bulge.e[1] = m[3][0];
    bulge.e[2] = m[3][1];
    bulge.three = true;
  } else {
    bulge.e[1] = bulge.e[2] = S(0);
    bulge.three = false;
  }
}

}  // namespace detail

/// First column of A - sigma*I on the active window head.
template <class S>
std::pair<S, S> leading_column_single(const Generators<S>& g, const S& sigma) {
  return {g.diag[g.lo] - sigma, g.sub[g.lo]};
}

/// First three entries of (A^2 - s A + t I) e_1 on the active window head,
/// s = 2 Re(sigma), t = |sigma|^2.
template <class S>
std::array<S, 3> leading_column_double(const Generators<S>& g, double s, double t) {
  const int lo = g.lo;
  const S gamma0 = g.super(lo);
  return {g.diag[lo] * g.diag[lo] + gamma0 * g.sub[lo] - S(s) * g.diag[lo] + S(t),
          g.sub[lo] * (g.diag[lo] + g.diag[lo + 1] - S(s)), g.sub[lo] * g.sub[lo + 1]};
}

/// Opening rotation of a single-shift sweep; requires window size >= 2.
template <class S, class Sink>
void sweep_init_single(Generators<S>& g, BulgeBuffer<S>& bulge, const S& sigma, Sink&& sink) {
  const int lo = g.lo;
  auto [x1, x2] = leading_column_single(g, sigma);
  auto [G, r] = make_givens(x1, x2);
  (void)r;
  const S m31 = detail::apply_local_single(g, G, lo);
  if (lo + 2 <= g.hi) {
    bulge.col = lo;
    bulge.e[0] = m31;
    bulge.three = false;
  } else {
    bulge.clear();
  }
  rotate_uv(g, G, lo, sink);
}

/// Advances a one-entry bulge at (col+2, col) by one row; clears it at
/// the window bottom.  Also serves as the tail phase of a double sweep.
template <class S, class Sink>
void chase_step_single(Generators<S>& g, BulgeBuffer<S>& bulge, Sink&& sink) {
  const int c = bulge.col, r = c + 1;
  auto [G, rv] = make_givens(g.sub[c], bulge.e[0]);
  g.sub[c] = rv;
  const S m31 = detail::apply_local_single(g, G, r);
  if (r + 2 <= g.hi) {
    bulge.col = r;
    bulge.e[0] = m31;
    bulge.three = false;
  } else {
    bulge.clear();
  }
  rotate_uv(g, G, r, sink);
}

/// Opening rotations of a double-shift sweep; requires window size >= 3.
template <class S, class Sink>
void sweep_init_double(Generators<S>& g, BulgeBuffer<S>& bulge, double s, double t, Sink&& sink) {
  const int lo = g.lo;
  auto x = leading_column_double(g, s, t);
  auto [G2, r2] = make_givens(x[1], x[2]);
  auto [G1, r1] = make_givens(x[0], r2);
  (void)r1;
  detail::apply_local_double(g, G1, G2, lo, S(0), bulge);
  rotate_uv(g, G2, lo + 1, sink);
  rotate_uv(g, G1, lo, sink);
}

/// Advances a three-entry bulge anchored at column col by one row.
/// Near the window bottom the bulge degrades to a single entry, after
/// which chase_step_single finishes the sweep.
template <class S, class Sink>
void chase_step_double(Generators<S>& g, BulgeBuffer<S>& bulge, Sink&& sink) {
  const int c = bulge.col;
  auto [G2, r2] = make_givens(bulge.e[0], bulge.e[1]);
  auto [G1, r1] = make_givens(g.sub[c], r2);
  g.sub[c] = r1;
  detail::apply_local_double(g, G1, G2, c + 1, bulge.e[2], bulge);
  rotate_uv(g, G2, c + 2, sink);
  rotate_uv(g, G1, c + 1, sink);
}

/// One full sweep over the current active window [g.lo, g.hi], tracking
/// the bulge in the generators' own buffer.
template <class S, class Sink>
void run_sweep(Generators<S>& g, const SweepPlan& plan, Sink&& sink) {
  BulgeBuffer<S>& bulge = g.bulge;
  if constexpr (is_complex_v<S>) {
    sweep_init_single(g, bulge, plan.sigma, sink);
    while (!bulge.empty()) chase_step_single(g, bulge, sink);
  } else {
    sweep_init_double(g, bulge, plan.s, plan.t, sink);
    while (!bulge.empty()) {
      if (bulge.three)
        chase_step_double(g, bulge, sink);
      else
        chase_step_single(g, bulge, sink);
    }
  }
}

// ---------------------------------------------------------------------------
// deflation, shifts, 2x2 blocks
// ---------------------------------------------------------------------------

/// Scale-invariant Hessenberg deflation test: |beta_i| <= eps (|d_i| + |d_{i+1}|).
template <class S>
bool deflatable(const Generators<S>& g, int i, double eps) {
  return std::abs(g.sub[i]) <= eps * (std::abs(g.diag[i]) + std::abs(g.diag[i + 1]));
}

/// Zeroes every negligible subdiagonal entry in [from, to]; returns the
/// 0-based positions that satisfied the criterion (exact zeros included).
template <class S>
std::vector<int> deflation_scan(Generators<S>& g, double eps, int from, int to) {
  std::vector<int> out;
  for (int i = from; i <= to; ++i) {
    if (g.sub[i] == S(0) || deflatable(g, i, eps)) {
      g.sub[i] = S(0);
      out.push_back(i);
    }
  }
  return out;
}

template <class S>
std::vector<int> deflation_scan(Generators<S>& g, double eps) {
  return deflation_scan(g, eps, 0, g.size() - 2);
}

/// Eigenvalues of [[a, b], [c, d]], larger-|.| first, computed with the
/// stable quotient form.
inline std::pair<cdouble, cdouble> eig2x2(const cdouble& a, const cdouble& b, const cdouble& c,
                                          const cdouble& d) {
  const cdouble m = 0.5 * (a + d);
  const cdouble p = 0.5 * (a - d);
  cdouble sq = std::sqrt(p * p + b * c);
  if (abs2(m + sq) < abs2(m - sq)) sq = -sq;
  const cdouble l1 = m + sq;
  const cdouble det = a * d - b * c;
  const cdouble l2 = (l1 == cdouble(0.0)) ? cdouble(0.0) : det / l1;
  return {l1, l2};
}

/// Real 2x2 eigenvalues; complex pairs come out exactly conjugate.
inline std::pair<cdouble, cdouble> eig2x2_real(double a, double b, double c, double d) {
  const double m = 0.5 * (a + d);
  const double p = 0.5 * (a - d);
  const double disc = p * p + b * c;
  const double det = a * d - b * c;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double l1 = (m >= 0.0) ? m + sq : m - sq;
    const double l2 = (l1 != 0.0) ? det / l1 : 0.0;
    return {cdouble(l1, 0.0), cdouble(l2, 0.0)};
  }
  const double im = std::sqrt(-disc);
  return {cdouble(m, im), cdouble(m, -im)};
}

/// Wilkinson shift: eigenvalue of the trailing 2x2 of the active window
/// closest to the corner entry.
template <class S>
cdouble wilkinson_shift_single(const Generators<S>& g) {
  const int h = g.hi;
  const cdouble a = to_complex(g.diag[h - 1]), b = to_complex(g.super(h - 1));
  const cdouble c = to_complex(g.sub[h - 1]), d = to_complex(g.diag[h]);
  const cdouble p = 0.5 * (a - d);
  const cdouble sq = std::sqrt(p * p + b * c);
  const cdouble t = (abs2(p + sq) >= abs2(p - sq)) ? p + sq : p - sq;
  if (t == cdouble(0.0)) return d;
  return d - (b * c) / t;
}

/// Francis double-shift descriptor: trace and determinant of the
/// trailing 2x2 (= 2 Re(sigma), |sigma|^2 for a conjugate pair).
template <class S>
std::pair<double, double> wilkinson_shift_double(const Generators<S>& g) {
  const int h = g.hi;
  const double a = real_(g.diag[h - 1]), b = real_(g.super(h - 1));
  const double c = real_(g.sub[h - 1]), d = real_(g.diag[h]);
  return {a + d, a * d - b * c};
}

template <class S>
SweepPlan wilkinson_shift(const Generators<S>& g) {
  SweepPlan plan;
  if constexpr (is_complex_v<S>) {
    plan.sigma = wilkinson_shift_single(g);
  } else {
    auto [s, t] = wilkinson_shift_double(g);
    plan.s = s;
    plan.t = t;
  }
  return plan;
}

/// Similarity by G at rows (r, r+1) on a standalone 2x2 block: both
/// neighbouring couplings must be exactly zero (deflated), so no bulge
/// is created.  Used to finalize Schur-form blocks.
template <class S, class Sink>
void apply_block_rotation(Generators<S>& g, const Givens<S>& G, int r, Sink&& sink) {
  S m11 = g.diag[r], m12 = g.super(r);
  S m21 = g.sub[r], m22 = g.diag[r + 1];
  G.apply_left(m11, m21);
  G.apply_left(m12, m22);
  G.apply_right(m11, m12);
  G.apply_right(m21, m22);
  g.diag[r] = m11;
  g.sub[r] = m21;
  g.diag[r + 1] = m22;
  rotate_uv(g, G, r, sink);
}

namespace detail {

struct AedOutcome {
  int deflated = 0;
  std::vector<SweepPlan> shifts;  // farthest-from-corner first; popped from the back
  bool aborted = false;
};

// Builds sweep plans out of harvested eigenvalues, nearest to the corner
// entry injected first (i.e. last in the vector).  In real mode shifts
// are paired into Francis descriptors.
template <bool Complex>
std::vector<SweepPlan> plans_from_shifts(std::vector<cdouble> eigs, const cdouble& corner) {
  std::sort(eigs.begin(), eigs.end(), [&](const cdouble& x, const cdouble& y) {
    return abs2(x - corner) > abs2(y - corner);
  });
  std::vector<SweepPlan> plans;
  if constexpr (Complex) {
    for (const auto& e : eigs) {
      SweepPlan p;
      p.sigma = e;
      plans.push_back(p);
    }
  } else {
    // conjugate pairs become one plan; leftover reals are paired up
    std::vector<double> reals;
    std::vector<cdouble> cplx;
    for (const auto& e : eigs) {
      if (e.imag() == 0.0)
        reals.push_back(e.real());
      else
        cplx.push_back(e);
    }
    for (std::size_t i = 0; i + 1 < cplx.size(); i += 2) {
      SweepPlan p;
      p.s = 2.0 * cplx[i].real();
      p.t = abs2(cplx[i]);
      plans.push_back(p);
    }
    for (std::size_t i = 0; i < reals.size(); i += 2) {
      SweepPlan p;
      if (i + 1 < reals.size()) {
        p.s = reals[i] + reals[i + 1];
        p.t = reals[i] * reals[i + 1];
      } else {
        p.s = 2.0 * reals[i];
        p.t = reals[i] * reals[i];
      }
      plans.push_back(p);
    }
  }
  return plans;
}

// Shared driver loop: shifted QR with deflation on rows [wlo, whi].
// In schur mode the window is materialized in (quasi-)triangular form:
// real mode keeps 2x2 blocks for complex pairs and splits real-eigenvalue
// blocks; complex mode triangularizes fully.  Otherwise terminal blocks
// are solved in closed form and written to eig.
//
// AedFn: invoked as aed_fn(lo, hi, k) -> AedOutcome.  Inactive when
// AllowAed is false (the AED window solve itself).
template <class S, class Sink, bool AllowAed, class AedFn>
long qr_run(Generators<S>& g, int wlo, int whi, bool schur_mode, std::vector<cdouble>* eig,
            std::vector<DeflationEvent>* defl_log, const SolveOptions& opts,
            StabilityTracker& tracker, Sink& sink, std::mt19937_64& rng, long max_sweeps,
            AedFn&& aed_fn) {
  constexpr bool kComplex = is_complex_v<S>;
  long sweeps = 0;
  int hi = whi;
  int stagnation = 0;
  int last_hi = hi;
  bool exceptional_next = false;
  int sweeps_since_aed = 0;
  bool just_deflated = true;
  std::vector<SweepPlan> pool;

  auto find_lo = [&](int h) {
    for (int i = h - 1; i >= wlo; --i) {
      if (g.sub[i] == S(0)) return i + 1;
      if (deflatable(g, i, opts.deflation_eps)) {
        g.sub[i] = S(0);
        if (defl_log) defl_log->push_back({i + 1, sweeps});
        return i + 1;
      }
    }
    return wlo;
  };

  auto emit1 = [&](int h) {
    if (eig) (*eig)[h] = to_complex(g.diag[h]);
  };

  // terminal 2x2 at [lo, lo+1]; returns true when handled
  auto handle2 = [&](int lo) {
    const S a = g.diag[lo], b = g.super(lo), c = g.sub[lo], d = g.diag[lo + 1];
    if constexpr (kComplex) {
      auto [l1, l2] = eig2x2(a, b, c, d);
      if (schur_mode) {
        auto [G, r] = make_givens(l1 - d, c);
        (void)r;
        apply_block_rotation(g, G, lo, sink);
        g.sub[lo] = S(0);
        if (defl_log) defl_log->push_back({lo + 1, sweeps});
      } else if (eig) {
        (*eig)[lo] = l1;
        (*eig)[lo + 1] = l2;
      }
    } else {
      auto [l1, l2] = eig2x2_real(a, b, c, d);
      if (schur_mode) {
        if (l1.imag() == 0.0) {  // split a real-eigenvalue block
          auto [G, r] = make_givens(l1.real() - d, c);
          (void)r;
          apply_block_rotation(g, G, lo, sink);
          g.sub[lo] = S(0);
          if (defl_log) defl_log->push_back({lo + 1, sweeps});
        }
        // complex pair: the 2x2 block stays
      } else if (eig) {
        (*eig)[lo] = l1;
        (*eig)[lo + 1] = l2;
      }
    }
  };

  while (true) {
    while (hi >= wlo) {
      if (hi == wlo) {
        emit1(hi);
        --hi;
        just_deflated = true;
        continue;
      }
      const int lo = find_lo(hi);
      const int m = hi - lo + 1;
      if (m == 1) {
        emit1(hi);
        --hi;
        just_deflated = true;
        continue;
      }
      if (m == 2) {
        handle2(lo);
        hi -= 2;
        just_deflated = true;
        continue;
      }
      break;
    }
    if (hi < wlo) return sweeps;

    int lo = find_lo(hi);
    if (sweeps >= max_sweeps) return -1;
    if (hi != last_hi) {
      stagnation = 0;
      last_hi = hi;
    }

    if constexpr (AllowAed) {
      if (opts.use_aed && (just_deflated || sweeps_since_aed >= opts.aed_every)) {
        const int m = hi - lo + 1;
        int k = opts.aed_window_override > 0 ? opts.aed_window_override
                                             : std::min(32, std::max(4, m / 16));
        k = std::min(k, m - 2);
        if (k >= 1) {
          AedOutcome out = aed_fn(lo, hi, k, sweeps);
          sweeps_since_aed = 0;
          if (!out.aborted) {
            if (out.deflated > 0) {
              just_deflated = true;
              continue;
            }
            pool = std::move(out.shifts);
          }
        }
      }
    } else {
      (void)aed_fn;
    }
    just_deflated = false;

    g.lo = lo;
    g.hi = hi;
    SweepPlan plan;
    if (exceptional_next) {
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      const double scale = std::abs(g.sub[hi - 1]) + 0.25 * std::abs(g.diag[hi]) +
                           std::numeric_limits<double>::min();
      if constexpr (kComplex) {
        const double pr = U(rng);
        const double pi = U(rng);
        plan.sigma = to_complex(g.diag[hi]) + cdouble(pr, pi) * scale;
      } else {
        const double r = real_(g.diag[hi]) + U(rng) * scale;
        plan.s = 2.0 * r;
        plan.t = r * r;
      }
      exceptional_next = false;
      pool.clear();
    } else if (!pool.empty()) {
      plan = pool.back();
      pool.pop_back();
    } else {
      plan = wilkinson_shift(g);
    }

    run_sweep(g, plan, sink);
    ++sweeps;
    ++tracker.sweeps;
    ++sweeps_since_aed;
    ++stagnation;
    if (stagnation >= opts.exceptional_interval) {
      exceptional_next = true;
      stagnation = 0;
    }

    if (opts.diagnostics) {
      (*opts.diagnostics) << "{\"sweep\":" << sweeps << ",\"active\":[" << lo + 1 << ","
                          << hi + 1 << "],\"shift\":[" << plan.sigma.real() << ","
                          << plan.sigma.imag() << "," << plan.s << "," << plan.t
                          << "],\"gamma1\":" << tracker.gamma1
                          << ",\"gamma2\":" << tracker.gamma2 << "}\n";
    }
  }
}

struct NoAed {
  AedOutcome operator()(int, int, int, long) const { return {}; }
};

}  // namespace detail

}  // namespace chebqr
