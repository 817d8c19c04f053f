#pragma once

#include <functional>
#include <random>

#include "chebqr/aed.hpp"
#include "chebqr/qr_core.hpp"

namespace chebqr {

/// Test hook: called after every rotation applied to u, v, with the
/// generators in their post-rotation state and the lower row index.
template <class S>
using RotationObserver = std::function<void(const Generators<S>&, const Givens<S>&, int)>;

/// Sequential structured QR driver.  Real generators run the double-shift
/// (real arithmetic) iteration; complex generators the single-shift one.
/// Reports all eigenvalues, the sweep count, the deflation log and the
/// gamma-hat stability certificate.
template <class S>
RootReport eigenvalues(Generators<S> g, const SolveOptions& opts_in = {},
                       const RotationObserver<S>& observer = {}) {
  SolveOptions opts = opts_in;
  opts.seed = resolve_seed(opts.seed);
  const int n = g.size();

  RootReport rep;
  rep.window_j = is_complex_v<S> ? 1 : 2;
  rep.eigenvalues.assign(n, cdouble(0.0, 0.0));

  StabilityTracker tracker;
  tracker.seed(g);
  std::mt19937_64 rng(opts.seed);

  auto sink = [&](const Givens<S>& G, int r) {
    tracker.on_rotation(g, r, r + 1);
    if (observer) observer(g, G, r);
  };

  auto aed_fn = [&](int lo, int hi, int k, long sweep_now) {
    return aed_step(g, lo, hi, k, opts, tracker, sink, rng, &rep.deflations, sweep_now);
  };

  long sweeps = 0;
  if (n == 1) {
    rep.eigenvalues[0] = to_complex(g.diag[0]);
  } else {
    sweeps = detail::qr_run<S, decltype(sink), true>(
        g, 0, n - 1, /*schur=*/false, &rep.eigenvalues, &rep.deflations, opts, tracker, sink,
        rng, opts.max_sweep_factor * n, aed_fn);
  }

  rep.rotations = tracker.rotations;
  rep.gamma_hat_1 = tracker.gamma1;
  rep.gamma_hat_2 = tracker.gamma2;
  rep.gamma_hat = tracker.gamma_hat(rep.window_j);

  if (sweeps < 0) {
    rep.iterations = opts.max_sweep_factor * n;
    throw convergence_error("eigenvalues: no convergence within " +
                                std::to_string(opts.max_sweep_factor) + "*n sweeps",
                            std::move(rep));
  }
  rep.iterations = sweeps;
  return rep;
}

}  // namespace chebqr
