#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "chebqr/qr_core.hpp"

namespace chebqr {

/// Re-reduces an AED window head to Hessenberg form.  The head spans
/// global rows p+1..p+j with a full spike column at global column p and
/// an upper (quasi-)triangular remainder.  Spike entries are annihilated
/// bottom-up; fill below the subdiagonal is chased to the window bottom
/// whenever the chase rotation no longer touches live spike rows (with a
/// strictly triangular remainder that is immediately, reproducing the
/// classic interleaved annihilate/chase rotation sequence).  Band
/// arithmetic runs on a local dense copy of the head; u and v are
/// rotated per rotation and the band is read back at the end, so the
/// rotation count stays O(j^2).
template <class S, class Sink>
void restore_hessenberg(Generators<S>& g, int p, int j, std::vector<S> spike, Sink&& sink) {
  if (j <= 0) return;
  if (j == 1) {
    g.sub[p] = spike[0];
    return;
  }
  // Local block B: row r ~ global p+1+r (r = 0..j-1), col c ~ global p+c
  // (c = 0..j).  Col 0 is the spike; the local subdiagonal is B(r, r)
  // and the local diagonal B(r, r+1).
  std::vector<S> bs(static_cast<std::size_t>(j) * (j + 1), S(0));
  auto B = [&](int r, int c) -> S& { return bs[static_cast<std::size_t>(r) * (j + 1) + c]; };
  for (int r = 0; r < j; ++r) {
    B(r, 0) = spike[r];
    for (int c = 1; c <= j; ++c) {
      const int gi = p + 1 + r, gj = p + c;
      if (gi == gj)
        B(r, c) = g.diag[gi];
      else if (gi == gj + 1)
        B(r, c) = g.sub[gj];
      else if (gi > gj + 1)
        B(r, c) = S(0);
      else if (gj == gi + 1)
        B(r, c) = g.super(gi);
      else
        B(r, c) = g.upper(gi, gj);
    }
  }

  // Similarity by G at local rows (r, r+1) <-> global rows (p+1+r, p+2+r)
  // <-> local cols (r+1, r+2).
  auto rot = [&](const Givens<S>& G, int r) {
    for (int c = 0; c <= j; ++c) G.apply_left(B(r, c), B(r + 1, c));
    for (int rr = 0; rr < j; ++rr) G.apply_right(B(rr, r + 1), B(rr, r + 2));
    rotate_uv(g, G, p + 1 + r, sink);
  };

  // A chase rotation at rows (r, r+1) is admissible once both spike
  // entries at those rows are zero; otherwise it would refill an
  // annihilated spike entry.  Deferred fill (it arises only next to kept
  // 2x2 Schur blocks) is swept up after the remaining annihilations.
  // A chase rotation at rows (ru, ru+1) removing the entry in column bc
  // is admissible once (a) both spike entries at those rows are zero (it
  // would refill an annihilated one) and (b) row ru carries no other
  // pending below-subdiagonal entry (the rotation would smear it down,
  // which can cycle).  Deferred entries become admissible after the
  // remaining spike annihilations pass their rows.
  auto chase_admissible = [&](int ru, int bc) {
    if (B(ru, 0) != S(0) || B(ru + 1, 0) != S(0)) return false;
    for (int c = 1; c < ru; ++c)
      if (c != bc && B(ru, c) != S(0)) return false;
    return true;
  };
  long budget = 64L * j * j + 256;
  auto chase_all = [&]() {
    while (true) {
      int br = -1, bc = -1;
      for (int c = 1; c <= j && br < 0; ++c)
        for (int r = c + 1; r < j; ++r)
          if (B(r, c) != S(0) && chase_admissible(r - 1, c)) {
            br = r;
            bc = c;
            break;
          }
      if (br < 0) return;
      if (--budget < 0) throw std::logic_error("restore_hessenberg: chase budget exceeded");
      auto [G, rv] = make_givens(B(br - 1, bc), B(br, bc));
      rot(G, br - 1);
      B(br - 1, bc) = rv;
      B(br, bc) = S(0);
    }
  };

  for (int a = j - 1; a >= 1; --a) {  // annihilate the spike entry at local row a
    if (B(a, 0) != S(0)) {
      auto [G, rv] = make_givens(B(a - 1, 0), B(a, 0));
      rot(G, a - 1);
      B(a - 1, 0) = rv;
      B(a, 0) = S(0);
    }
    chase_all();
  }
  chase_all();

  // read the band back
  g.sub[p] = B(0, 0);
  for (int r = 0; r < j; ++r) {
    g.diag[p + 1 + r] = B(r, r + 1);
    if (r >= 1) g.sub[p + r] = B(r, r);
  }
}

namespace detail {

template <class S>
struct AedCheckpoint {
  std::vector<S> diag, sub, u, v;
};

template <class S>
AedCheckpoint<S> save_window(const Generators<S>& g, int p, int hi) {
  AedCheckpoint<S> cp;
  cp.diag.assign(g.diag.begin() + p, g.diag.begin() + hi + 1);
  cp.sub.assign(g.sub.begin() + p, g.sub.begin() + hi);
  cp.u.assign(g.u.begin() + p, g.u.begin() + hi + 1);
  cp.v.assign(g.v.begin() + p, g.v.begin() + hi + 1);
  return cp;
}

template <class S>
void restore_window(Generators<S>& g, int p, int hi, const AedCheckpoint<S>& cp) {
  std::copy(cp.diag.begin(), cp.diag.end(), g.diag.begin() + p);
  std::copy(cp.sub.begin(), cp.sub.end(), g.sub.begin() + p);
  std::copy(cp.u.begin(), cp.u.end(), g.u.begin() + p);
  std::copy(cp.v.begin(), cp.v.end(), g.v.begin() + p);
}

}  // namespace detail

/// One aggressive-early-deflation step on the trailing k x k block of the
/// active window [lo, hi]:
///   (1) the block is brought to Schur form by the structured QR (no
///       nested AED), accumulating every rotation onto the spike vector
///       Q* (beta_{hi-k} e_1) and the global u, v;
///   (2) trailing spike entries with |x_i| < min(|beta|, |d_i|) eps are
///       deflated (2x2 blocks deflate as a unit, tested against the pair
///       eigenvalue magnitude);
///   (3) the undeflated head is restored to Hessenberg form;
///   (4) undeflated eigenvalues are returned as shift candidates.
/// A non-converging window solve aborts the step and restores the window.
template <class S, class Sink>
detail::AedOutcome aed_step(Generators<S>& g, int lo, int hi, int k, const SolveOptions& opts,
                            StabilityTracker& tracker, Sink& sink, std::mt19937_64& rng,
                            std::vector<DeflationEvent>* defl_log, long sweep_now) {
  constexpr bool kComplex = is_complex_v<S>;
  const int p = hi - k;  // coupling column; window rows p+1..hi
  const S beta_spike = g.sub[p];
  detail::AedOutcome out;

  detail::AedCheckpoint<S> cp = detail::save_window(g, p, hi);
  const StabilityTracker tracker_cp = tracker;

  std::vector<S> spike(k, S(0));
  spike[0] = beta_spike;
  auto spike_sink = [&](const Givens<S>& G, int r) {
    const int a = r - (p + 1);
    if (a >= 0 && a + 1 < k) G.apply_left(spike[a], spike[a + 1]);
    sink(G, r);
  };

  SolveOptions wopts = opts;
  wopts.use_aed = false;
  wopts.diagnostics = nullptr;
  const long wsweeps =
      detail::qr_run<S, decltype(spike_sink), false>(g, p + 1, hi, /*schur=*/true, nullptr,
                                                     nullptr, wopts, tracker, spike_sink, rng,
                                                     opts.max_sweep_factor * k, detail::NoAed{});
  if (wsweeps < 0) {
    detail::restore_window(g, p, hi, cp);
    tracker = tracker_cp;
    out.aborted = true;
    return out;
  }

  double spike_norm2 = 0.0;
  for (const auto& x : spike) spike_norm2 += abs2(x);

  // bottom-up deflation over the (quasi-)triangular window
  const double babs = std::abs(beta_spike);
  int j = k;
  while (j >= 1) {
    const int row = p + j;
    if (!kComplex && j >= 2 && g.sub[row - 1] != S(0)) {
      auto [l1, l2] = eig2x2_real(real_(g.diag[row - 1]), real_(g.super(row - 1)),
                                  real_(g.sub[row - 1]), real_(g.diag[row]));
      (void)l2;
      const double th = std::min(babs, std::abs(l1)) * opts.aed_eps;
      if (std::abs(spike[j - 1]) < th && std::abs(spike[j - 2]) < th)
        j -= 2;
      else
        break;
    } else {
      const double th = std::min(babs, std::abs(g.diag[row])) * opts.aed_eps;
      if (std::abs(spike[j - 1]) < th)
        j -= 1;
      else
        break;
    }
  }
  out.deflated = k - j;

  // harvest shifts from the undeflated head (values survive restoration)
  std::vector<cdouble> head_eigs;
  for (int q = j; q >= 1;) {
    const int row = p + q;
    if (!kComplex && q >= 2 && g.sub[row - 1] != S(0)) {
      auto [l1, l2] = eig2x2_real(real_(g.diag[row - 1]), real_(g.super(row - 1)),
                                  real_(g.sub[row - 1]), real_(g.diag[row]));
      head_eigs.push_back(l1);
      head_eigs.push_back(l2);
      q -= 2;
    } else {
      head_eigs.push_back(to_complex(g.diag[row]));
      q -= 1;
    }
  }
  out.shifts = detail::plans_from_shifts<kComplex>(std::move(head_eigs), to_complex(g.diag[hi]));

  if (j == 0) {
    g.sub[p] = S(0);
    if (defl_log) defl_log->push_back({p + 1, sweep_now});
  } else {
    spike.resize(j);
    restore_hessenberg(g, p, j, std::move(spike), sink);
    if (out.deflated > 0 && defl_log) defl_log->push_back({p + j + 1, sweep_now});
  }

  if (opts.diagnostics) {
    (*opts.diagnostics) << "{\"aed\":{\"k\":" << k << ",\"deflated\":" << out.deflated
                        << ",\"shifts_returned\":" << out.shifts.size()
                        << ",\"spike_norm\":" << std::sqrt(spike_norm2) << "}}\n";
  }
  (void)lo;
  return out;
}

}  // namespace chebqr
