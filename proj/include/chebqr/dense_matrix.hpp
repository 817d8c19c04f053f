#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "chebqr/scalar.hpp"

namespace chebqr {

/// Minimal row-major dense matrix, used by test oracles and the dense
/// QR baseline.  Not part of the solve path.
template <class S>
struct Mat {
  int n = 0;
  std::vector<S> a;

  Mat() = default;
  explicit Mat(int size) : n(size), a(static_cast<std::size_t>(size) * size, S(0)) {
    if (size < 0) throw std::invalid_argument("Mat: negative size");
  }

  S& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  const S& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& x : a) s += abs2(x);
    return std::sqrt(s);
  }
};

}  // namespace chebqr
