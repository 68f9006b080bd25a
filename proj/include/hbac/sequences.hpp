#pragma once
// k-term bonacci numbers and the per-level bias goals of the delta-bonacci
// algorithms.

#include <cmath>
#include <cstdint>
#include <vector>

#include "hbac/errors.hpp"

namespace hbac {

/// First `count` terms a_1..a_count of the `order`-term bonacci sequence:
/// a_1 = a_2 = 1, a_k = a_{k-1} + ... + a_{k-order} (missing terms are 0).
/// order 2 gives Fibonacci, order 3 Tribonacci.
inline std::vector<double> bonacci_sequence(int order, int count) {
  detail::require(order >= 2, "bonacci order must be at least 2");
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) {
    if (k <= 2) {
      a.push_back(1.0);
      continue;
    }
    double sum = 0.0;
    for (int j = 1; j <= order && k - j >= 1; ++j) sum += a[static_cast<std::size_t>(k - j - 1)];
    a.push_back(sum);
  }
  return a;
}

inline double bonacci_number(int order, int k) {
  detail::require(k >= 1, "bonacci index must be positive");
  return bonacci_sequence(order, k).back();
}

inline double fibonacci_number(int k) { return bonacci_number(2, k); }
inline double tribonacci_number(int k) { return bonacci_number(3, k); }

/// Goal bias of spin k (units of eps0) for n spins: a_k * (1 - delta^(n-k+1)).
inline double bonacci_goal(int order, int n, int k, double delta) {
  detail::require(k >= 1 && k <= n, "goal level out of range");
  detail::require(delta >= 0 && delta < 1, "delta must lie in [0, 1)");
  return bonacci_number(order, k) * (1.0 - std::pow(delta, n - (k - 1)));
}

inline double fibonacci_goal(int n, int k, double delta) { return bonacci_goal(2, n, k, delta); }
inline double tribonacci_goal(int n, int k, double delta) { return bonacci_goal(3, n, k, delta); }

}  // namespace hbac
