#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "dbmc/error.hpp"

namespace dbmc {

namespace detail {
inline std::int64_t ipow_checked(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > (std::int64_t{1} << 62) / base) throw size_error("power exceeds integer range");
    r *= base;
  }
  return r;
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  if (a <= 0) return 0;
  return (a + b - 1) / b;
}
}  // namespace detail

// Smallest n' = q^k + k + 1 with n' >= n, scanning k = 1, 2, ...; returns the
// pair (n', k). This is the width the depth bound is stated for; widths between
// n and n' are handled by padding.
inline std::pair<int, int> bound_width(int n, int q = 2) {
  if (n < 1) throw domain_error("unit count must be positive");
  if (q < 2) throw domain_error("alphabet size must be at least 2");
  for (int k = 1;; ++k) {
    std::int64_t np = detail::ipow_checked(q, k) + k + 1;
    if (np >= n) return {static_cast<int>(np), k};
  }
}

// Sufficient number of hidden layers of width n for universal approximation
// over {0..q-1}^n.
inline int sufficient_depth(int n, int q = 2) {
  if (n < 2) throw domain_error("depth bound needs at least two units");
  if (q < 2) throw domain_error("alphabet size must be at least 2");
  auto [np, k] = bound_width(n, q);
  double nprime = static_cast<double>(np);
  double value;
  if (q == 2) {
    value = std::pow(2.0, nprime) / (2.0 * (nprime - std::log2(nprime) - 1.0));
  } else {
    double qd = static_cast<double>(q);
    double denom = qd * (qd - 1.0) * (nprime - std::log(nprime) / std::log(qd) - 1.0);
    value = 1.0 + (std::pow(qd, nprime) - 1.0) / denom;
  }
  return static_cast<int>(std::ceil(value));
}

// Lower bound on the hidden layers any width-n model needs to be a universal
// approximator; parameter counting, floored at 1.
inline int necessary_depth(int n, int q = 2) {
  if (n < 1) throw domain_error("unit count must be positive");
  if (q < 2) throw domain_error("alphabet size must be at least 2");
  std::int64_t num, den;
  if (q == 2) {
    num = detail::ipow_checked(2, n) - (n + 1);
    den = static_cast<std::int64_t>(n) * (n + 1);
  } else {
    std::int64_t w = static_cast<std::int64_t>(n) * (q - 1);
    num = detail::ipow_checked(q, n) - 1;
    den = w * (w + 2);
  }
  std::int64_t d = detail::ceil_div(num, den);
  return static_cast<int>(d < 1 ? 1 : d);
}

// Minimal width of the first hidden layer that still allows approximating
// every visible distribution: n0 - 1 when n0 is even, n0 when odd.
inline int min_first_hidden_width(int n0) {
  if (n0 < 1) throw domain_error("unit count must be positive");
  return n0 % 2 == 0 ? n0 - 1 : n0;
}

// Free parameters of a constant-width-n model with L hidden layers:
// L weight matrices plus L+1 bias vectors.
inline std::int64_t param_count(int n, int L) {
  if (n < 1) throw domain_error("unit count must be positive");
  if (L < 1) throw domain_error("at least one hidden layer");
  return static_cast<std::int64_t>(L) * n * n + static_cast<std::int64_t>(L + 1) * n;
}

struct BoundsReport {
  int n;
  int q;
  int bound_width;   // n'
  int bound_k;       // k with n' = q^k + k + 1
  int sufficient;    // hidden layers that always suffice
  int necessary;     // hidden layers always needed
  int min_width;     // minimal first hidden layer width
  std::int64_t params_at_sufficient;
};

inline BoundsReport bounds_report(int n, int q = 2) {
  BoundsReport r{};
  r.n = n;
  r.q = q;
  auto [np, k] = bound_width(n, q);
  r.bound_width = np;
  r.bound_k = k;
  r.sufficient = sufficient_depth(n, q);
  r.necessary = necessary_depth(n, q);
  r.min_width = min_first_hidden_width(n);
  r.params_at_sufficient = param_count(n, r.sufficient);
  return r;
}

}  // namespace dbmc
