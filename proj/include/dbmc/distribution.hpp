#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "dbmc/error.hpp"
#include "dbmc/state_space.hpp"

namespace dbmc {

// Dense probability vector over a StateSpace, entries in enumeration order.
struct Distribution {
  StateSpace space;
  std::vector<double> probs;

  Distribution(StateSpace s, std::vector<double> p) : space(s), probs(std::move(p)) {
    if (probs.size() != space.size())
      throw dimension_error("probability vector length must equal q^n");
    for (double v : probs) {
      if (!std::isfinite(v)) throw domain_error("probability entries must be finite");
      if (v < 0.0) throw domain_error("probability entries must be non-negative");
    }
  }

  double operator[](StateIndex i) const { return probs[i]; }
};

inline Distribution uniform(const StateSpace& space) {
  return Distribution(space,
                      std::vector<double>(space.size(), 1.0 / static_cast<double>(space.size())));
}

inline Distribution point_mass(const StateSpace& space, StateIndex at) {
  if (at >= space.size()) throw domain_error("point mass index out of range");
  std::vector<double> p(space.size(), 0.0);
  p[at] = 1.0;
  return Distribution(space, p);
}

inline double total_mass(const Distribution& d) {
  double s = 0.0;
  for (double v : d.probs) s += v;
  return s;
}

// Rescales to unit mass. Zero total mass cannot be normalized.
inline Distribution normalize(const Distribution& d) {
  double s = total_mass(d);
  if (s <= 0.0) throw degenerate_product_error("cannot normalize zero mass");
  std::vector<double> p(d.probs);
  for (double& v : p) v /= s;
  return Distribution(d.space, p);
}

inline double total_variation(const Distribution& a, const Distribution& b) {
  if (a.space != b.space) throw dimension_error("distributions on different spaces");
  double s = 0.0;
  for (StateIndex i = 0; i < a.space.size(); ++i) s += std::abs(a.probs[i] - b.probs[i]);
  return 0.5 * s;
}

// KL divergence D(target || model) in nats. Terms with target(x) = 0 contribute
// zero; a state with target(x) > 0 but model(x) = 0 makes the divergence +inf,
// returned as a value rather than thrown, so callers can treat it as "no overlap".
inline double kl_divergence(const Distribution& target, const Distribution& model) {
  if (target.space != model.space) throw dimension_error("distributions on different spaces");
  double kl = 0.0;
  for (StateIndex i = 0; i < target.space.size(); ++i) {
    double t = target.probs[i];
    if (t == 0.0) continue;
    double m = model.probs[i];
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    kl += t * std::log(t / m);
  }
  return kl;
}

// Normalized elementwise product (r * s)(z) = r(z) s(z) / sum_z' r(z') s(z').
inline Distribution hadamard(const Distribution& r, const Distribution& s) {
  if (r.space != s.space) throw dimension_error("distributions on different spaces");
  std::vector<double> p(r.space.size());
  double mass = 0.0;
  for (StateIndex i = 0; i < r.space.size(); ++i) {
    p[i] = r.probs[i] * s.probs[i];
    mass += p[i];
  }
  if (mass <= 0.0) throw degenerate_product_error("hadamard product has zero mass");
  for (double& v : p) v /= mass;
  return Distribution(r.space, p);
}

// Division inverse of hadamard: returns s' with hadamard(r, s') = s.
// Requires r strictly positive everywhere.
inline Distribution neutralize(const Distribution& r, const Distribution& s) {
  if (r.space != s.space) throw dimension_error("distributions on different spaces");
  std::vector<double> p(r.space.size());
  double mass = 0.0;
  for (StateIndex i = 0; i < r.space.size(); ++i) {
    if (r.probs[i] <= 0.0) throw positivity_error("neutralize requires strictly positive r");
    p[i] = s.probs[i] / r.probs[i];
    mass += p[i];
  }
  if (mass <= 0.0) throw degenerate_product_error("neutralized distribution has zero mass");
  for (double& v : p) v /= mass;
  return Distribution(r.space, p);
}

// Conditional distribution over the unclamped coordinates given that coordinate
// coords[k] equals values[k] for every k. Remaining coordinates keep their
// relative order, so the result lives on {0..q-1}^(n - #clamped).
inline Distribution condition_split(const Distribution& p, const std::vector<int>& coords,
                                    const std::vector<int>& values) {
  int n = p.space.units();
  int q = p.space.alphabet();
  if (coords.size() != values.size())
    throw dimension_error("clamp coordinates and values differ in length");
  if (coords.empty()) throw dimension_error("no coordinates to clamp");
  std::vector<int> clamp(n, -1);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    int c = coords[k];
    if (c < 0 || c >= n) throw dimension_error("clamp coordinate out of range");
    if (clamp[c] >= 0) throw domain_error("coordinate clamped twice");
    if (values[k] < 0 || values[k] >= q) throw domain_error("clamp value outside alphabet");
    clamp[c] = values[k];
  }
  int remaining = n - static_cast<int>(coords.size());
  if (remaining < 1) throw dimension_error("clamping all coordinates leaves no distribution");

  StateSpace sub(remaining, q);
  std::vector<double> out(sub.size(), 0.0);
  double mass = 0.0;
  State x(n, 0);
  State y(remaining);
  StateIndex i = 0;
  do {
    bool match = true;
    for (int c = 0; c < n && match; ++c)
      if (clamp[c] >= 0 && x[c] != clamp[c]) match = false;
    if (match) {
      int j = 0;
      for (int c = 0; c < n; ++c)
        if (clamp[c] < 0) y[j++] = x[c];
      out[sub.encode(y)] = p.probs[i];
      mass += p.probs[i];
    }
    ++i;
  } while (p.space.next(x));
  if (mass <= 0.0) throw conditioning_error("conditioning event has zero probability");
  for (double& v : out) v /= mass;
  return Distribution(sub, out);
}

// States carrying strictly positive probability.
inline SupportSet support_of(const Distribution& d) {
  std::vector<StateIndex> members;
  for (StateIndex i = 0; i < d.space.size(); ++i)
    if (d.probs[i] > 0.0) members.push_back(i);
  return SupportSet(d.space, members);
}

// Stable log(sum_i exp(v[i])). Empty input gives -inf.
inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace dbmc
