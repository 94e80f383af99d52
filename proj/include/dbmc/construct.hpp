#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dbmc/distribution.hpp"
#include "dbmc/error.hpp"
#include "dbmc/model.hpp"
#include "dbmc/plan.hpp"
#include "dbmc/state_space.hpp"

// Layer constructions. Everything here emits one-hot parameters, including for
// binary alphabets: with scores 2*beta*[x_i = a] every output unit's local
// partition sum is the same constant for all inputs, so a copy layer leaves
// the marginal of the layer above untouched. That property is what lets the
// compiler stack layers without bias corrections; the compact encoding cannot
// express it.

namespace dbmc {

namespace detail {

// flat index into a one-hot weight table [i][a][j][b]
inline std::size_t oh(int q, int n_in, int i, int a, int j, int b) {
  return ((static_cast<std::size_t>(i) * q + a) * n_in + j) * q + b;
}

}  // namespace detail

// Identity layer: each output unit copies its input unit, error sigma(-2 beta)
// per unit per wrong symbol.
inline FeedforwardLayer build_copy_layer(const StateSpace& space, double beta) {
  const int n = space.units(), q = space.alphabet();
  std::vector<double> w(static_cast<std::size_t>(n) * q * n * q, 0.0);
  std::vector<double> b(static_cast<std::size_t>(n) * q, 0.0);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < q; ++a) w[detail::oh(q, n, i, a, i, a)] = 2.0 * beta;
  return FeedforwardLayer(q, n, n, Encoding::one_hot, std::move(w), std::move(b));
}

// One sharing step as a stochastic layer. Backbone: copy at sharpness beta.
// For each pair, the output unit at the pair's flip coordinate gets its flip
// symbol's score boosted by
//   2 beta + logodds(x) - gamma * d(x),   gamma = beta / n,
// where logodds(x) picks the flow's log-odds when x sits on a source (read off
// the pair's split coordinate) and d(x) counts disagreements with the pair
// outside that coordinate, plus one for a split-coordinate symbol no source
// carries. Sources then flip with exactly the requested odds, while any other
// support state sees the boost suppressed below -(gamma - max |logodds|).
// Callers must keep beta / n above max |logodds| by the margin they need.
//
// log_odds entries align with step_flows(support, step); entries must be
// finite and are not clamped here.
inline FeedforwardLayer build_sharing_layer_logodds(const SupportSet& support,
                                                    const SharingStep& step, double beta,
                                                    const std::vector<double>& log_odds) {
  const StateSpace& space = support.space();
  const int n = space.units(), q = space.alphabet();
  if (!(beta > 0.0) || !std::isfinite(beta)) throw domain_error("beta must be positive");
  std::vector<SharingFlow> flows = step_flows(support, step);
  if (log_odds.size() != flows.size())
    throw dimension_error("need one log-odds value per flow");
  for (double v : log_odds) {
    if (!std::isfinite(v)) throw domain_error("log-odds must be finite");
    if (std::abs(v) * n >= beta)
      throw domain_error("beta too small for the requested log-odds");
  }

  const double gamma = beta / n;
  std::vector<double> w(static_cast<std::size_t>(n) * q * n * q, 0.0);
  std::vector<double> b(static_cast<std::size_t>(n) * q, 0.0);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < q; ++a) w[detail::oh(q, n, i, a, i, a)] = 2.0 * beta;

  for (std::size_t pi = 0; pi < step.pairs.size(); ++pi) {
    const SharingPair& pr = step.pairs[pi];
    State lo = space.decode(pr.first), hi = space.decode(pr.second);
    int d = adjacent_direction(lo, hi);
    const int fc = pr.flip_coord, fs = pr.flip_symbol;

    // boost constant
    b[static_cast<std::size_t>(fc) * q + fs] += 2.0 * beta;
    // disagreement penalty outside the split coordinate (lo and hi agree there)
    for (int m = 0; m < n; ++m) {
      if (m == d) continue;
      for (int sym = 0; sym < q; ++sym)
        if (sym != lo[static_cast<std::size_t>(m)])
          w[detail::oh(q, n, fc, fs, m, sym)] -= gamma;
    }
    // split coordinate: sources select their own log-odds, other symbols count
    // as one disagreement
    std::vector<int> source_syms;
    for (std::size_t fi = 0; fi < flows.size(); ++fi) {
      if (flows[fi].pair_index != static_cast<int>(pi)) continue;
      State src = space.decode(flows[fi].source);
      int sym = src[static_cast<std::size_t>(d)];
      source_syms.push_back(sym);
      w[detail::oh(q, n, fc, fs, d, sym)] += log_odds[fi];
    }
    for (int sym = 0; sym < q; ++sym)
      if (std::find(source_syms.begin(), source_syms.end(), sym) == source_syms.end())
        w[detail::oh(q, n, fc, fs, d, sym)] -= gamma;
    // drop the backbone diagonal of the boosted row: an input already carrying
    // the flip symbol must not see copy and boost stack, or its local partition
    // sum would exceed every support state's by ~2 beta and amplify whatever
    // little mass the level above leaks there. Such inputs still copy
    // themselves through the boost alone, with margin 2 beta - gamma d(x).
    w[detail::oh(q, n, fc, fs, fc, fs)] -= 2.0 * beta;
  }
  return FeedforwardLayer(q, n, n, Encoding::one_hot, std::move(w), std::move(b));
}

// Fraction front end: log-odds log(f / (1-f)), with f in {0, 1} replaced by
// the nearest value beta/(2n) can express.
inline FeedforwardLayer build_sharing_layer(const SupportSet& support, const SharingStep& step,
                                            double beta) {
  const int n = support.space().units();
  const double cap = beta / (2.0 * n);
  std::vector<SharingFlow> flows = step_flows(support, step);
  std::vector<double> log_odds;
  log_odds.reserve(flows.size());
  for (const SharingFlow& f : flows) {
    double lo = std::log(f.fraction) - std::log1p(-f.fraction);
    log_odds.push_back(std::clamp(lo, -cap, cap));
  }
  return build_sharing_layer_logodds(support, step, beta, log_odds);
}

// log of the local partition sum of every output unit, accumulated per input
// state: tilt(x) = sum_i log sum_a exp score_i(a, x). Stacking the layer under
// a model multiplies the model's bottom marginal by exp(tilt) pointwise, so
// the compiler divides this out of the next level's target.
inline std::vector<double> layer_tilt_log(const FeedforwardLayer& layer) {
  StateSpace in_space(layer.n_in, layer.q);
  std::vector<double> tilt(in_space.size(), 0.0);
  std::vector<double> scores(static_cast<std::size_t>(layer.q));
  State x(static_cast<std::size_t>(layer.n_in), 0);
  StateIndex xi = 0;
  do {
    double t = 0.0;
    for (int i = 0; i < layer.n_out; ++i) {
      for (int a = 0; a < layer.q; ++a) scores[static_cast<std::size_t>(a)] = layer.score(i, a, x);
      t += log_sum_exp(scores);
    }
    tilt[xi++] = t;
  } while (in_space.next(x));
  return tilt;
}

// RBM whose visible marginal approximates exp(log_mass) restricted to a union
// of runs sharing one line coordinate. Anchors must be pairwise distinct off
// that coordinate; the first run is carried by the visible biases alone, and
// each further run by one hidden unit that activates only on its run, with
//   factor(x) = 1 + exp(match gate + per-symbol mass correction).
// Entries of log_mass outside the runs are ignored while -inf entries on a run
// are floored 4 beta + 40 below the peak. Needs runs.size() - 1 <= n hidden
// units; all sharpness scales adapt to the mass range so accuracy is
// exp(-2 beta)-grade regardless of the target.
inline RbmParams build_rbm_support_log(const StateSpace& space,
                                       const std::vector<SupportRun>& runs,
                                       const std::vector<double>& log_mass, double beta) {
  const int n = space.units(), q = space.alphabet();
  if (!(beta > 0.0) || !std::isfinite(beta)) throw domain_error("beta must be positive");
  if (runs.empty()) throw plan_error("need at least one run");
  if (static_cast<int>(runs.size()) - 1 > n)
    throw plan_error("more runs than hidden units can carry");
  if (log_mass.size() != space.size()) throw dimension_error("log mass vector size mismatch");
  const int c = runs.front().coord;
  const std::size_t ell = runs.size();
  for (const SupportRun& r : runs) {
    if (r.coord != c) throw plan_error("runs must share their line coordinate");
    if (r.first_symbol < 0 || r.length < 1 || r.first_symbol + r.length > q)
      throw plan_error("run symbols out of range");
  }
  std::vector<State> anchors;
  for (const SupportRun& r : runs) {
    State a = space.decode(r.anchor);
    if (a[static_cast<std::size_t>(c)] != r.first_symbol)
      throw plan_error("run anchor must carry the run's first symbol");
    a[static_cast<std::size_t>(c)] = 0;  // canonical off-line pattern
    for (const State& seen : anchors)
      if (seen == a) throw plan_error("runs must lie on distinct lines");
    anchors.push_back(std::move(a));
  }

  // clamped log masses per (run, symbol), shifted so the peak sits at zero
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < ell; ++r) {
    State x = anchors[r];
    for (int s = 0; s < runs[r].length; ++s) {
      x[static_cast<std::size_t>(c)] =
          static_cast<std::uint8_t>(runs[r].first_symbol + s);
      double v = log_mass[space.encode(x)];
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw domain_error("log masses must not be +inf or nan");
      peak = std::max(peak, v);
    }
  }
  if (!std::isfinite(peak)) throw degenerate_product_error("all run masses vanish");
  const double floor = -(4.0 * beta + 40.0);
  auto clamped = [&](std::size_t r, int s) {
    State x = anchors[r];
    x[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(s);
    return std::max(log_mass[space.encode(x)] - peak, floor);
  };

  // base biases: run 0 on the line coordinate, anchor 0 elsewhere
  auto in_run = [&](std::size_t r, int s) {
    return s >= runs[r].first_symbol && s < runs[r].first_symbol + runs[r].length;
  };
  double drop = 0.0;  // worst base-vs-target shortfall a hidden unit must make up
  for (std::size_t r = 1; r < ell; ++r)
    for (int s = 0; s < q; ++s)
      if (in_run(r, s)) drop = std::max(drop, (in_run(0, s) ? clamped(0, s) : floor) - clamped(r, s));
  const double beta_r = beta + 0.5 * drop;

  std::vector<double> vb(static_cast<std::size_t>(n) * q, 0.0);
  for (int m = 0; m < n; ++m) {
    if (m == c) continue;
    for (int s = 0; s < q; ++s)
      if (s != anchors[0][static_cast<std::size_t>(m)])
        vb[static_cast<std::size_t>(m) * q + s] = -2.0 * beta_r;
  }
  for (int s = 0; s < q; ++s)
    vb[static_cast<std::size_t>(c) * q + s] = in_run(0, s) ? clamped(0, s) : floor - 2.0 * beta_r;

  // activation strengths and gate scale
  std::vector<double> theta(ell, 0.0);
  double act_max = 0.0;
  for (std::size_t r = 1; r < ell; ++r) {
    int mism = 0;
    for (int m = 0; m < n; ++m)
      if (m != c && anchors[r][static_cast<std::size_t>(m)] != anchors[0][static_cast<std::size_t>(m)])
        ++mism;
    theta[r] = 2.0 * beta_r * mism;
    for (int s = 0; s < q; ++s)
      if (in_run(r, s))
        act_max = std::max(act_max, clamped(r, s) -
                                        vb[static_cast<std::size_t>(c) * q + s] + theta[r]);
  }
  const double gate = beta + 0.5 * (act_max + 2.0 * beta_r * n);

  std::vector<double> w(static_cast<std::size_t>(n) * q * n * q, 0.0);
  std::vector<double> hb(static_cast<std::size_t>(n) * q, 0.0);
  for (std::size_t r = 1; r < ell; ++r) {
    const int j = static_cast<int>(r) - 1;  // hidden unit, symbol 1 = active
    hb[static_cast<std::size_t>(j) * q + 1] = theta[r];
    for (int s = 2; s < q; ++s) hb[static_cast<std::size_t>(j) * q + s] = -2.0 * beta_r;
    for (int m = 0; m < n; ++m) {
      if (m == c) continue;
      for (int s = 0; s < q; ++s)
        if (s != anchors[r][static_cast<std::size_t>(m)])
          w[detail::oh(q, n, m, s, j, 1)] = -2.0 * gate;
    }
    for (int s = 0; s < q; ++s)
      w[detail::oh(q, n, c, s, j, 1)] =
          in_run(r, s) ? clamped(r, s) - vb[static_cast<std::size_t>(c) * q + s] : -2.0 * gate;
  }

  return DbmParams::one_hot(q, {n, n}, {std::move(w)},
                            {std::move(vb), std::move(hb)});
}

inline RbmParams build_rbm_support(const StateSpace& space, const std::vector<SupportRun>& runs,
                                   const Distribution& target, double beta) {
  if (target.space != space) throw dimension_error("target on a different space");
  std::vector<double> lm(target.probs.size());
  for (std::size_t i = 0; i < lm.size(); ++i) lm[i] = std::log(target.probs[i]);
  return build_rbm_support_log(space, runs, lm, beta);
}

}  // namespace dbmc
