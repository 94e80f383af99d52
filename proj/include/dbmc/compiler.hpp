#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "dbmc/bounds.hpp"
#include "dbmc/construct.hpp"
#include "dbmc/distribution.hpp"
#include "dbmc/error.hpp"
#include "dbmc/inference.hpp"
#include "dbmc/model.hpp"
#include "dbmc/plan.hpp"
#include "dbmc/state_space.hpp"

namespace dbmc {

struct CompileConfig {
  double tolerance = 1e-3;
  double beta0 = 8.0;      // first sharpness scale tried
  double max_beta = 64.0;  // scale doubles until it would exceed this
  double smoothing = -1.0; // mix-in weight toward uniform; <0 picks automatically
  int max_depth = 0;       // refuse plans needing more hidden layers; 0 = any
};

struct Certificate {
  double kl = std::numeric_limits<double>::infinity();
  bool converged = false;
  int depth = 0;               // hidden layers of the returned model
  double smoothing = 0.0;      // uniform mix actually applied
  double beta_base = 0.0;      // scale of the accepted attempt
  std::vector<double> betas;   // backbone sharpness per weight layer, bottom up
  int bound_sufficient = 0;    // depth that provably suffices at this width
};

struct CompileResult {
  DbmParams model;
  Certificate certificate;
};

namespace detail {

inline bool nearly_uniform(const Distribution& t) {
  double u = 1.0 / static_cast<double>(t.space.size());
  for (double p : t.probs)
    if (std::abs(p - u) > 1e-12 * u) return false;
  return true;
}

// KL(target || model) from the model's exact visible log marginal; +inf when
// the model gives zero mass to a target state (cannot happen for the models
// built here, which are strictly positive).
inline double kl_against_log(const Distribution& target, const std::vector<double>& log_m) {
  double kl = 0.0;
  for (StateIndex i = 0; i < target.space.size(); ++i) {
    double t = target.probs[i];
    if (t <= 0.0) continue;
    if (log_m[i] == -std::numeric_limits<double>::infinity())
      return std::numeric_limits<double>::infinity();
    kl += t * (std::log(t) - log_m[i]);
  }
  return std::max(kl, 0.0);
}

struct Attempt {
  DbmParams model;
  std::vector<double> betas;
};

// One bottom-up assembly pass at a base sharpness scale. Levels are pulled
// backward from the visible target: un-share the mass the step moved, divide
// out the tilt of the layer just built, renormalize, repeat; the last level is
// handed to the RBM builder.
//
// The division is exact, but it leaves the layers above the job of realizing
// mass ratios as wide as the tilt spread below, and any mass they misplace is
// re-amplified by that same spread on the way down. A leak of e^-m survives
// the descent only if m exceeds the total spread underneath. So each level's
// working scale is the base scale plus the accumulated tilt spread of the
// layers already built: log-odds clamp, backbone margin and the RBM sharpness
// all grow with it, keeping every misplaced-mass term at e^-scale after
// amplification. With a constant scale instead, stacking diverges no matter
// how sharp the layers are.
inline Attempt assemble(const SharingPlan& plan, const std::vector<double>& log_target,
                        double scale) {
  const StateSpace& space = plan.space;
  const int n = space.units(), q = space.alphabet();
  const int steps = static_cast<int>(plan.steps.size());
  std::vector<double> D = log_target;

  // weight layer k of the model hosts step (steps - 1 - k)
  std::vector<FeedforwardLayer> layers;  // bottom up
  std::vector<double> betas;
  double amp = 0.0;  // sum of tilt spreads of the layers built so far
  for (int j = steps - 1; j >= 0; --j) {
    const SupportSet& support = plan.supports[static_cast<std::size_t>(j)];
    std::vector<SharingFlow> flows = step_flows_clean(support, plan.steps[static_cast<std::size_t>(j)]);
    const double level_scale = scale + amp;
    std::vector<double> log_odds;
    double lmax = 0.0;
    for (const SharingFlow& f : flows) {
      double num = D[f.target], den = D[f.source];
      double lo;
      if (num == -std::numeric_limits<double>::infinity())
        lo = -level_scale;
      else if (den == -std::numeric_limits<double>::infinity())
        lo = level_scale;
      else
        lo = std::clamp(num - den, -level_scale, level_scale);
      lmax = std::max(lmax, std::abs(lo));
      log_odds.push_back(lo);
    }
    double beta = n * (lmax + level_scale);
    FeedforwardLayer layer = build_sharing_layer_logodds(
        support, plan.steps[static_cast<std::size_t>(j)], beta, log_odds);

    for (const SharingFlow& f : flows) {
      D[f.source] = log_sum_exp({D[f.source], D[f.target]});
      D[f.target] = -std::numeric_limits<double>::infinity();
    }
    std::vector<double> tilt = layer_tilt_log(layer);
    for (StateIndex x = 0; x < space.size(); ++x) D[x] -= tilt[x];
    double lz = log_sum_exp(D);
    for (double& v : D) v -= lz;
    auto [t_lo, t_hi] = std::minmax_element(tilt.begin(), tilt.end());
    amp += *t_hi - *t_lo;

    layers.push_back(std::move(layer));
    betas.push_back(beta);
  }

  RbmParams rbm = build_rbm_support_log(space, plan.base_runs, D, scale + amp);
  betas.push_back(scale + amp);

  std::vector<int> widths(static_cast<std::size_t>(steps) + 2, n);
  std::vector<std::vector<double>> weights, biases;
  for (const FeedforwardLayer& l : layers) {
    weights.push_back(l.weight);
    biases.push_back(l.bias);
  }
  weights.push_back(rbm.raw_weights(0));
  biases.push_back(rbm.raw_biases(0));
  biases.push_back(rbm.raw_biases(1));
  return Attempt{DbmParams::one_hot(q, widths, std::move(weights), std::move(biases)),
                 std::move(betas)};
}

}  // namespace detail

// Builds a deep Boltzmann machine whose visible marginal approximates the
// target within cfg.tolerance in KL divergence. The support plan fixes the
// architecture; accuracy rises with the sharpness scale, which doubles from
// cfg.beta0 until the tolerance is met or cfg.max_beta stops it. A target with
// zeros is first smoothed toward uniform, since the models built here are
// strictly positive. On a failed tolerance the best attempt is still returned
// with converged = false.
inline CompileResult compile(const Distribution& target, const CompileConfig& cfg = {}) {
  const StateSpace& space = target.space;
  const int n = space.units(), q = space.alphabet();
  if (!(cfg.tolerance > 0.0)) throw domain_error("tolerance must be positive");
  if (!(cfg.beta0 > 0.0)) throw domain_error("beta0 must be positive");
  if (cfg.smoothing >= 1.0) throw domain_error("smoothing must be below 1");

  Certificate cert;
  cert.bound_sufficient = n >= 2 ? sufficient_depth(n, q) : 1;

  if (detail::nearly_uniform(target)) {
    // the zero model is exactly uniform
    DbmParams m = DbmParams::zeros(q, {n, n});
    cert.kl = 0.0;
    cert.converged = true;
    cert.depth = 1;
    cert.betas = {0.0};
    return CompileResult{std::move(m), std::move(cert)};
  }

  double lambda = cfg.smoothing;
  if (lambda < 0.0)
    lambda = *std::min_element(target.probs.begin(), target.probs.end()) > 0.0
                 ? 0.0
                 : cfg.tolerance / 2.0;
  cert.smoothing = lambda;
  Distribution smoothed = target;
  if (lambda > 0.0) {
    double u = lambda / static_cast<double>(space.size());
    for (double& p : smoothed.probs) p = (1.0 - lambda) * p + u;
  }

  SharingPlan plan = plan_supports(n, q);
  if (cfg.max_depth > 0 && plan.depth() > cfg.max_depth)
    throw plan_error("support plan needs more hidden layers than max_depth allows");
  cert.depth = plan.depth();

  std::vector<double> log_target(space.size());
  for (StateIndex i = 0; i < space.size(); ++i) log_target[i] = std::log(smoothed.probs[i]);

  std::optional<detail::Attempt> best;
  for (double scale = cfg.beta0;; scale *= 2.0) {
    detail::Attempt attempt = detail::assemble(plan, log_target, scale);
    double kl = detail::kl_against_log(target, layer_log_marginal(attempt.model, 0));
    if (kl < cert.kl) {
      cert.kl = kl;
      cert.beta_base = scale;
      cert.betas = attempt.betas;
      best = std::move(attempt);
    }
    if (cert.kl <= cfg.tolerance) {
      cert.converged = true;
      break;
    }
    if (scale * 2.0 > std::max(cfg.max_beta, cfg.beta0)) break;
  }
  return CompileResult{std::move(best->model), std::move(cert)};
}

}  // namespace dbmc
