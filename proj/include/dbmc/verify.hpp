#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dbmc/distribution.hpp"
#include "dbmc/inference.hpp"
#include "dbmc/model.hpp"
#include "dbmc/state_space.hpp"

namespace dbmc {

struct VerifyOptions {
  std::uint64_t seed = 1;
  int split_trials = 4;  // random interface bias splits per cut, plus B_k itself
  StateIndex oracle_limit = StateIndex{1} << 20;
};

// Maximum absolute deviations found by each check; zero where a check does not
// apply (too-small depth, joint space over the enumeration limit).
struct VerifyReport {
  bool oracle_checked = false;
  double log_partition_dev = 0.0;  // transfer matrices vs enumeration
  double marginal_dev = 0.0;       // per-layer marginals vs enumeration
  double partition_consistency = 0.0;  // log Z read at every layer must agree
  double chain_rule_dev = 0.0;     // p(x_0) vs conditional applied to p(x_1)
  double composition_dev = 0.0;    // hadamard identity across cuts and splits
  double factorization_dev = 0.0;  // visible marginal via bottom RBM + hadamard

  double max_dev() const {
    double d = std::max({log_partition_dev, marginal_dev, partition_consistency,
                         chain_rule_dev, composition_dev, factorization_dev});
    return d;
  }
};

namespace detail {

// Marginal of layer k summed out of the joint enumeration.
inline Distribution oracle_layer_marginal(const DbmParams& m, const Distribution& joint, int k) {
  StateSpace layer_space(m.width(k), m.alphabet());
  std::vector<double> p(layer_space.size(), 0.0);
  State x(static_cast<std::size_t>(m.total_units()), 0);
  StateIndex i = 0;
  do {
    std::vector<State> layers = split_layers(m, x);
    p[layer_space.encode(layers[static_cast<std::size_t>(k)])] += joint.probs[i];
    ++i;
  } while (joint.space.next(x));
  return Distribution(layer_space, p);
}

}  // namespace detail

// Cross-checks the transfer-matrix machinery on one model. Every check is an
// exact identity, so deviations beyond accumulated rounding indicate a bug in
// the parameters or in the inference path.
inline VerifyReport run_verification(const DbmParams& m, const VerifyOptions& opt = {}) {
  VerifyReport rep;

  // log Z must not depend on the layer whose messages are combined
  double lz = log_partition(m);
  for (int k = 1; k <= m.depth(); ++k) {
    TransferMessage up = upward_message(m, k);
    TransferMessage down = downward_message(m, k);
    std::vector<double> v = detail::layer_bias_vector(m, k);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += up.log_values[i] + down.log_values[i];
    rep.partition_consistency =
        std::max(rep.partition_consistency, std::abs(log_sum_exp(v) - lz));
  }

  // chain rule at the bottom: the layer-0 conditional is a closed form
  {
    Distribution vis = layer_marginal(m, 0);
    Distribution rhs = pushforward(conditional_layer(m, 0), layer_marginal(m, 1));
    for (StateIndex i = 0; i < vis.space.size(); ++i)
      rep.chain_rule_dev = std::max(rep.chain_rule_dev, std::abs(vis.probs[i] - rhs.probs[i]));
  }

  StateSpace joint_space(m.total_units(), m.alphabet());
  if (joint_space.size() <= opt.oracle_limit) {
    rep.oracle_checked = true;
    Distribution joint = joint_distribution_oracle(m, opt.oracle_limit);
    rep.log_partition_dev = std::abs(lz - log_partition_oracle(m, opt.oracle_limit));
    for (int k = 0; k <= m.depth(); ++k) {
      Distribution oracle = detail::oracle_layer_marginal(m, joint, k);
      Distribution fast = layer_marginal(m, k);
      for (StateIndex i = 0; i < oracle.space.size(); ++i)
        rep.marginal_dev =
            std::max(rep.marginal_dev, std::abs(oracle.probs[i] - fast.probs[i]));
    }
  }

  // cutting the chain anywhere, with any interface bias split, must reproduce
  // the cut layer's marginal as a hadamard product. The product is formed in
  // the log domain: on very sharp models the two factors round to zero on
  // complementary states, and their linear product would lose all mass.
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  for (int k = 1; k < m.depth(); ++k) {
    std::size_t len = m.encoding() == Encoding::compact
                          ? static_cast<std::size_t>(m.width(k))
                          : static_cast<std::size_t>(m.width(k)) * m.alphabet();
    std::vector<double> direct = layer_log_marginal(m, k);
    for (int trial = 0; trial <= opt.split_trials; ++trial) {
      std::vector<double> split(len);
      if (trial == 0)
        split = m.raw_biases(k);
      else
        for (double& v : split) v = unit(rng);
      auto parts = split_at_layer(m, k, split);
      std::vector<double> mix = layer_log_marginal(parts.first, k);
      std::vector<double> up = layer_log_marginal(parts.second, 0);
      for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += up[i];
      double lz = log_sum_exp(mix);
      for (std::size_t i = 0; i < mix.size(); ++i)
        rep.composition_dev = std::max(
            rep.composition_dev, std::abs(std::exp(direct[i]) - std::exp(mix[i] - lz)));
    }
  }

  if (m.depth() >= 2) rep.factorization_dev = visible_factorization_check(m);
  return rep;
}

}  // namespace dbmc
