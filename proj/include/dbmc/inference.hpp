#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "dbmc/distribution.hpp"
#include "dbmc/error.hpp"
#include "dbmc/model.hpp"
#include "dbmc/state_space.hpp"

namespace dbmc {

// Log-domain sum of the Boltzmann factors of every layer strictly above
// (upward) or strictly below (downward) a given layer, one entry per state of
// that layer. Marginals and the partition function are read off these vectors.
struct TransferMessage {
  int layer;
  std::vector<double> log_values;
};

namespace detail {

// Table A[s][j*q + b] = sum_i weight(l, i, s_i, j, b) for layer pair (l, l+1):
// the interaction energy a full lower state s contributes to upper unit j at
// symbol b. Lets the message pass touch each (s, t) pair in O(n_{l+1}) time.
inline std::vector<std::vector<double>> interaction_table(const DbmParams& m, int l) {
  const int q = m.alphabet();
  const int nl = m.width(l), nu = m.width(l + 1);
  StateSpace lower(nl, q);
  std::vector<std::vector<double>> table(lower.size(),
                                         std::vector<double>(static_cast<std::size_t>(nu) * q));
  State s(static_cast<std::size_t>(nl), 0);
  StateIndex si = 0;
  do {
    auto& row = table[si++];
    for (int j = 0; j < nu; ++j)
      for (int b = 0; b < q; ++b) {
        double acc = 0.0;
        for (int i = 0; i < nl; ++i) acc += m.weight(l, i, s[static_cast<std::size_t>(i)], j, b);
        row[static_cast<std::size_t>(j) * q + b] = acc;
      }
  } while (lower.next(s));
  return table;
}

// bias_l summed over the units of each full layer state.
inline std::vector<double> layer_bias_vector(const DbmParams& m, int l) {
  const int q = m.alphabet();
  const int n = m.width(l);
  StateSpace space(n, q);
  std::vector<double> out(space.size());
  State s(static_cast<std::size_t>(n), 0);
  StateIndex si = 0;
  do {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += m.bias(l, i, s[static_cast<std::size_t>(i)]);
    out[si++] = acc;
  } while (space.next(s));
  return out;
}

// One elimination step: given V(t) = bias + message at the far layer, returns
// message(s) = logsumexp_t [pair(s, t) + V(t)]. `table` must be the
// interaction table of the pair oriented with s as the lower layer; for the
// downward pass the symmetric orientation is produced by the caller.
inline std::vector<double> eliminate(const std::vector<std::vector<double>>& table, int n_far,
                                     int q, const std::vector<double>& V) {
  StateSpace far_space(n_far, q);
  std::vector<double> out(table.size());
  std::vector<double> scores(V.size());
  State t(static_cast<std::size_t>(n_far), 0);
  for (StateIndex si = 0; si < table.size(); ++si) {
    const auto& row = table[si];
    std::fill(t.begin(), t.end(), 0);
    StateIndex ti = 0;
    do {
      double acc = V[ti];
      for (int j = 0; j < n_far; ++j) acc += row[static_cast<std::size_t>(j) * q + t[j]];
      scores[ti++] = acc;
    } while (far_space.next(t));
    out[si] = log_sum_exp(scores);
  }
  return out;
}

// Interaction table transposed to upper-layer states: B[t][i*q + a] =
// sum_j weight(l, i, a, j, t_j).
inline std::vector<std::vector<double>> interaction_table_upper(const DbmParams& m, int l) {
  const int q = m.alphabet();
  const int nl = m.width(l), nu = m.width(l + 1);
  StateSpace upper(nu, q);
  std::vector<std::vector<double>> table(upper.size(),
                                         std::vector<double>(static_cast<std::size_t>(nl) * q));
  State t(static_cast<std::size_t>(nu), 0);
  StateIndex ti = 0;
  do {
    auto& row = table[ti++];
    for (int i = 0; i < nl; ++i)
      for (int a = 0; a < q; ++a) {
        double acc = 0.0;
        for (int j = 0; j < nu; ++j) acc += m.weight(l, i, a, j, t[static_cast<std::size_t>(j)]);
        row[static_cast<std::size_t>(i) * q + a] = acc;
      }
  } while (upper.next(t));
  return table;
}

}  // namespace detail

// Message arriving at layer k from the layers above it; zero at the top layer.
inline TransferMessage upward_message(const DbmParams& m, int k) {
  if (k < 0 || k > m.depth()) throw dimension_error("layer index out of range");
  const int q = m.alphabet();
  StateSpace top(m.width(m.depth()), q);
  std::vector<double> msg(top.size(), 0.0);
  for (int l = m.depth() - 1; l >= k; --l) {
    std::vector<double> V = detail::layer_bias_vector(m, l + 1);
    for (std::size_t i = 0; i < V.size(); ++i) V[i] += msg[i];
    msg = detail::eliminate(detail::interaction_table(m, l), m.width(l + 1), q, V);
  }
  return TransferMessage{k, std::move(msg)};
}

// Message arriving at layer k from the layers below it; zero at layer 0.
inline TransferMessage downward_message(const DbmParams& m, int k) {
  if (k < 0 || k > m.depth()) throw dimension_error("layer index out of range");
  const int q = m.alphabet();
  StateSpace bottom(m.width(0), q);
  std::vector<double> msg(bottom.size(), 0.0);
  for (int l = 0; l < k; ++l) {
    std::vector<double> V = detail::layer_bias_vector(m, l);
    for (std::size_t i = 0; i < V.size(); ++i) V[i] += msg[i];
    msg = detail::eliminate(detail::interaction_table_upper(m, l), m.width(l), q, V);
  }
  return TransferMessage{k, std::move(msg)};
}

inline double log_partition(const DbmParams& m) {
  TransferMessage up = upward_message(m, 0);
  std::vector<double> v = detail::layer_bias_vector(m, 0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += up.log_values[i];
  return log_sum_exp(v);
}

// Exact log marginal of layer k; entries logsumexp to zero.
inline std::vector<double> layer_log_marginal(const DbmParams& m, int k) {
  TransferMessage up = upward_message(m, k);
  TransferMessage down = downward_message(m, k);
  std::vector<double> v = detail::layer_bias_vector(m, k);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += up.log_values[i] + down.log_values[i];
  double lz = log_sum_exp(v);
  for (double& x : v) x -= lz;
  return v;
}

inline Distribution layer_marginal(const DbmParams& m, int k) {
  std::vector<double> lv = layer_log_marginal(m, k);
  std::vector<double> p(lv.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    p[i] = std::exp(lv[i]);
    mass += p[i];
  }
  for (double& x : p) x /= mass;
  return Distribution(StateSpace(m.width(k), m.alphabet()), p);
}

// Cuts the chain at layer k, assigning interface bias `bias_split` to the lower
// part and the remainder B_k - bias_split to the upper part. The layer-k
// marginal of the whole model is the hadamard product of the lower part's top
// marginal and the upper part's bottom marginal, for any choice of split.
// bias_split uses the model's encoding: length n_k (compact) or n_k*q (one_hot).
inline std::pair<DbmParams, DbmParams> split_at_layer(const DbmParams& m, int k,
                                                      const std::vector<double>& bias_split) {
  if (k <= 0 || k >= m.depth())
    throw dimension_error("split layer must be strictly between the ends");
  const int q = m.alphabet();
  std::size_t expect = m.encoding() == Encoding::compact
                           ? static_cast<std::size_t>(m.width(k))
                           : static_cast<std::size_t>(m.width(k)) * q;
  if (bias_split.size() != expect) throw dimension_error("bias split length mismatch");
  detail::check_finite(bias_split, "bias split");

  std::vector<double> rest(bias_split.size());
  for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = m.raw_biases(k)[i] - bias_split[i];

  auto build = [&](int lo, int hi, const std::vector<double>* bottom_bias,
                   const std::vector<double>* top_bias) {
    std::vector<int> widths(m.widths().begin() + lo, m.widths().begin() + hi + 1);
    std::vector<std::vector<double>> weights, biases;
    for (int l = lo; l < hi; ++l) weights.push_back(m.raw_weights(l));
    for (int l = lo; l <= hi; ++l) {
      if (l == lo && bottom_bias)
        biases.push_back(*bottom_bias);
      else if (l == hi && top_bias)
        biases.push_back(*top_bias);
      else
        biases.push_back(m.raw_biases(l));
    }
    if (m.encoding() == Encoding::compact) {
      std::vector<std::vector<std::vector<double>>> mats;
      for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        std::vector<std::vector<double>> mat(widths[l], std::vector<double>(widths[l + 1]));
        for (int i = 0; i < widths[l]; ++i)
          for (int j = 0; j < widths[l + 1]; ++j)
            mat[i][j] = weights[l][static_cast<std::size_t>(i) * widths[l + 1] + j];
        mats.push_back(std::move(mat));
      }
      return DbmParams::binary(widths, mats, biases);
    }
    return DbmParams::one_hot(q, widths, std::move(weights), std::move(biases));
  };

  DbmParams lower = build(0, k, nullptr, &bias_split);
  DbmParams upper = build(k, m.depth(), &rest, nullptr);
  return {std::move(lower), std::move(upper)};
}

// Exact conditional distribution of the output units given one input state;
// factorizes as a product of per-unit softmaxes.
inline Distribution ff_conditional(const FeedforwardLayer& layer, const State& x_in) {
  if (static_cast<int>(x_in.size()) != layer.n_in)
    throw dimension_error("input state length must match layer input width");
  for (auto s : x_in)
    if (s >= layer.q) throw domain_error("symbol outside alphabet");
  const int q = layer.q;
  std::vector<double> unit_logp(static_cast<std::size_t>(layer.n_out) * q);
  std::vector<double> scores(static_cast<std::size_t>(q));
  for (int i = 0; i < layer.n_out; ++i) {
    for (int a = 0; a < q; ++a) scores[static_cast<std::size_t>(a)] = layer.score(i, a, x_in);
    double lz = log_sum_exp(scores);
    for (int a = 0; a < q; ++a)
      unit_logp[static_cast<std::size_t>(i) * q + a] = scores[static_cast<std::size_t>(a)] - lz;
  }
  StateSpace out_space(layer.n_out, q);
  std::vector<double> p(out_space.size());
  State y(static_cast<std::size_t>(layer.n_out), 0);
  StateIndex yi = 0;
  double mass = 0.0;
  do {
    double lp = 0.0;
    for (int i = 0; i < layer.n_out; ++i)
      lp += unit_logp[static_cast<std::size_t>(i) * q + y[static_cast<std::size_t>(i)]];
    p[yi] = std::exp(lp);
    mass += p[yi];
    ++yi;
  } while (out_space.next(y));
  for (double& v : p) v /= mass;
  return Distribution(out_space, p);
}

// Marginal of the output when the input is drawn from p_in:
// out(y) = sum_x q(y | x) p_in(x).
inline Distribution pushforward(const FeedforwardLayer& layer, const Distribution& p_in) {
  if (p_in.space.units() != layer.n_in || p_in.space.alphabet() != layer.q)
    throw dimension_error("input distribution does not match layer input space");
  StateSpace out_space(layer.n_out, layer.q);
  std::vector<double> out(out_space.size(), 0.0);
  State x(static_cast<std::size_t>(layer.n_in), 0);
  StateIndex xi = 0;
  do {
    double w = p_in.probs[xi];
    if (w > 0.0) {
      Distribution cond = ff_conditional(layer, x);
      for (StateIndex y = 0; y < out_space.size(); ++y) out[y] += w * cond.probs[y];
    }
    ++xi;
  } while (p_in.space.next(x));
  double mass = 0.0;
  for (double v : out) mass += v;
  for (double& v : out) v /= mass;
  return Distribution(out_space, out);
}

// Conditions the model on visible unit coords[k] = values[k]: those units drop
// out of layer 0 and their interaction terms fold into the layer-1 bias, which
// is exact for Boltzmann distributions. Remaining visible units keep their
// relative order. At least one visible unit must stay.
inline DbmParams clamp_visible(const DbmParams& m, const std::vector<int>& coords,
                               const std::vector<int>& values) {
  const int n0 = m.width(0), q = m.alphabet();
  if (coords.size() != values.size())
    throw dimension_error("clamp coordinates and values differ in length");
  if (coords.empty()) throw dimension_error("no coordinates to clamp");
  std::vector<int> clamp(static_cast<std::size_t>(n0), -1);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    int c = coords[k];
    if (c < 0 || c >= n0) throw dimension_error("clamp coordinate out of range");
    if (clamp[static_cast<std::size_t>(c)] >= 0) throw domain_error("coordinate clamped twice");
    if (values[k] < 0 || values[k] >= q) throw domain_error("clamp value outside alphabet");
    clamp[static_cast<std::size_t>(c)] = values[k];
  }
  std::vector<int> kept;
  for (int i = 0; i < n0; ++i)
    if (clamp[static_cast<std::size_t>(i)] < 0) kept.push_back(i);
  if (kept.empty()) throw dimension_error("clamping all visible units leaves no distribution");

  std::vector<int> widths = m.widths();
  widths[0] = static_cast<int>(kept.size());
  const int n1 = m.width(1);

  if (m.encoding() == Encoding::compact) {
    std::vector<std::vector<std::vector<double>>> w;
    std::vector<std::vector<double>> b;
    std::vector<std::vector<double>> w0;
    std::vector<double> b0;
    for (int i : kept) {
      std::vector<double> row(static_cast<std::size_t>(n1));
      for (int j = 0; j < n1; ++j) row[static_cast<std::size_t>(j)] = m.weight(0, i, 1, j, 1);
      w0.push_back(std::move(row));
      b0.push_back(m.bias(0, i, 1));
    }
    w.push_back(std::move(w0));
    for (int l = 1; l < m.depth(); ++l) {
      std::vector<std::vector<double>> mat(static_cast<std::size_t>(m.width(l)),
                                           std::vector<double>(m.width(l + 1)));
      for (int i = 0; i < m.width(l); ++i)
        for (int j = 0; j < m.width(l + 1); ++j) mat[i][j] = m.weight(l, i, 1, j, 1);
      w.push_back(std::move(mat));
    }
    b.push_back(std::move(b0));
    for (int l = 1; l < m.layer_count(); ++l) {
      std::vector<double> bias(m.raw_biases(l));
      if (l == 1)
        for (int j = 0; j < n1; ++j)
          for (int i = 0; i < n0; ++i)
            if (clamp[static_cast<std::size_t>(i)] == 1)
              bias[static_cast<std::size_t>(j)] += m.weight(0, i, 1, j, 1);
      b.push_back(std::move(bias));
    }
    return DbmParams::binary(widths, std::move(w), std::move(b));
  }

  std::vector<std::vector<double>> w, b;
  std::vector<double> w0(static_cast<std::size_t>(kept.size()) * q * n1 * q);
  for (std::size_t ki = 0; ki < kept.size(); ++ki)
    for (int a = 0; a < q; ++a)
      for (int j = 0; j < n1; ++j)
        for (int bb = 0; bb < q; ++bb)
          w0[((ki * q + a) * n1 + j) * q + bb] = m.weight(0, kept[ki], a, j, bb);
  w.push_back(std::move(w0));
  for (int l = 1; l < m.depth(); ++l) w.push_back(m.raw_weights(l));

  std::vector<double> b0(static_cast<std::size_t>(kept.size()) * q);
  for (std::size_t ki = 0; ki < kept.size(); ++ki)
    for (int a = 0; a < q; ++a) b0[ki * q + a] = m.bias(0, kept[ki], a);
  b.push_back(std::move(b0));
  for (int l = 1; l < m.layer_count(); ++l) {
    std::vector<double> bias(m.raw_biases(l));
    if (l == 1)
      for (int j = 0; j < n1; ++j)
        for (int bb = 0; bb < q; ++bb)
          for (int i = 0; i < n0; ++i)
            if (clamp[static_cast<std::size_t>(i)] >= 0)
              bias[static_cast<std::size_t>(j) * q + bb] +=
                  m.weight(0, i, clamp[static_cast<std::size_t>(i)], j, bb);
    b.push_back(std::move(bias));
  }
  return DbmParams::one_hot(q, widths, std::move(w), std::move(b));
}

// Checks p(x_0) = sum_{x_1} q(x_0|x_1) (r * s)(x_1) where q and r come from the
// fully observable bottom RBM (W_0; B_0, B_1) and s is the bottom marginal of
// the rest of the stack with its interface bias removed. Returns the maximum
// absolute deviation from the directly computed visible marginal.
inline double visible_factorization_check(const DbmParams& m) {
  if (m.depth() < 2)
    throw dimension_error("factorization check needs at least two hidden layers");
  auto parts = split_at_layer(m, 1, m.raw_biases(1));
  // r * s in the log domain; on sharp models the linear factors can round to
  // zero on complementary states and the product would lose all mass
  std::vector<double> mix_log = layer_log_marginal(parts.first, 1);
  std::vector<double> s_log = layer_log_marginal(parts.second, 0);
  for (std::size_t i = 0; i < mix_log.size(); ++i) mix_log[i] += s_log[i];
  double mix_lz = log_sum_exp(mix_log);
  std::vector<double> mix_p(mix_log.size());
  for (std::size_t i = 0; i < mix_log.size(); ++i) mix_p[i] = std::exp(mix_log[i] - mix_lz);
  Distribution mix(StateSpace(m.width(1), m.alphabet()), std::move(mix_p));
  Distribution rhs = pushforward(conditional_layer(m, 0), mix);
  Distribution lhs = layer_marginal(m, 0);
  double dev = 0.0;
  for (StateIndex i = 0; i < lhs.space.size(); ++i)
    dev = std::max(dev, std::abs(lhs.probs[i] - rhs.probs[i]));
  return dev;
}

}  // namespace dbmc
