#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "dbmc/distribution.hpp"
#include "dbmc/error.hpp"
#include "dbmc/state_space.hpp"

namespace dbmc {

// Storage layout for interaction terms.
//   compact: q = 2 only; weights[l] is an n_l x n_{l+1} matrix and biases[l] a
//            length-n_l vector, acting on raw 0/1 unit values.
//   one_hot: weights[l] is an n_l x q x n_{l+1} x q table and biases[l] an
//            n_l x q table, indexed by the symbols the two units take.
// The compact form embeds into one_hot by placing each matrix entry at symbol
// pair (1, 1) and each bias at symbol 1, all other slices zero; energies then
// agree term by term, so both codepaths produce identical floating point sums.
enum class Encoding { compact, one_hot };

namespace detail {
inline void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw domain_error(std::string(what) + " must be finite");
}
}  // namespace detail

// Parameters of a layered Boltzmann machine: layers 0..L with units taking
// values in {0..q-1}, couplings only between consecutive layers.
// Layer 0 is the visible layer; the joint distribution is
//   p(x_0..x_L) = exp(sum_l pair_l(x_l, x_{l+1}) + sum_l bias_l(x_l)) / Z.
// Instances are immutable after construction.
class DbmParams {
 public:
  static DbmParams binary(std::vector<int> widths,
                          std::vector<std::vector<std::vector<double>>> weights,
                          std::vector<std::vector<double>> biases) {
    DbmParams p;
    p.q_ = 2;
    p.encoding_ = Encoding::compact;
    p.widths_ = std::move(widths);
    p.validate_widths();
    std::size_t L = p.widths_.size() - 1;
    if (weights.size() != L) throw dimension_error("need one weight matrix per layer pair");
    if (biases.size() != L + 1) throw dimension_error("need one bias vector per layer");
    for (std::size_t l = 0; l < L; ++l) {
      int nl = p.widths_[l], nu = p.widths_[l + 1];
      if (static_cast<int>(weights[l].size()) != nl)
        throw dimension_error("weight matrix rows must match lower layer width");
      std::vector<double> flat;
      flat.reserve(static_cast<std::size_t>(nl) * nu);
      for (const auto& row : weights[l]) {
        if (static_cast<int>(row.size()) != nu)
          throw dimension_error("weight matrix columns must match upper layer width");
        flat.insert(flat.end(), row.begin(), row.end());
      }
      detail::check_finite(flat, "weights");
      p.weights_.push_back(std::move(flat));
    }
    for (std::size_t l = 0; l <= L; ++l) {
      if (static_cast<int>(biases[l].size()) != p.widths_[l])
        throw dimension_error("bias vector length must match layer width");
      detail::check_finite(biases[l], "biases");
      p.biases_.push_back(biases[l]);
    }
    return p;
  }

  // Flat one-hot construction. weights[l] has layout [i][a][j][b] row-major
  // with i over layer l units, j over layer l+1 units, a and b over symbols;
  // biases[l] has layout [i][a].
  static DbmParams one_hot(int q, std::vector<int> widths,
                           std::vector<std::vector<double>> weights,
                           std::vector<std::vector<double>> biases) {
    if (q < 2) throw domain_error("alphabet size must be at least 2");
    DbmParams p;
    p.q_ = q;
    p.encoding_ = Encoding::one_hot;
    p.widths_ = std::move(widths);
    p.validate_widths();
    std::size_t L = p.widths_.size() - 1;
    if (weights.size() != L) throw dimension_error("need one weight table per layer pair");
    if (biases.size() != L + 1) throw dimension_error("need one bias table per layer");
    for (std::size_t l = 0; l < L; ++l) {
      std::size_t expect = static_cast<std::size_t>(p.widths_[l]) * q * p.widths_[l + 1] * q;
      if (weights[l].size() != expect) throw dimension_error("weight table size mismatch");
      detail::check_finite(weights[l], "weights");
      p.weights_.push_back(std::move(weights[l]));
    }
    for (std::size_t l = 0; l <= L; ++l) {
      if (biases[l].size() != static_cast<std::size_t>(p.widths_[l]) * q)
        throw dimension_error("bias table size mismatch");
      detail::check_finite(biases[l], "biases");
      p.biases_.push_back(std::move(biases[l]));
    }
    return p;
  }

  static DbmParams zeros(int q, const std::vector<int>& widths,
                         Encoding enc = Encoding::compact) {
    if (q != 2) enc = Encoding::one_hot;
    std::size_t L = widths.size() - 1;
    if (enc == Encoding::compact) {
      std::vector<std::vector<std::vector<double>>> w;
      std::vector<std::vector<double>> b;
      for (std::size_t l = 0; l < L; ++l)
        w.emplace_back(widths[l], std::vector<double>(widths[l + 1], 0.0));
      for (int n : widths) b.emplace_back(n, 0.0);
      return binary(widths, std::move(w), std::move(b));
    }
    std::vector<std::vector<double>> w, b;
    for (std::size_t l = 0; l < L; ++l)
      w.emplace_back(static_cast<std::size_t>(widths[l]) * q * widths[l + 1] * q, 0.0);
    for (int n : widths) b.emplace_back(static_cast<std::size_t>(n) * q, 0.0);
    return one_hot(q, widths, std::move(w), std::move(b));
  }

  int alphabet() const { return q_; }
  Encoding encoding() const { return encoding_; }
  const std::vector<int>& widths() const { return widths_; }
  int width(int l) const { return widths_[static_cast<std::size_t>(l)]; }
  // Number of weight layers; with layer 0 visible this counts the hidden layers.
  int depth() const { return static_cast<int>(widths_.size()) - 1; }
  int layer_count() const { return static_cast<int>(widths_.size()); }
  int total_units() const {
    int n = 0;
    for (int w : widths_) n += w;
    return n;
  }

  // Interaction energy of unit i in layer l at symbol a with unit j in layer
  // l+1 at symbol b.
  double weight(int l, int i, int a, int j, int b) const {
    if (encoding_ == Encoding::compact)
      return (a == 1 && b == 1) ? weights_[l][static_cast<std::size_t>(i) * widths_[l + 1] + j]
                                : 0.0;
    return weights_[l][((static_cast<std::size_t>(i) * q_ + a) * widths_[l + 1] + j) * q_ + b];
  }

  double bias(int l, int i, int a) const {
    if (encoding_ == Encoding::compact) return a == 1 ? biases_[l][i] : 0.0;
    return biases_[l][static_cast<std::size_t>(i) * q_ + a];
  }

  const std::vector<double>& raw_weights(int l) const { return weights_[l]; }
  const std::vector<double>& raw_biases(int l) const { return biases_[l]; }

  DbmParams as_one_hot() const {
    if (encoding_ == Encoding::one_hot) return *this;
    std::vector<std::vector<double>> w, b;
    std::size_t L = widths_.size() - 1;
    for (std::size_t l = 0; l < L; ++l) {
      int nl = widths_[l], nu = widths_[l + 1];
      std::vector<double> t(static_cast<std::size_t>(nl) * 2 * nu * 2, 0.0);
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nu; ++j)
          t[((static_cast<std::size_t>(i) * 2 + 1) * nu + j) * 2 + 1] =
              weights_[l][static_cast<std::size_t>(i) * nu + j];
      w.push_back(std::move(t));
    }
    for (std::size_t l = 0; l <= L; ++l) {
      std::vector<double> t(static_cast<std::size_t>(widths_[l]) * 2, 0.0);
      for (int i = 0; i < widths_[l]; ++i) t[static_cast<std::size_t>(i) * 2 + 1] = biases_[l][i];
      b.push_back(std::move(t));
    }
    return one_hot(2, widths_, std::move(w), std::move(b));
  }

  bool operator==(const DbmParams& o) const {
    return q_ == o.q_ && encoding_ == o.encoding_ && widths_ == o.widths_ &&
           weights_ == o.weights_ && biases_ == o.biases_;
  }

 private:
  DbmParams() = default;
  void validate_widths() const {
    if (widths_.size() < 2) throw dimension_error("a model needs at least two layers");
    for (int n : widths_)
      if (n < 1) throw dimension_error("layer widths must be positive");
  }

  int q_ = 2;
  Encoding encoding_ = Encoding::compact;
  std::vector<int> widths_;
  std::vector<std::vector<double>> weights_;  // per layer pair, flat
  std::vector<std::vector<double>> biases_;   // per layer, flat
};

// An RBM is the two-layer case.
using RbmParams = DbmParams;

// Conditional model q(x_out | x_in) = exp(x_out' W x_in + x_out' B) / Z(W x_in + B);
// the normalization factorizes over output units. Same storage conventions as
// DbmParams, with rows indexing output units.
struct FeedforwardLayer {
  int q;
  int n_out;
  int n_in;
  Encoding encoding;
  std::vector<double> weight;  // compact: [i][j]; one_hot: [i][a][j][b]
  std::vector<double> bias;    // output side; compact: [i]; one_hot: [i][a]

  FeedforwardLayer(int q_, int n_out_, int n_in_, Encoding enc, std::vector<double> w,
                   std::vector<double> b)
      : q(q_), n_out(n_out_), n_in(n_in_), encoding(enc), weight(std::move(w)),
        bias(std::move(b)) {
    if (q < 2) throw domain_error("alphabet size must be at least 2");
    if (n_out < 1 || n_in < 1) throw dimension_error("layer widths must be positive");
    if (q != 2 && encoding == Encoding::compact)
      throw domain_error("compact encoding requires a binary alphabet");
    std::size_t nw = encoding == Encoding::compact
                         ? static_cast<std::size_t>(n_out) * n_in
                         : static_cast<std::size_t>(n_out) * q * n_in * q;
    std::size_t nb = encoding == Encoding::compact ? static_cast<std::size_t>(n_out)
                                                   : static_cast<std::size_t>(n_out) * q;
    if (weight.size() != nw) throw dimension_error("weight table size mismatch");
    if (bias.size() != nb) throw dimension_error("bias table size mismatch");
    detail::check_finite(weight, "weights");
    detail::check_finite(bias, "biases");
  }

  double w(int i, int a, int j, int b) const {
    if (encoding == Encoding::compact)
      return (a == 1 && b == 1) ? weight[static_cast<std::size_t>(i) * n_in + j] : 0.0;
    return weight[((static_cast<std::size_t>(i) * q + a) * n_in + j) * q + b];
  }

  double b(int i, int a) const {
    if (encoding == Encoding::compact) return a == 1 ? bias[i] : 0.0;
    return bias[static_cast<std::size_t>(i) * q + a];
  }

  // Score of symbol a for output unit i given the input state.
  double score(int i, int a, const State& x_in) const {
    double s = b(i, a);
    for (int j = 0; j < n_in; ++j) s += w(i, a, j, x_in[static_cast<std::size_t>(j)]);
    return s;
  }
};

// The conditional of layer l given layer l+1, read off a DBM's parameters.
inline FeedforwardLayer conditional_layer(const DbmParams& m, int l) {
  if (l < 0 || l >= m.depth()) throw dimension_error("layer pair index out of range");
  std::vector<double> bias;
  if (m.encoding() == Encoding::compact)
    for (int i = 0; i < m.width(l); ++i) bias.push_back(m.bias(l, i, 1));
  else
    bias = m.raw_biases(l);
  return FeedforwardLayer(m.alphabet(), m.width(l), m.width(l + 1), m.encoding(),
                          m.raw_weights(l), bias);
}

// Exponent of Eq-style joint probability: sum of pairwise terms plus biases.
inline double negative_energy(const DbmParams& m, const std::vector<State>& layers) {
  if (static_cast<int>(layers.size()) != m.layer_count())
    throw dimension_error("need one state per layer");
  for (int l = 0; l < m.layer_count(); ++l) {
    if (static_cast<int>(layers[l].size()) != m.width(l))
      throw dimension_error("layer state length must match layer width");
    for (auto s : layers[l])
      if (s >= m.alphabet()) throw domain_error("symbol outside alphabet");
  }
  double e = 0.0;
  for (int l = 0; l < m.depth(); ++l)
    for (int i = 0; i < m.width(l); ++i)
      for (int j = 0; j < m.width(l + 1); ++j)
        e += m.weight(l, i, layers[l][i], j, layers[l + 1][j]);
  for (int l = 0; l < m.layer_count(); ++l)
    for (int i = 0; i < m.width(l); ++i) e += m.bias(l, i, layers[l][i]);
  return e;
}

namespace detail {
// Splits a flat joint state (layer 0 first, enumeration order within layers)
// into per-layer states.
inline std::vector<State> split_layers(const DbmParams& m, const State& joint) {
  std::vector<State> layers;
  layers.reserve(m.layer_count());
  std::size_t off = 0;
  for (int l = 0; l < m.layer_count(); ++l) {
    layers.emplace_back(joint.begin() + off, joint.begin() + off + m.width(l));
    off += m.width(l);
  }
  return layers;
}
}  // namespace detail

// Joint distribution over (x_0, ..., x_L) by full enumeration, ordered with
// layer 0 as the most significant block. Intended as the brute-force reference
// for everything else; refuses joint spaces larger than `limit` states.
inline Distribution joint_distribution_oracle(const DbmParams& m,
                                              StateIndex limit = StateIndex{1} << 20) {
  StateSpace joint_space(m.total_units(), m.alphabet());
  if (joint_space.size() > limit)
    throw size_error("joint state space exceeds enumeration limit");
  std::vector<double> energy(joint_space.size());
  State x(static_cast<std::size_t>(m.total_units()), 0);
  StateIndex i = 0;
  do {
    energy[i++] = negative_energy(m, detail::split_layers(m, x));
  } while (joint_space.next(x));
  double lz = log_sum_exp(energy);
  std::vector<double> p(joint_space.size());
  for (StateIndex k = 0; k < joint_space.size(); ++k) p[k] = std::exp(energy[k] - lz);
  double mass = 0.0;
  for (double v : p) mass += v;
  for (double& v : p) v /= mass;
  return Distribution(joint_space, p);
}

// Log partition function by full enumeration.
inline double log_partition_oracle(const DbmParams& m, StateIndex limit = StateIndex{1} << 20) {
  StateSpace joint_space(m.total_units(), m.alphabet());
  if (joint_space.size() > limit)
    throw size_error("joint state space exceeds enumeration limit");
  std::vector<double> energy(joint_space.size());
  State x(static_cast<std::size_t>(m.total_units()), 0);
  StateIndex i = 0;
  do {
    energy[i++] = negative_energy(m, detail::split_layers(m, x));
  } while (joint_space.next(x));
  return log_sum_exp(energy);
}

}  // namespace dbmc
