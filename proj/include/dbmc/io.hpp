#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbmc/bounds.hpp"
#include "dbmc/compiler.hpp"
#include "dbmc/distribution.hpp"
#include "dbmc/error.hpp"
#include "dbmc/model.hpp"

// JSON formats.
//
// model:        {"q": 2, "widths": [..], "weights": [..], "biases": [..]}
//   compact     weights[l] is an n_l x n_{l+1} matrix, biases[l] a vector;
//               "q" may be omitted and defaults to 2.
//   one_hot     weights[l] is an n_l x q x n_{l+1} x q nested array and
//               biases[l] an n_l x q array. Either layout deserializes for
//               q = 2; larger alphabets require this one.
// distribution: {"n": .., "q": .., "probs": [..]} with q^n entries.
// certificate:  {"kl", "depth", "betas", "smoothing", "bound_sufficient"}.
// bounds:       field-per-field dump of BoundsReport.
//
// Doubles round-trip exactly: the serializer emits the shortest decimal that
// parses back to the same value.

namespace dbmc {

using nlohmann::json;

namespace detail {

inline const json& require_field(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end())
    throw parse_error(std::string(what) + " is missing required field '" + key + "'");
  return *it;
}

template <typename T>
T field_as(const json& j, const char* key, const char* what) {
  try {
    return require_field(j, key, what).get<T>();
  } catch (const json::exception& e) {
    throw parse_error(std::string(what) + " field '" + key + "': " + e.what());
  }
}

inline int nesting_depth(const json& j) {
  if (!j.is_array() || j.empty()) return 0;
  return 1 + nesting_depth(j.front());
}

inline std::vector<double> flatten(const json& j) {
  std::vector<double> out;
  auto walk = [&out](const json& node, auto&& self) -> void {
    if (node.is_array())
      for (const json& c : node) self(c, self);
    else
      out.push_back(node.get<double>());
  };
  walk(j, walk);
  return out;
}

}  // namespace detail

inline json to_json(const DbmParams& m) {
  json j;
  const int q = m.alphabet();
  if (m.encoding() == Encoding::one_hot || q != 2) j["q"] = q;
  j["widths"] = m.widths();
  json weights = json::array(), biases = json::array();
  for (int l = 0; l < m.depth(); ++l) {
    const int nl = m.width(l), nu = m.width(l + 1);
    if (m.encoding() == Encoding::compact) {
      json mat = json::array();
      for (int i = 0; i < nl; ++i) {
        json row = json::array();
        for (int jj = 0; jj < nu; ++jj)
          row.push_back(m.raw_weights(l)[static_cast<std::size_t>(i) * nu + jj]);
        mat.push_back(std::move(row));
      }
      weights.push_back(std::move(mat));
    } else {
      json ten = json::array();
      for (int i = 0; i < nl; ++i) {
        json ta = json::array();
        for (int a = 0; a < q; ++a) {
          json tj = json::array();
          for (int jj = 0; jj < nu; ++jj) {
            json tb = json::array();
            for (int b = 0; b < q; ++b) tb.push_back(m.weight(l, i, a, jj, b));
            tj.push_back(std::move(tb));
          }
          ta.push_back(std::move(tj));
        }
        ten.push_back(std::move(ta));
      }
      weights.push_back(std::move(ten));
    }
  }
  for (int l = 0; l < m.layer_count(); ++l) {
    if (m.encoding() == Encoding::compact) {
      biases.push_back(m.raw_biases(l));
    } else {
      json tb = json::array();
      for (int i = 0; i < m.width(l); ++i) {
        json ta = json::array();
        for (int a = 0; a < q; ++a) ta.push_back(m.bias(l, i, a));
        tb.push_back(std::move(ta));
      }
      biases.push_back(std::move(tb));
    }
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

inline DbmParams model_from_json(const json& j) {
  if (!j.is_object()) throw parse_error("model must be a JSON object");
  int q = 2;
  if (j.contains("q")) q = detail::field_as<int>(j, "q", "model");
  std::vector<int> widths = detail::field_as<std::vector<int>>(j, "widths", "model");
  const json& jw = detail::require_field(j, "weights", "model");
  const json& jb = detail::require_field(j, "biases", "model");
  if (!jw.is_array() || !jb.is_array())
    throw parse_error("model weights and biases must be arrays");
  if (widths.size() < 2) throw parse_error("model needs at least two layers");
  if (jw.size() + 1 != widths.size() || jb.size() != widths.size())
    throw parse_error("model weights/biases layer counts do not match widths");

  int depth = jw.empty() ? 0 : detail::nesting_depth(jw.front());
  bool compact = depth <= 2;
  if (compact && q != 2)
    throw parse_error("matrix-shaped weights require a binary alphabet");
  try {
    if (compact) {
      std::vector<std::vector<std::vector<double>>> w;
      for (const json& mat : jw) w.push_back(mat.get<std::vector<std::vector<double>>>());
      std::vector<std::vector<double>> b;
      for (const json& v : jb) b.push_back(v.get<std::vector<double>>());
      return DbmParams::binary(widths, std::move(w), std::move(b));
    }
    std::vector<std::vector<double>> w, b;
    for (const json& ten : jw) w.push_back(detail::flatten(ten));
    for (const json& ta : jb) b.push_back(detail::flatten(ta));
    return DbmParams::one_hot(q, widths, std::move(w), std::move(b));
  } catch (const json::exception& e) {
    throw parse_error(std::string("model parameters malformed: ") + e.what());
  } catch (const dimension_error& e) {
    throw parse_error(std::string("model parameters inconsistent: ") + e.what());
  }
}

inline json to_json(const Distribution& d) {
  return json{{"n", d.space.units()}, {"q", d.space.alphabet()}, {"probs", d.probs}};
}

inline Distribution distribution_from_json(const json& j) {
  if (!j.is_object()) throw parse_error("distribution must be a JSON object");
  int n = detail::field_as<int>(j, "n", "distribution");
  int q = detail::field_as<int>(j, "q", "distribution");
  std::vector<double> probs =
      detail::field_as<std::vector<double>>(j, "probs", "distribution");
  try {
    return Distribution(StateSpace(n, q), std::move(probs));
  } catch (const error& e) {
    throw parse_error(std::string("distribution invalid: ") + e.what());
  }
}

inline json to_json(const Certificate& c) {
  return json{{"kl", c.kl},
              {"depth", c.depth},
              {"betas", c.betas},
              {"smoothing", c.smoothing},
              {"bound_sufficient", c.bound_sufficient}};
}

inline json to_json(const BoundsReport& r) {
  return json{{"n", r.n},
              {"q", r.q},
              {"bound_width", r.bound_width},
              {"bound_k", r.bound_k},
              {"sufficient", r.sufficient},
              {"necessary", r.necessary},
              {"min_width", r.min_width},
              {"params_at_sufficient", r.params_at_sufficient}};
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw parse_error("cannot parse '" + path + "': " + e.what());
  }
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace dbmc
