#pragma once

#include <random>
#include <vector>

#include "dbmc/distribution.hpp"
#include "dbmc/model.hpp"

namespace dbmc::testing {

inline DbmParams random_binary_model(const std::vector<int>& widths, std::mt19937_64& rng,
                                     double scale = 1.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<std::vector<std::vector<double>>> w;
  std::vector<std::vector<double>> b;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    std::vector<std::vector<double>> mat(static_cast<std::size_t>(widths[l]),
                                         std::vector<double>(widths[l + 1]));
    for (auto& row : mat)
      for (double& v : row) v = u(rng);
    w.push_back(std::move(mat));
  }
  for (int n : widths) {
    std::vector<double> bias(static_cast<std::size_t>(n));
    for (double& v : bias) v = u(rng);
    b.push_back(std::move(bias));
  }
  return DbmParams::binary(widths, std::move(w), std::move(b));
}

inline DbmParams random_one_hot_model(int q, const std::vector<int>& widths, std::mt19937_64& rng,
                                      double scale = 1.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<std::vector<double>> w, b;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    std::vector<double> t(static_cast<std::size_t>(widths[l]) * q * widths[l + 1] * q);
    for (double& v : t) v = u(rng);
    w.push_back(std::move(t));
  }
  for (int n : widths) {
    std::vector<double> t(static_cast<std::size_t>(n) * q);
    for (double& v : t) v = u(rng);
    b.push_back(std::move(t));
  }
  return DbmParams::one_hot(q, widths, std::move(w), std::move(b));
}

inline Distribution random_distribution(const StateSpace& s, std::mt19937_64& rng,
                                        double floor = 0.01) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  std::vector<double> p(s.size());
  double mass = 0.0;
  for (double& v : p) {
    v = u(rng);
    mass += v;
  }
  for (double& v : p) v /= mass;
  return Distribution(s, p);
}

}  // namespace dbmc::testing
