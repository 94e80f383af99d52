#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "dbmc/distribution.hpp"

using namespace dbmc;
using Catch::Matchers::WithinAbs;

namespace {
Distribution make(std::vector<double> p) {
  int n = 0;
  while ((std::size_t{1} << n) < p.size()) ++n;
  return Distribution(StateSpace(n, 2), std::move(p));
}

Distribution random_dist(const StateSpace& s, std::mt19937_64& rng, bool strict = true) {
  std::uniform_real_distribution<double> u(strict ? 0.05 : 0.0, 1.0);
  std::vector<double> p(s.size());
  double mass = 0.0;
  for (double& v : p) {
    v = u(rng);
    mass += v;
  }
  for (double& v : p) v /= mass;
  return Distribution(s, p);
}
}  // namespace

TEST_CASE("distribution validates its vector") {
  StateSpace s(2, 2);
  CHECK_THROWS_AS(Distribution(s, {0.5, 0.5}), dimension_error);
  CHECK_THROWS_AS(Distribution(s, {0.5, 0.5, -0.1, 0.1}), domain_error);
  CHECK_THROWS_AS(Distribution(s, {0.5, 0.5, std::nan(""), 0.0}), domain_error);
  CHECK_NOTHROW(Distribution(s, {0.25, 0.25, 0.25, 0.25}));
}

TEST_CASE("uniform, point mass, normalize, total variation") {
  StateSpace s(2, 2);
  Distribution u = uniform(s);
  CHECK_THAT(total_mass(u), WithinAbs(1.0, 1e-15));
  Distribution p = point_mass(s, 2);
  CHECK(p[2] == 1.0);
  CHECK_THAT(total_variation(u, p), WithinAbs(0.75, 1e-15));
  Distribution n = normalize(Distribution(s, {1, 1, 1, 1}));
  CHECK_THAT(n[0], WithinAbs(0.25, 1e-15));
  CHECK_THROWS_AS(normalize(Distribution(s, {0, 0, 0, 0})), degenerate_product_error);
}

TEST_CASE("kl divergence reference values") {
  Distribution half = make({0.5, 0.5});
  Distribution skew = make({0.75, 0.25});
  CHECK_THAT(kl_divergence(half, skew), WithinAbs(0.5 * std::log(4.0 / 3.0), 1e-15));
  CHECK(kl_divergence(half, half) == 0.0);

  Distribution point = make({1.0, 0.0});
  CHECK_THAT(kl_divergence(point, half), WithinAbs(std::log(2.0), 1e-15));
  // zero model mass on a target state is reported as +inf, not thrown
  CHECK(kl_divergence(half, point) == std::numeric_limits<double>::infinity());
  // zero-target states contribute nothing
  CHECK(kl_divergence(point, point) == 0.0);
}

TEST_CASE("hadamard reference value and identities") {
  Distribution r = make({0.25, 0.75});
  Distribution h = hadamard(r, r);
  CHECK_THAT(h[0], WithinAbs(0.1, 1e-15));
  CHECK_THAT(h[1], WithinAbs(0.9, 1e-15));

  StateSpace s(3, 2);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    Distribution p = random_dist(s, rng);
    Distribution u = uniform(s);
    Distribution same = hadamard(p, u);
    for (StateIndex i = 0; i < s.size(); ++i) CHECK_THAT(same[i], WithinAbs(p[i], 1e-14));
  }
  CHECK_THROWS_AS(hadamard(make({1, 0}), make({0, 1})), degenerate_product_error);
  CHECK_THROWS_AS(hadamard(r, uniform(s)), dimension_error);
}

TEST_CASE("neutralize inverts hadamard") {
  Distribution r = make({0.25, 0.75});
  Distribution target = make({0.5, 0.5});
  Distribution s = neutralize(r, target);
  CHECK_THAT(s[0], WithinAbs(0.75, 1e-15));
  CHECK_THAT(s[1], WithinAbs(0.25, 1e-15));

  StateSpace sp(3, 2);
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    Distribution rr = random_dist(sp, rng);
    Distribution ss = random_dist(sp, rng, false);
    Distribution back = hadamard(rr, neutralize(rr, ss));
    for (StateIndex i = 0; i < sp.size(); ++i) CHECK_THAT(back[i], WithinAbs(ss[i], 1e-12));
  }
  CHECK_THROWS_AS(neutralize(make({1, 0}), target), positivity_error);
}

TEST_CASE("condition_split reference value and layout") {
  Distribution p = make({0.1, 0.2, 0.3, 0.4});
  Distribution c = condition_split(p, {0}, {1});
  REQUIRE(c.space.units() == 1);
  CHECK_THAT(c[0], WithinAbs(3.0 / 7.0, 1e-15));
  CHECK_THAT(c[1], WithinAbs(4.0 / 7.0, 1e-15));

  // remaining coordinates keep their relative order
  StateSpace s3(3, 2);
  std::vector<double> v(8);
  for (int i = 0; i < 8; ++i) v[i] = (i + 1) / 36.0;
  Distribution p3(s3, v);
  Distribution mid = condition_split(p3, {1}, {1});
  // states with x1 = 1: 010,011,110,111 -> indices 2,3,6,7; remaining (x0,x2)
  double mass = v[2] + v[3] + v[6] + v[7];
  CHECK_THAT(mid[0], WithinAbs(v[2] / mass, 1e-15));
  CHECK_THAT(mid[1], WithinAbs(v[3] / mass, 1e-15));
  CHECK_THAT(mid[2], WithinAbs(v[6] / mass, 1e-15));
  CHECK_THAT(mid[3], WithinAbs(v[7] / mass, 1e-15));

  CHECK_THROWS_AS(condition_split(p, {0, 0}, {1, 1}), domain_error);
  CHECK_THROWS_AS(condition_split(p, {2}, {0}), dimension_error);
  CHECK_THROWS_AS(condition_split(p, {0, 1}, {0, 0, 1}), dimension_error);
  CHECK_THROWS_AS(condition_split(p, {0, 1}, {0, 0}), dimension_error);
  CHECK_THROWS_AS(condition_split(make({0.0, 0.0, 0.5, 0.5}), {0}, {0}), conditioning_error);
}

TEST_CASE("log_sum_exp handles empty and degenerate input") {
  CHECK(log_sum_exp({}) == -std::numeric_limits<double>::infinity());
  double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp({ninf, ninf}) == ninf);
  CHECK_THAT(log_sum_exp({0.0, 0.0}), WithinAbs(std::log(2.0), 1e-15));
  CHECK_THAT(log_sum_exp({1000.0, 1000.0}), WithinAbs(1000.0 + std::log(2.0), 1e-12));
  CHECK_THAT(log_sum_exp({ninf, 3.0}), WithinAbs(3.0, 1e-15));
}

TEST_CASE("support_of lists positive states") {
  Distribution p = make({0.0, 0.5, 0.5, 0.0});
  SupportSet s = support_of(p);
  CHECK(s.members() == std::vector<StateIndex>{1, 2});
}
