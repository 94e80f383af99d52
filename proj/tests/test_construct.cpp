#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "dbmc/construct.hpp"
#include "dbmc/inference.hpp"
#include "dbmc/plan.hpp"
#include "test_helpers.hpp"

using namespace dbmc;
using Catch::Matchers::WithinAbs;

namespace {

Distribution random_on_support(const SupportSet& sup, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> p(sup.space().size(), 0.0);
  double mass = 0.0;
  for (StateIndex i : sup.members()) {
    p[i] = u(rng);
    mass += p[i];
  }
  for (double& v : p) v /= mass;
  return Distribution(sup.space(), p);
}

void randomize_fractions(SharingStep& step, const SupportSet& sup, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (SharingPair& pr : step.pairs) {
    if (sup.contains(pr.first)) pr.fraction_first = u(rng);
    if (sup.contains(pr.second)) pr.fraction_second = u(rng);
  }
}

}  // namespace

TEST_CASE("copy layer reproduces its input") {
  std::mt19937_64 rng(7);
  for (auto [n, q] : {std::pair{3, 2}, {2, 3}}) {
    StateSpace s(n, q);
    double beta = 12.0;
    FeedforwardLayer copy = build_copy_layer(s, beta);
    Distribution p = testing::random_distribution(s, rng);
    Distribution out = pushforward(copy, p);
    double bound = n * (q - 1) * std::exp(-2.0 * beta);
    CHECK(total_variation(out, p) <= bound * 1.0001 + 1e-15);
  }
}

TEST_CASE("copy layer has a constant local partition sum") {
  StateSpace s(3, 2);
  std::vector<double> tilt = layer_tilt_log(build_copy_layer(s, 9.0));
  for (double t : tilt) CHECK_THAT(t, WithinAbs(tilt[0], 1e-12));
}

TEST_CASE("sharing layer splits a two-source pair evenly") {
  StateSpace s(2, 2);
  SupportSet sup(s, {0, 1, 2});  // 00, 01, 10
  SharingPair pr;
  pr.first = 0;
  pr.second = 1;
  pr.flip_coord = 0;
  pr.flip_symbol = 1;
  pr.fraction_first = 0.5;
  pr.fraction_second = 0.5;
  SharingStep step{{pr}};
  FeedforwardLayer layer = build_sharing_layer(sup, step, 48.0);
  Distribution in(s, {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0});
  Distribution out = pushforward(layer, in);
  CHECK_THAT(out[0], WithinAbs(1.0 / 6, 1e-10));
  CHECK_THAT(out[1], WithinAbs(1.0 / 6, 1e-10));
  CHECK_THAT(out[2], WithinAbs(0.5, 1e-10));
  CHECK_THAT(out[3], WithinAbs(1.0 / 6, 1e-10));
}

TEST_CASE("sharing layer tracks the exact sharing map on planned steps") {
  std::mt19937_64 rng(11);
  for (auto [n, q] : {std::pair{3, 2}, {4, 2}, {2, 3}}) {
    SharingPlan plan = plan_supports(n, q);
    for (std::size_t j = 0; j < plan.steps.size(); ++j) {
      const SupportSet& sup = plan.supports[j];
      SharingStep step = plan.steps[j];
      randomize_fractions(step, sup, rng);
      FeedforwardLayer layer = build_sharing_layer(sup, step, 40.0 * n);
      Distribution in = random_on_support(sup, rng);
      Distribution expect = sharing_map(sup, step, in);
      Distribution got = pushforward(layer, in);
      CHECK(total_variation(got, expect) <= 1e-8);
    }
  }
}

TEST_CASE("sharing layer rejects log-odds its sharpness cannot carry") {
  StateSpace s(2, 2);
  SupportSet sup(s, {0, 2});
  SharingPair pr;
  pr.first = 0;
  pr.second = 2;
  pr.flip_coord = 1;
  pr.flip_symbol = 1;
  SharingStep step{{pr}};
  std::vector<SharingFlow> flows = step_flows(sup, step);
  REQUIRE(flows.size() == 2);
  CHECK_THROWS_AS(build_sharing_layer_logodds(sup, step, 8.0, {5.0, 0.0}), domain_error);
  CHECK_THROWS_AS(
      build_sharing_layer_logodds(sup, step, 8.0,
                                  {std::numeric_limits<double>::quiet_NaN(), 0.0}),
      domain_error);
  CHECK_THROWS_AS(build_sharing_layer_logodds(sup, step, 8.0, {0.5}), dimension_error);
  CHECK_NOTHROW(build_sharing_layer_logodds(sup, step, 8.0, {1.0, -1.0}));
}

TEST_CASE("tilt accounts exactly for the upward pull of a stacked layer") {
  // For a two-layer model the top marginal is the top bias plus the layer's
  // local partition sums, normalized.
  std::mt19937_64 rng(13);
  for (auto [q, widths] : {std::pair<int, std::vector<int>>{2, {3, 2}}, {3, {2, 2}}}) {
    DbmParams m = testing::random_one_hot_model(q, widths, rng);
    FeedforwardLayer layer = conditional_layer(m, 0);
    std::vector<double> tilt = layer_tilt_log(layer);
    StateSpace top(widths[1], q);
    std::vector<double> expect(top.size());
    State x(static_cast<std::size_t>(widths[1]), 0);
    StateIndex xi = 0;
    do {
      double b = 0.0;
      for (int i = 0; i < widths[1]; ++i) b += m.bias(1, i, x[static_cast<std::size_t>(i)]);
      expect[xi] = b + tilt[xi];
      ++xi;
    } while (top.next(x));
    double lse = log_sum_exp(expect);
    std::vector<double> got = layer_log_marginal(m, 1);
    for (StateIndex i = 0; i < top.size(); ++i)
      CHECK_THAT(got[i], WithinAbs(expect[i] - lse, 1e-10));
  }
}

TEST_CASE("rbm support builder hits planned base supports") {
  std::mt19937_64 rng(17);
  for (auto [n, q] : {std::pair{4, 2}, {3, 2}, {5, 2}, {2, 3}}) {
    SharingPlan plan = plan_supports(n, q);
    const SupportSet& sup = plan.initial();
    Distribution target = random_on_support(sup, rng);
    RbmParams rbm = build_rbm_support(plan.space, plan.base_runs, target, 16.0);
    REQUIRE(rbm.widths() == std::vector<int>({n, n}));
    Distribution marg = layer_marginal(rbm, 0);
    CHECK(total_variation(marg, target) <= 1e-6);
    double leak = 0.0;
    for (StateIndex i = 0; i < plan.space.size(); ++i)
      if (!sup.contains(i)) leak += marg[i];
    CHECK(leak <= 1e-8);
  }
}

TEST_CASE("rbm support builder survives extreme mass ratios and zeros") {
  StateSpace s(4, 2);
  SharingPlan plan = plan_supports(4, 2);
  const SupportSet& sup = plan.initial();  // 0000 0100 1000 1100
  REQUIRE(sup.members() == std::vector<StateIndex>{0, 4, 8, 12});

  SECTION("nine decades between support masses") {
    std::vector<double> p(16, 0.0);
    p[0] = 1.0;
    p[4] = 1e-9;
    p[8] = 1e-9;
    p[12] = 1.0;
    double mass = 2.0 + 2e-9;
    for (double& v : p) v /= mass;
    Distribution target(s, p);
    RbmParams rbm = build_rbm_support(s, plan.base_runs, target, 16.0);
    Distribution marg = layer_marginal(rbm, 0);
    CHECK(total_variation(marg, target) <= 1e-6);
    // the small states must survive in ratio, not just in TV
    CHECK_THAT(marg[4] / marg[0], WithinAbs(1e-9, 1e-11));
  }
  SECTION("an exactly zero support state is floored, not fatal") {
    std::vector<double> p(16, 0.0);
    p[0] = 0.5;
    p[4] = 0.5;
    Distribution target(s, p);
    RbmParams rbm = build_rbm_support(s, plan.base_runs, target, 16.0);
    Distribution marg = layer_marginal(rbm, 0);
    CHECK(total_variation(marg, target) <= 1e-6);
  }
}

TEST_CASE("rbm support builder covers runs of mixed length") {
  StateSpace s(3, 2);
  std::vector<SupportRun> runs;
  runs.push_back(SupportRun{s.encode({0, 0, 0}), 2, 0, 2});  // 000, 001
  runs.push_back(SupportRun{s.encode({1, 1, 0}), 2, 0, 1});  // 110 alone
  std::mt19937_64 rng(19);
  SupportSet sup = detail::run_states(s, runs);
  REQUIRE(sup.members() == std::vector<StateIndex>{0, 1, 6});
  Distribution target = random_on_support(sup, rng);
  RbmParams rbm = build_rbm_support(s, runs, target, 16.0);
  CHECK(total_variation(layer_marginal(rbm, 0), target) <= 1e-6);
}

TEST_CASE("rbm support builder validates its inputs") {
  StateSpace s(3, 2);
  std::vector<SupportRun> runs{SupportRun{0, 2, 0, 2}, SupportRun{6, 2, 0, 2}};
  Distribution ok = uniform(s);

  CHECK_THROWS_AS(build_rbm_support(s, runs, ok, -1.0), domain_error);
  CHECK_THROWS_AS(build_rbm_support(s, {}, ok, 8.0), plan_error);

  SECTION("runs must share their line coordinate") {
    std::vector<SupportRun> mixed{SupportRun{0, 2, 0, 2}, SupportRun{6, 1, 1, 1}};
    CHECK_THROWS_AS(build_rbm_support(s, mixed, ok, 8.0), plan_error);
  }
  SECTION("runs must lie on distinct lines") {
    std::vector<SupportRun> dup{SupportRun{0, 2, 0, 2}, SupportRun{0, 2, 0, 1}};
    CHECK_THROWS_AS(build_rbm_support(s, dup, ok, 8.0), plan_error);
  }
  SECTION("anchor must carry the run's first symbol") {
    std::vector<SupportRun> bad{SupportRun{1, 2, 0, 2}};
    CHECK_THROWS_AS(build_rbm_support(s, bad, ok, 8.0), plan_error);
  }
  SECTION("run symbols must fit the alphabet") {
    std::vector<SupportRun> bad{SupportRun{1, 2, 1, 2}};
    CHECK_THROWS_AS(build_rbm_support(s, bad, ok, 8.0), plan_error);
  }
  SECTION("more runs than hidden units") {
    StateSpace tiny(2, 2);
    std::vector<SupportRun> four(4, SupportRun{0, 1, 0, 1});
    CHECK_THROWS_AS(build_rbm_support(tiny, four, uniform(tiny), 8.0),
                    plan_error);
  }
  SECTION("all run masses vanishing is degenerate") {
    Distribution off = point_mass(s, s.encode({0, 1, 0}));
    CHECK_THROWS_AS(build_rbm_support(s, runs, off, 8.0), degenerate_product_error);
  }
  SECTION("log masses must be well formed") {
    std::vector<double> lm(s.size(), 0.0);
    lm[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(build_rbm_support_log(s, runs, lm, 8.0), domain_error);
    CHECK_THROWS_AS(build_rbm_support_log(s, runs, std::vector<double>(3, 0.0), 8.0),
                    dimension_error);
  }
}
