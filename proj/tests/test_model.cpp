#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dbmc/model.hpp"
#include "test_helpers.hpp"

using namespace dbmc;
using Catch::Matchers::WithinAbs;

TEST_CASE("factories validate their shapes") {
  CHECK_THROWS_AS(DbmParams::binary({2}, {}, {{0, 0}}), dimension_error);
  CHECK_THROWS_AS(DbmParams::binary({2, 0}, {{{0.0}, {0.0}}}, {{0, 0}, {}}), dimension_error);
  CHECK_THROWS_AS(DbmParams::binary({1, 1}, {}, {{0}, {0}}), dimension_error);
  CHECK_THROWS_AS(DbmParams::binary({1, 1}, {{{0}}}, {{0}}), dimension_error);
  CHECK_THROWS_AS(DbmParams::binary({1, 2}, {{{0}}}, {{0}, {0, 0}}), dimension_error);
  CHECK_THROWS_AS(
      DbmParams::binary({1, 1}, {{{std::nan("")}}}, {{0}, {0}}), domain_error);
  CHECK_THROWS_AS(DbmParams::one_hot(1, {1, 1}, {{0}}, {{0}, {0}}), domain_error);
  CHECK_THROWS_AS(DbmParams::one_hot(3, {1, 1}, {{0.0}}, {{0, 0, 0}, {0, 0, 0}}),
                  dimension_error);
  CHECK_NOTHROW(DbmParams::one_hot(3, {1, 1}, {std::vector<double>(9, 0.0)},
                                   {{0, 0, 0}, {0, 0, 0}}));
}

TEST_CASE("compact accessors place mass at symbol pair (1,1)") {
  DbmParams m = DbmParams::binary({2, 1}, {{{1.5}, {-2.0}}}, {{0.25, 0.5}, {1.0}});
  CHECK(m.weight(0, 0, 1, 0, 1) == 1.5);
  CHECK(m.weight(0, 1, 1, 0, 1) == -2.0);
  CHECK(m.weight(0, 0, 0, 0, 1) == 0.0);
  CHECK(m.weight(0, 0, 1, 0, 0) == 0.0);
  CHECK(m.bias(0, 1, 1) == 0.5);
  CHECK(m.bias(0, 1, 0) == 0.0);
  CHECK(m.bias(1, 0, 1) == 1.0);
  CHECK(m.depth() == 1);
  CHECK(m.layer_count() == 2);
  CHECK(m.total_units() == 3);
}

TEST_CASE("one-hot embedding reproduces compact energies exactly") {
  std::mt19937_64 rng(21);
  DbmParams m = testing::random_binary_model({2, 3, 2}, rng);
  DbmParams oh = m.as_one_hot();
  StateSpace joint(m.total_units(), 2);
  State x(static_cast<std::size_t>(m.total_units()), 0);
  do {
    auto layers = detail::split_layers(m, x);
    CHECK(negative_energy(m, layers) == negative_energy(oh, layers));
  } while (joint.next(x));
}

TEST_CASE("single-edge RBM partition function is log(3 + e^w)") {
  for (double w : {-1.0, 0.0, 0.7, 2.5}) {
    DbmParams m = DbmParams::binary({1, 1}, {{{w}}}, {{0.0}, {0.0}});
    CHECK_THAT(log_partition_oracle(m), WithinAbs(std::log(3.0 + std::exp(w)), 1e-14));
  }
}

TEST_CASE("zero parameters give the uniform joint") {
  DbmParams m = DbmParams::zeros(2, {2, 2});
  Distribution j = joint_distribution_oracle(m);
  for (StateIndex i = 0; i < j.space.size(); ++i) CHECK_THAT(j[i], WithinAbs(1.0 / 16, 1e-15));

  DbmParams m3 = DbmParams::zeros(3, {1, 1});
  Distribution j3 = joint_distribution_oracle(m3);
  for (StateIndex i = 0; i < j3.space.size(); ++i) CHECK_THAT(j3[i], WithinAbs(1.0 / 9, 1e-15));
}

TEST_CASE("conditional layer gives per-unit softmax probabilities") {
  // P(out = 1 | in) = sigmoid(w * in + b)
  double w = 1.3, b = -0.4;
  DbmParams m = DbmParams::binary({1, 1}, {{{w}}}, {{b}, {0.0}});
  FeedforwardLayer layer = conditional_layer(m, 0);
  for (int in = 0; in < 2; ++in) {
    double logit = layer.score(0, 1, {static_cast<std::uint8_t>(in)}) -
                   layer.score(0, 0, {static_cast<std::uint8_t>(in)});
    CHECK_THAT(logit, WithinAbs(w * in + b, 1e-15));
  }
  CHECK_THROWS_AS(conditional_layer(m, 1), dimension_error);
}

TEST_CASE("negative_energy validates layer states") {
  DbmParams m = DbmParams::zeros(2, {2, 2});
  CHECK_THROWS_AS(negative_energy(m, {{0, 0}}), dimension_error);
  CHECK_THROWS_AS(negative_energy(m, {{0}, {0, 0}}), dimension_error);
  CHECK_THROWS_AS(negative_energy(m, {{0, 2}, {0, 0}}), domain_error);
}

TEST_CASE("oracle refuses oversized joint spaces") {
  DbmParams m = DbmParams::zeros(2, {15, 15});
  CHECK_THROWS_AS(joint_distribution_oracle(m, 1 << 10), size_error);
}
