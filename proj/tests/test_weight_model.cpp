#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "cwrdm/io.hpp"
#include "cwrdm/weight_model.hpp"

using namespace cwrdm;

TEST_CASE("spin_model produces the doubled ladder") {
  const auto doublet = spin_model(1);
  REQUIRE(doublet.dim() == 2);
  REQUIRE(doublet.cartan_dim == 1);
  REQUIRE(doublet.weights == std::vector<WeightVec>{{-1}, {1}});

  const auto triplet = spin_model(2);
  REQUIRE(triplet.weights == std::vector<WeightVec>{{-2}, {0}, {2}});

  const auto trivial = spin_model(0);
  REQUIRE(trivial.dim() == 1);
  REQUIRE(trivial.weights == std::vector<WeightVec>{{0}});

  REQUIRE_THROWS_AS(spin_model(-1), std::invalid_argument);
}

TEST_CASE("spin_model weights are negation-symmetric and sum to zero") {
  for (int two_j = 0; two_j <= 6; ++two_j) {
    const auto m = spin_model(two_j);
    REQUIRE(m.weights_sum_to_zero());
    std::multiset<int> values, negated;
    for (const auto& a : m.weights) {
      values.insert(a[0]);
      negated.insert(-a[0]);
    }
    REQUIRE(values == negated);
    REQUIRE(std::is_sorted(m.weights.begin(), m.weights.end()));
  }
}

TEST_CASE("direct_sum concatenates weight lists") {
  const auto two_doublets = direct_sum({spin_model(1), spin_model(1)});
  REQUIRE(two_doublets.dim() == 4);
  REQUIRE(two_doublets.weights == std::vector<WeightVec>{{-1}, {1}, {-1}, {1}});

  REQUIRE(direct_sum({spin_model(0)}).weights == std::vector<WeightVec>{{0}});

  const auto mixed = direct_sum({spin_model(2), spin_model(0)});
  REQUIRE(mixed.weights == std::vector<WeightVec>{{-2}, {0}, {2}, {0}});
  REQUIRE(mixed.weights_sum_to_zero());

  REQUIRE_THROWS_AS(direct_sum({spin_model(1), su3_fundamental()}), std::invalid_argument);
}

TEST_CASE("direct_sum is associative up to concatenation order") {
  const auto a = spin_model(1), b = spin_model(2), c = spin_model(0);
  const auto left = direct_sum({direct_sum({a, b}), c});
  const auto right = direct_sum({a, direct_sum({b, c})});
  REQUIRE(left.weights == right.weights);
}

TEST_CASE("su3_fundamental weights") {
  const auto m = su3_fundamental();
  REQUIRE(m.dim() == 3);
  REQUIRE(m.cartan_dim == 2);
  REQUIRE(m.weight_sum() == WeightVec{0, 0});
  std::set<WeightVec> distinct(m.weights.begin(), m.weights.end());
  REQUIRE(distinct.size() == 3);
  REQUIRE(std::is_sorted(m.weights.begin(), m.weights.end()));
}

TEST_CASE("constraint spec validation") {
  const auto m = su3_fundamental();
  ConstraintSpec linear;
  linear.kind = ConstraintKind::LinearWeight;
  linear.target = {0};
  REQUIRE_THROWS_AS(linear.validate(m), std::invalid_argument);
  linear.target = {0, 0};
  REQUIRE_NOTHROW(linear.validate(m));

  ConstraintSpec custom;
  custom.kind = ConstraintKind::Custom;
  custom.target = {3};
  custom.scores = {1, 2};
  REQUIRE_THROWS_AS(custom.validate(m), std::invalid_argument);
  custom.scores = {1, 2, 3};
  REQUIRE_NOTHROW(custom.validate(m));
}

TEST_CASE("weight model JSON round trip") {
  const auto m = direct_sum({spin_model(2), spin_model(0)});
  const auto loaded = weight_model_from_json(to_json(m));
  REQUIRE(loaded.cartan_dim == m.cartan_dim);
  REQUIRE(loaded.weights == m.weights);
  REQUIRE(loaded.label == m.label);
}
