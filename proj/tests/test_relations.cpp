#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "cwrdm/relations.hpp"
#include "test_support.hpp"

using namespace cwrdm;

namespace {

std::vector<Rational> values(const BVector& b) { return b.values; }

}  // namespace

TEST_CASE("b_vector reproduces the golden columns") {
  // doubled units; the golden spin-unit columns are these halved
  const auto m = spin_model(2);
  REQUIRE(values(b_vector(m, 4, {2})[0]) ==
          std::vector<Rational>{{-5, 2}, {-1, 2}, {3, 2}});
  REQUIRE(values(b_vector(m, 4, {-2})[0]) ==
          std::vector<Rational>{{-3, 2}, {1, 2}, {5, 2}});

  const auto b = b_vector(spin_model(1), 3, {1})[0];
  REQUIRE(values(b) == std::vector<Rational>{{-4, 3}, {2, 3}});
  // the single partition of (S=1, slots=3) is n = (1,2)
  REQUIRE(Rational(1) * b.values[0] + Rational(2) * b.values[1] == Rational(0));
}

TEST_CASE("b_vector annihilates every partition, exactly") {
  for (int two_j = 1; two_j <= 4; ++two_j)
    for (int slots = 2; slots <= 5; ++slots)
      for (int target = -two_j * slots; target <= two_j * slots; ++target) {
        const auto model = spin_model(two_j);
        const auto parts = enumerate_partitions(model, slots, {target});
        if (parts.empty()) continue;
        const auto b = b_vector(model, slots, {target})[0];
        bool nonzero = false;
        for (const auto& v : b.values) nonzero = nonzero || !v.is_zero();
        REQUIRE(nonzero);
        for (const auto& p : parts) {
          Rational dot;
          for (int r = 0; r < model.dim(); ++r)
            dot += Rational(p.frequencies[r]) * b.values[r];
          REQUIRE(dot == Rational(0));
        }
      }
}

TEST_CASE("b_vector per Cartan component for vector weights") {
  const auto model = su3_fundamental();
  const auto bs = b_vector(model, 3, {2, 0});
  REQUIRE(bs.size() == 2);
  for (int c = 0; c < 2; ++c) {
    REQUIRE(bs[c].component == c);
    for (int r = 0; r < 3; ++r)
      REQUIRE(bs[c].values[r] ==
              Rational(model.weights[r][c]) - Rational(c == 0 ? 2 : 0, 3));
    const auto parts = enumerate_partitions(model, 3, {2, 0});
    REQUIRE_FALSE(parts.empty());
    for (const auto& p : parts) {
      Rational dot;
      for (int r = 0; r < 3; ++r) dot += Rational(p.frequencies[r]) * bs[c].values[r];
      REQUIRE(dot == Rational(0));
    }
  }
}

TEST_CASE("homogeneity: scaling preserves annihilation and the sum status") {
  const auto model = spin_model(2);
  const auto parts = enumerate_partitions(model, 4, {2});
  auto b = b_vector(model, 4, {2})[0];
  const bool sum_nonzero = !b.sum().is_zero();
  for (const Rational scale : {Rational(3), Rational(-1, 7), Rational(5, 2)}) {
    BVector scaled = b;
    for (auto& v : scaled.values) v *= scale;
    for (const auto& p : parts) {
      Rational dot;
      for (int r = 0; r < model.dim(); ++r) dot += Rational(p.frequencies[r]) * scaled.values[r];
      REQUIRE(dot == Rational(0));
    }
    REQUIRE(!scaled.sum().is_zero() == sum_nonzero);
  }
}

TEST_CASE("W state satisfies the diagonal relation explicitly") {
  const auto w_state = testsupport::w_state();
  const auto report = relation_residual(w_state, 1, MultiIndex{1}, {1});
  REQUIRE_FALSE(report.vacuous);
  REQUIRE(report.absolute[0] < 1e-14);
}

TEST_CASE("sampled sector states satisfy every feasible context") {
  struct Case {
    WeightModel model;
    int n;
    WeightVec w;
  };
  const Case cases[] = {
      {spin_model(1), 4, {0}},
      {spin_model(2), 4, {2}},
      {spin_model(3), 3, {-1}},
      {su3_fundamental(), 4, {1, 1}},
  };
  for (const auto& c : cases) {
    const SystemShape shape{c.model, c.n};
    for (std::uint64_t seed : {10ull, 11ull}) {
      const auto state = sample_state(shape, c.w, seed);
      for (const auto& ctx : residual_sweep(state, c.w, 1, c.n - 1)) {
        if (ctx.vacuous) continue;
        for (double r : ctx.absolute) REQUIRE(r <= 1e-10);
        // relative residual is bounded by 1 and tiny for sector states
        for (double r : ctx.relative) REQUIRE(r <= 1e-9);
      }
    }
  }
}

TEST_CASE("two-sector states violate some context") {
  const SystemShape shape{spin_model(1), 4};
  const auto state = testsupport::mix_sectors(shape, {0}, {2}, 17);
  double worst = 0;
  for (const auto& ctx : residual_sweep(state, {0}, 1, 3))
    if (!ctx.vacuous)
      for (double r : ctx.absolute) worst = std::max(worst, r);
  REQUIRE(worst > 1e-3);
}

TEST_CASE("arbitrary positions agree with the prefix convention") {
  const SystemShape shape{spin_model(2), 4};
  const auto state = sample_state(shape, WeightVec{0}, 23);
  // positions {2,3} on a permutation-symmetric context set
  const auto r1 = relation_residual(state, std::vector<int>{2, 3}, MultiIndex{0, 1}, {0});
  REQUIRE_FALSE(r1.vacuous);
  REQUIRE(r1.absolute[0] <= 1e-10);
}

TEST_CASE("vacuous context is reported, not computed") {
  const SystemShape shape{spin_model(1), 3};
  std::vector<Complex> amps(shape.full_dimension(), Complex{0, 0});
  amps[linear_index(shape, {1, 1, 1})] = 1.0;
  const auto state = make_full_state(shape, amps);
  // I0 = down at position 1, w = 3: S = 4 exceeds two remaining slots
  const auto report = relation_residual(state, 1, MultiIndex{0}, {3});
  REQUIRE(report.vacuous);
  REQUIRE(report.absolute[0] == 0.0);
}

TEST_CASE("induction shift: zero targets are fixed points") {
  const auto shift = induction_shift(spin_model(2), 5, 2, {0}, {0});
  REQUIRE(shift.delta[0] == Rational(0));
  REQUIRE(values(shift.b_prime[0]) == values(b_vector(spin_model(2), 4, {0})[0]));
}

TEST_CASE("induction shift: the derived example and the exact pattern") {
  const auto model = spin_model(2);
  const auto shift = induction_shift(model, 5, 1, {2}, {2});
  REQUIRE(shift.delta[0] == Rational(1, 10));
  for (int r = 0; r < model.dim(); ++r)
    REQUIRE(shift.b_prime[0].values[r] == Rational(model.weights[r][0]) - Rational(2, 5));
  REQUIRE(values(shift.b_prime[0]) == values(b_vector(model, 5, {2})[0]));

  for (const auto& p : enumerate_partitions(model, 5, {2})) {
    Rational dot;
    for (int r = 0; r < model.dim(); ++r)
      dot += Rational(p.frequencies[r]) * shift.b_prime[0].values[r];
    REQUIRE(dot == Rational(0));
  }
}

TEST_CASE("trace-of-trace identity") {
  for (int n = 2; n <= 5; ++n) {
    const SystemShape shape{spin_model(1), n};
    const auto state = sample_state(shape, std::nullopt, 40 + static_cast<std::uint64_t>(n));
    const auto report = trace_of_trace_check(state, 0);
    REQUIRE(report.max_abs_diff <= 1e-12);
    double total = 0;
    for (double v : report.lhs) total += v;
    REQUIRE(total == Catch::Approx(static_cast<double>(n - 1)).margin(1e-10));
  }

  // product state |up>^N concentrates everything on I0 = up
  const SystemShape shape{spin_model(1), 4};
  std::vector<Complex> amps(shape.full_dimension(), Complex{0, 0});
  amps[linear_index(shape, {1, 1, 1, 1})] = 1.0;
  const auto report = trace_of_trace_check(make_full_state(shape, amps), 0);
  REQUIRE(report.lhs[1] == Catch::Approx(3.0).margin(1e-12));
  REQUIRE(report.lhs[0] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("trace-of-trace at a non-leading kept position") {
  const SystemShape shape{spin_model(2), 4};
  const auto state = sample_state(shape, WeightVec{2}, 77);
  for (int pos = 0; pos < 4; ++pos)
    REQUIRE(trace_of_trace_check(state, pos).max_abs_diff <= 1e-12);
}

TEST_CASE("perfect deviation: Bell, GHZ, and sampled sector states") {
  REQUIRE(perfect_deviation(testsupport::bell_state()).max_deviation < 1e-12);

  const auto ghz = perfect_deviation(testsupport::ghz4_state());
  REQUIRE(ghz.max_deviation > 0.4);
  // the 1-particle marginals (|traced| = 3) are maximally mixed
  for (const auto& entry : ghz.table)
    if (entry.traced.size() == 3) REQUIRE(entry.deviation < 1e-12);

  const SystemShape shape{spin_model(1), 4};
  for (std::uint64_t seed : {3ull, 4ull, 5ull}) {
    const auto state = sample_state(shape, WeightVec{0}, seed);
    REQUIRE(perfect_deviation(state).max_deviation > 0.0);
  }
}

TEST_CASE("impossibility witness: structure and exact identity") {
  struct Case {
    WeightModel model;
    int n;
    WeightVec w;
  };
  const Case cases[] = {
      {spin_model(1), 4, {0}},
      {spin_model(2), 5, {0}},
      {spin_model(2), 7, {4}},
      {su3_fundamental(), 4, {1, 1}},
      {direct_sum({spin_model(1), spin_model(1)}), 4, {0}},
  };
  for (const auto& c : cases) {
    const auto witness = impossibility_witness(c.model, c.n, c.w);
    REQUIRE(witness.m >= 1);
    REQUIRE(witness.m + 1 <= c.n / 2);
    REQUIRE(witness.s[witness.component] != 0);
    REQUIRE(sector_nonempty(c.model, c.n - witness.m, witness.s));
    REQUIRE_FALSE(witness.contradiction_value.is_zero());
    REQUIRE(witness.contradiction_value == witness.b.sum());
    if (c.model.weights_sum_to_zero())
      REQUIRE(witness.contradiction_value ==
              Rational(-static_cast<long long>(c.model.dim()) * witness.s[witness.component],
                       c.n - witness.m));
  }
}

TEST_CASE("impossibility witness: golden contexts") {
  // spin-1/2, N=4, w=0, I0=(up): S = -1, sum b = 2/3
  const auto b1 = b_vector(spin_model(1), 3, {-1})[0];
  REQUIRE(b1.sum() == Rational(2, 3));
  // spin-1, N=5, w=0, I0 with weight -2: S = 2, sum b = -3/2
  const auto b2 = b_vector(spin_model(2), 4, {2})[0];
  REQUIRE(b2.sum() == Rational(-3, 2));

  const auto witness = impossibility_witness(spin_model(2), 5, {0});
  REQUIRE(witness.m == 1);
  REQUIRE(witness.i0 == MultiIndex{0});
  REQUIRE(witness.s == WeightVec{2});
  REQUIRE(witness.contradiction_value == Rational(-3, 2));
}

TEST_CASE("impossibility witness preconditions") {
  REQUIRE_THROWS_AS(impossibility_witness(spin_model(1), 3, {0}), std::invalid_argument);
  REQUIRE_THROWS_AS(impossibility_witness(spin_model(1), 4, {9}), std::invalid_argument);
}
