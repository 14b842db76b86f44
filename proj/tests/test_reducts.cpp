#include <doctest.h>

#include "caid/automaton.hpp"
#include "caid/error.hpp"
#include "caid/reducts.hpp"
#include "oracles.hpp"

using namespace caid;

namespace {

const AttributeId A = AttributeId::cell(-1);
const AttributeId B = AttributeId::cell(0);
const AttributeId C = AttributeId::cell(1);

DecisionTable xor_table() {
  DecisionTable t;
  t.alphabet = Alphabet::binary();
  t.attributes = {A, B, C};
  for (int p = 0; p < 8; ++p) {
    const State a = p >> 2 & 1, b = p >> 1 & 1, c = p & 1;
    t.rows.push_back({{a, b, c}, a ^ b, 1});
  }
  return aggregate(t);
}

DecisionTable eca184_table(std::uint64_t seed = 1) {
  const auto eca = ReferenceAutomaton::elementary(184);
  Rng rng(seed);
  const Trace trace = run_trace(eca, eca.random_lattice(Shape::ring(100), 0.5, rng), 20, seed);
  ExtractOptions opt;
  opt.sample_limit = 500;
  opt.seed = seed;
  return extract_table(trace, 10, opt);
}

std::vector<AttributeId> near() { return {A, B, C}; }

}  // namespace

TEST_CASE("decision consistency") {
  const DecisionTable t = eca184_table();
  CHECK(decision_consistent(t, t.attributes));
  CHECK(decision_consistent(t, near()));
  CHECK_FALSE(decision_consistent(t, {B, C}));
  CHECK_THROWS_AS(decision_consistent(t, {AttributeId::cell(11)}), UnknownAttribute);
}

TEST_CASE("XOR with an irrelevant attribute has the unique reduct {a, b}") {
  const DecisionTable t = xor_table();
  REQUIRE(oracle::reducts(t) == std::vector<std::uint64_t>{0b011});
  const auto r = exhaustive_reducts(t);
  REQUIRE(r.size() == 1);
  CHECK(r[0].attributes == std::vector<AttributeId>{A, B});
  CHECK(r[0].stability == 1.0);
  CHECK_THROWS_AS(exhaustive_reducts(t, 1), NoReductFound);
}

TEST_CASE("duplicate attributes give one reduct each, nearer first") {
  DecisionTable t;
  t.alphabet = Alphabet::binary();
  const AttributeId far = AttributeId::cell(3);
  t.attributes = {B, far};
  t.rows = {{{0, 0}, 0, 2}, {{1, 1}, 1, 3}};
  const auto r = exhaustive_reducts(t);
  REQUIRE(r.size() == 2);
  CHECK(r[0].attributes == std::vector<AttributeId>{B});
  CHECK(r[1].attributes == std::vector<AttributeId>{far});
}

TEST_CASE("single-decision table has the empty reduct") {
  DecisionTable t;
  t.alphabet = Alphabet::binary();
  t.attributes = {A, B};
  t.rows = {{{0, 1}, 1, 1}, {{1, 1}, 1, 4}};
  const auto r = exhaustive_reducts(t);
  REQUIRE(r.size() == 1);
  CHECK(r[0].attributes.empty());
}

TEST_CASE("ECA 184 window 10") {
  const DecisionTable t = eca184_table();
  REQUIRE(t.attribute_count() == 21);
  const auto shortest = shortest_reducts(t);
  REQUIRE(shortest.size() == 1);
  CHECK(shortest[0].attributes == near());
  for (const auto& r : exhaustive_reducts(t, 4)) {
    CHECK(decision_consistent(t, r.attributes));
    for (std::size_t i = 0; i < r.size(); ++i) {
      auto fewer = r.attributes;
      fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(i));
      CHECK_FALSE(decision_consistent(t, fewer));
    }
  }
}

TEST_CASE("dynamic reducts") {
  const DecisionTable t = eca184_table();
  SUBCASE("defaults keep the true neighborhood stable") {
    const auto r = dynamic_reducts(t);
    const auto it = std::find_if(r.begin(), r.end(), [](const Reduct& x) { return x.attributes == near(); });
    REQUIRE(it != r.end());
    CHECK(it->stability >= 0.9);
    CHECK(r.front().stability >= r.back().stability);
  }
  SUBCASE("fraction 1 makes every candidate fully stable") {
    DynamicReductOptions opt;
    opt.fraction = 1.0;
    opt.n_subtables = 4;
    const DecisionTable x = xor_table();
    for (const auto& r : dynamic_reducts(x, opt)) CHECK(r.stability == 1.0);
    opt.max_size = 4;
    const auto dyn = dynamic_reducts(t, opt);
    const auto ex = exhaustive_reducts(t, 4);
    CHECK(dyn.size() == ex.size());
    for (const auto& r : dyn) CHECK(r.stability == 1.0);
  }
  SUBCASE("same seed, same result") {
    DynamicReductOptions opt;
    opt.seed = 99;
    opt.fraction = 0.5;
    CHECK(dynamic_reducts(t, opt) == dynamic_reducts(t, opt));
  }
  SUBCASE("parameter errors") {
    DynamicReductOptions opt;
    opt.n_subtables = 0;
    CHECK_THROWS_AS(dynamic_reducts(t, opt), ParameterError);
    opt = {};
    opt.fraction = 0.0;
    CHECK_THROWS_AS(dynamic_reducts(t, opt), ParameterError);
    opt = {};
    opt.stability_threshold = 1.5;
    CHECK_THROWS_AS(dynamic_reducts(t, opt), ParameterError);
    opt = {};
    opt.max_size = 1;
    CHECK_THROWS_AS(dynamic_reducts(xor_table(), opt), NoReductFound);
  }
}

TEST_CASE("consistency ratio agrees with pair counting") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const DecisionTable t = oracle::random_table(rng, 5, 3, 40, 2, true);
    for (std::uint64_t m = 0; m < 32; m += 3) {
      CHECK(consistency_ratio(t, attributes_of(t, m)) == doctest::Approx(oracle::consistency_ratio(t, m)).epsilon(1e-12));
    }
  }
  CHECK(consistency_ratio(xor_table(), {A, B}) == 1.0);
  CHECK(consistency_ratio(xor_table(), {A}) == doctest::Approx(oracle::consistency_ratio(xor_table(), 0b001)));
}

TEST_CASE("majority decision table") {
  DecisionTable t;
  t.alphabet = Alphabet::binary();
  t.attributes = {B};
  t.rows = {{{0}, 0, 3}, {{0}, 1, 5}, {{1}, 0, 2}, {{1}, 1, 2}};
  const DecisionTable m = majority_decision_table(t);
  REQUIRE(m.rows.size() == 2);
  CHECK(m.rows[0] == Observation{{0}, 1, 8});
  CHECK(m.rows[1] == Observation{{1}, 0, 4});
}

TEST_CASE("shorten") {
  const DecisionTable t = eca184_table();
  CHECK(shorten(t, near(), 1.0) == near());
  CHECK_THROWS_AS(shorten(t, near(), 0.0), ParameterError);
  CHECK_THROWS_AS(shorten(t, near(), 1.5), ParameterError);
  CHECK_THROWS_AS(shorten(project(t, near()), {AttributeId::cell(5)}, 0.9), UnknownAttribute);

  SUBCASE("an oversized reduct loses its irrelevant attributes first") {
    const std::vector<AttributeId> wide{AttributeId::cell(-3), A, B, C, AttributeId::cell(2)};
    const DecisionTable p = project(t, wide);
    CHECK(shorten(p, wide, 1.0) == near());
  }
  SUBCASE("noisy decisions") {
    // decision = b, except a rare flip when c = 1; c is not worth keeping at 0.95.
    DecisionTable n;
    n.alphabet = Alphabet::binary();
    n.attributes = {B, C};
    n.rows = {{{0, 0}, 0, 50}, {{0, 1}, 0, 48}, {{0, 1}, 1, 2}, {{1, 0}, 1, 50}, {{1, 1}, 1, 50}};
    n = aggregate(n);
    CHECK(shorten(n, {B, C}, 0.95) == std::vector<AttributeId>{B});
  }
}

TEST_CASE("neighborhood selection") {
  const Neighborhood n = select_neighborhood({Reduct{near(), 1.0}});
  CHECK(n.offsets == std::vector<Offset>{{-1, 0}, {0, 0}, {1, 0}});
  CHECK(n.avg_distance == doctest::Approx(2.0 / 3.0));

  const std::vector<AttributeId> five{AttributeId::cell(-2), A, B, C, AttributeId::cell(2)};
  const std::vector<AttributeId> far3{AttributeId::cell(-9), AttributeId::cell(8), AttributeId::cell(9)};
  CHECK(select_neighborhood({Reduct{five, 1.0}, Reduct{far3, 1.0}}).offsets.size() == 3);

  const std::vector<AttributeId> close{B, C};
  const std::vector<AttributeId> wide{AttributeId::cell(-3), AttributeId::cell(3)};
  CHECK(select_neighborhood({Reduct{wide, 1.0}, Reduct{close, 1.0}}).avg_distance == doctest::Approx(0.5));

  const Neighborhood with_l = neighborhood_of({AttributeId::cell(0, 0), AttributeId::derived("L")});
  CHECK(with_l.offsets == std::vector<Offset>{{0, 0}});
  CHECK(with_l.derived == std::vector<std::string>{"L"});
  CHECK(with_l.avg_distance == 0.0);

  CHECK_THROWS_AS(select_neighborhood({}), std::invalid_argument);
}

TEST_CASE("reduct report line") {
  CHECK(format_reduct(Reduct{near(), 1.0}, 1) == "reduct size=3 stability=1.000 attrs=[c[-1],c[0],c[+1]] avg_dist=0.667");
  CHECK(format_reduct(Reduct{{AttributeId::cell(0, 0), AttributeId::derived("L")}, 0.5}, 2) ==
        "reduct size=2 stability=0.500 attrs=[c[0,0],L] avg_dist=0.000");
}
