#include <doctest.h>

#include "caid/error.hpp"
#include "caid/model.hpp"
#include "caid/repro.hpp"

using namespace caid;

namespace {

const AttributeId L1 = AttributeId::cell(-1);
const AttributeId C0 = AttributeId::cell(0);
const AttributeId R1 = AttributeId::cell(1);

IdentifiedModel three_cell_model(ModelMode mode) {
  IdentifiedModel m;
  m.alphabet = Alphabet::binary();
  m.dims = 1;
  m.neighborhood = neighborhood_of({L1, C0, R1});
  m.mode = mode;
  return m;
}

IdentifiedModel eca184_model() {
  IdentifiedModel m = three_cell_model(ModelMode::Deterministic);
  m.rules = eca184_reference_rules();
  return m;
}

IdentifiedModel nasch_model() {
  IdentifiedModel m = three_cell_model(ModelMode::Probabilistic);
  m.probabilistic_rules = nasch_reference_rules();
  return m;
}

Lattice ring(std::vector<State> cells) {
  const int w = static_cast<int>(cells.size());
  return Lattice(Shape::ring(w), std::move(cells));
}

DecisionRule rule(std::vector<Descriptor> ds, State d) { return DecisionRule{make_premise(std::move(ds)), d, {}}; }

Lattice random_ring(int width, double density, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<State> cells(static_cast<std::size_t>(width), 0);
  const auto k = static_cast<std::size_t>(density * width);
  for (std::size_t i = 0; i < k; ++i) cells[i] = 1;
  std::shuffle(cells.begin(), cells.end(), rng);
  return ring(std::move(cells));
}

}  // namespace

TEST_CASE("deterministic rule sets") {
  const IdentifiedModel m = eca184_model();
  CHECK_NOTHROW(m.validate());
  // (c[-1], c[0]) = (1, 0) moves a car in whatever c[+1] holds
  CHECK(decide(m, {1, 0, 0}) == 1);
  CHECK(decide(m, {1, 0, 1}) == 1);
  CHECK(step_with_ruleset(m, ring({1, 1, 0, 0, 1}), 0) == ring({1, 0, 1, 0, 1}));
}

TEST_CASE("the first matching rule wins") {
  IdentifiedModel m = three_cell_model(ModelMode::Deterministic);
  m.rules = {rule({{C0, 1}}, 1), rule({{L1, 0}, {C0, 1}}, 0), rule({{C0, 0}}, 0)};
  CHECK(decide(m, {0, 1, 0}) == 1);
  std::swap(m.rules[0], m.rules[1]);
  CHECK(decide(m, {0, 1, 0}) == 0);
  CHECK(decide(m, {1, 1, 0}) == 1);
}

TEST_CASE("probabilistic rule sets sample their outcome frequencies") {
  const IdentifiedModel m = nasch_model();
  CHECK_NOTHROW(m.validate());
  const ProbabilisticRule* r = match_probabilistic(m, {0, 1, 0});
  REQUIRE(r != nullptr);
  CHECK(r->probability_of(0) == doctest::Approx(0.8));
  CHECK(r->probability_of(1) == doctest::Approx(0.2));

  // isolated cars: every occupied cell sees (0, 1, 0)
  std::vector<State> cells(600, 0);
  for (std::size_t i = 0; i < cells.size(); i += 3) cells[i] = 1;
  const Lattice l = ring(cells);
  std::size_t stayed = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Lattice n = step_with_ruleset(m, l, seed);
    for (std::size_t i = 0; i < cells.size(); i += 3) {
      ++total;
      stayed += n[i] == 1 ? 1 : 0;
    }
  }
  CHECK(total == 6000);
  CHECK(static_cast<double>(stayed) / static_cast<double>(total) == doctest::Approx(0.2).epsilon(0.1));
  CHECK(step_with_ruleset(m, l, 5) == step_with_ruleset(m, l, 5));
}

TEST_CASE("missing rules and foreign states") {
  IdentifiedModel m = three_cell_model(ModelMode::Deterministic);
  m.rules = {rule({{C0, 1}}, 1)};
  try {
    step_with_ruleset(m, ring({1, 1, 0, 1}), 0);
    FAIL("expected NoMatchingRule");
  } catch (const NoMatchingRule& e) {
    CHECK(e.cell() == 2);
    CHECK(e.pattern() == "(c[-1]=1, c[0]=0, c[+1]=1)");
  }
  CHECK_FALSE(decide(m, {1, 0, 0}).has_value());
  CHECK_THROWS_AS(step_with_ruleset(eca184_model(), ring({0, 2, 1, 0}), 0), AlphabetMismatch);
  CHECK_THROWS_AS(step_with_ruleset(eca184_model(), Lattice(Shape::torus(3, 3), State{0}), 0), AlphabetMismatch);
  CHECK_THROWS_AS(step_with_ruleset(eca184_model(), ring({0, 1}), 0), std::invalid_argument);
}

TEST_CASE("model validation") {
  IdentifiedModel m = eca184_model();
  m.rules[0].stats = {2, 3};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);

  IdentifiedModel p = nasch_model();
  p.probabilistic_rules[1].outcomes[0].probability = 0.7;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  IdentifiedModel outside = eca184_model();
  outside.rules.push_back(rule({{AttributeId::cell(2), 1}}, 1));
  CHECK_THROWS_AS(outside.validate(), std::invalid_argument);

  IdentifiedModel mixed = nasch_model();
  mixed.rules = eca184_reference_rules();
  CHECK_THROWS_AS(mixed.validate(), std::invalid_argument);
}

TEST_CASE("traffic detectors") {
  const auto detectors = make_traffic_detectors();
  REQUIRE(detectors.size() == 2);
  for (const auto& d : detectors) CHECK_NOTHROW(d.validate());
  const auto& free_road = detectors[0];
  const auto& gap_one = detectors[1];
  constexpr std::size_t cell = 2;  // window covers cells 0..2

  CHECK_FALSE(free_road.fires(ring({1, 0, 0, 0, 0}), ring({0, 1, 0, 0, 0}), cell));
  CHECK(free_road.fires(ring({1, 0, 0, 0, 0}), ring({1, 1, 0, 0, 0}), cell));
  CHECK(free_road.fires(ring({1, 0, 0, 0, 0}), ring({0, 0, 0, 0, 0}), cell));
  // premise not met
  CHECK_FALSE(free_road.fires(ring({1, 1, 0, 0, 0}), ring({1, 1, 1, 0, 0}), cell));

  CHECK(gap_one.fires(ring({1, 0, 1, 0, 0}), ring({0, 0, 1, 0, 0}), cell));
  CHECK_FALSE(gap_one.fires(ring({1, 0, 1, 0, 0}), ring({0, 1, 1, 0, 0}), cell));
  CHECK(gap_one.fires(ring({1, 0, 1, 0, 0}), ring({1, 1, 0, 0, 0}), cell));

  ErrorDetector bad = free_road;
  bad.repair_window.clear();
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = free_road;
  bad.check_offsets.push_back({1, 0});
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("repair restores occupancy conservation") {
  const IdentifiedModel m = nasch_model();
  const auto detectors = make_traffic_detectors();

  SUBCASE("two cars both staying put behind a free cell are caught") {
    // (0, 1, 1, 0, 0): the rear car may stay and the front car may move, or the reverse
    std::size_t fired = 0;
    const Lattice before = ring({0, 1, 0, 0, 1, 0, 0, 0});
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const Lattice raw = step_with_ruleset(m, before, seed);
      if (occupied_count(raw, 0) != 2) {
        ++fired;
        bool any = false;
        for (std::size_t c = 0; c < raw.size(); ++c) {
          for (const auto& d : detectors) any = any || d.fires(before, raw, c);
        }
        CHECK(any);
      }
      RepairStats stats;
      const Lattice fixed = step_with_repair(m, detectors, before, 8, seed, &stats);
      CHECK(occupied_count(fixed, 0) == 2);
    }
    CHECK(fired > 0);
  }

  SUBCASE("a thousand steps on a dense ring") {
    for (double density : {0.2, 0.6}) {
      Lattice l = random_ring(200, density, 17);
      const std::size_t vehicles = occupied_count(l, 0);
      RepairStats stats;
      for (int t = 0; t < 1000; ++t) {
        l = step_with_repair(m, detectors, l, 8, derive_seed(3, static_cast<std::uint64_t>(t)), &stats);
        REQUIRE(occupied_count(l, 0) == vehicles);
      }
      CHECK(stats.steps == 1000);
      CHECK(stats.detections > 0);
      CHECK(stats.repaired_steps > 0);
    }
  }

  SUBCASE("without detectors the sampled model drifts") {
    Lattice l = random_ring(200, 0.6, 17);
    const std::size_t vehicles = occupied_count(l, 0);
    std::size_t violations = 0;
    for (int t = 0; t < 100; ++t) {
      l = step_with_ruleset(m, l, derive_seed(3, static_cast<std::uint64_t>(t)));
      violations += occupied_count(l, 0) != vehicles ? 1 : 0;
    }
    CHECK(violations > 0);
  }

  SUBCASE("run_model_trace uses the attached detectors") {
    IdentifiedModel with = m;
    with.detectors = detectors;
    RepairStats stats;
    const Trace t = run_model_trace(with, random_ring(100, 0.5, 4), 200, 8, 8, &stats);
    CHECK(t.steps.size() == 201);
    for (const auto& l : t.steps) REQUIRE(occupied_count(l, 0) == 50);
    CHECK(stats.steps == 200);
    CHECK(run_model_trace(with, random_ring(100, 0.5, 4), 200, 8).steps == t.steps);
  }
}

TEST_CASE("repair falls back to the previous states when retries cannot help") {
  // every cell becomes occupied, so the free-road detector fires on every retry
  IdentifiedModel m = three_cell_model(ModelMode::Deterministic);
  m.rules = {rule({}, 1)};
  const auto detectors = make_traffic_detectors();
  const Lattice before = ring({1, 0, 0, 0, 0, 0});
  RepairStats stats;
  const Lattice after = step_with_repair(m, detectors, before, 3, 0, &stats);
  CHECK(stats.fallbacks == 1);
  CHECK(stats.resampled_cells == 9);
  CHECK(stats.restored_cells > 0);
  for (std::size_t c = 0; c < after.size(); ++c) {
    for (const auto& d : detectors) CHECK_FALSE(d.fires(before, after, c));
  }
  CHECK_THROWS_AS(step_with_repair(m, detectors, before, 0, 0), ParameterError);
}

TEST_CASE("life pattern includes the live-neighbor count") {
  IdentifiedModel m;
  m.alphabet = Alphabet::binary();
  m.dims = 2;
  m.neighborhood = neighborhood_of({AttributeId::cell(0, 0), AttributeId::derived("L")});
  m.rules = life_reference_rules();
  CHECK_NOTHROW(m.validate());
  Lattice l(Shape::torus(5, 5), State{0});
  for (int x = 1; x <= 3; ++x) l[static_cast<std::size_t>(2 * 5 + x)] = 1;
  CHECK(model_pattern(m, l, 2 * 5 + 2) == std::vector<State>{1, 2});
  CHECK(model_pattern(m, l, 1 * 5 + 2) == std::vector<State>{0, 3});
  const Lattice once = step_with_ruleset(m, l, 0);
  CHECK(step_with_ruleset(m, once, 0) == l);
  CHECK(occupied_count(once, 0) == 3);
}

TEST_CASE("mode names") {
  CHECK(parse_mode("probabilistic") == ModelMode::Probabilistic);
  CHECK(to_string(ModelMode::Deterministic) == "deterministic");
  CHECK_THROWS_AS(parse_mode("fuzzy"), ParameterError);
}
