#include <doctest.h>

#include <sstream>

#include "caid/automaton.hpp"
#include "caid/decision_table.hpp"
#include "caid/error.hpp"

using namespace caid;

namespace {

Trace eca_trace(int rule, int width, int steps, std::uint64_t seed) {
  const auto eca = ReferenceAutomaton::elementary(rule);
  Rng rng(seed);
  return run_trace(eca, eca.random_lattice(Shape::ring(width), 0.5, rng), steps, seed);
}

const Observation* find_row(const DecisionTable& t, const std::vector<State>& cond) {
  for (const auto& r : t.rows) {
    if (r.conditions == cond) return &r;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("attribute ids") {
  CHECK(AttributeId::cell(-1).to_string() == "c[-1]");
  CHECK(AttributeId::cell(1).to_string() == "c[+1]");
  CHECK(AttributeId::cell(0).to_string() == "c[0]");
  CHECK(AttributeId::cell(1, -2).to_string(2) == "c[+1,-2]");
  CHECK(AttributeId::parse("c[+1,-2]") == AttributeId::cell(1, -2));
  CHECK(AttributeId::parse("c[-10]") == AttributeId::cell(-10));
  CHECK(AttributeId::parse("L") == AttributeId::derived("L"));
  CHECK(AttributeId::cell(5) < AttributeId::derived("L"));
  CHECK(AttributeId::cell(1, -1) < AttributeId::cell(-1, 0));
  CHECK_THROWS_AS(AttributeId::parse("c[x]"), UnknownAttribute);
  CHECK_THROWS_AS(AttributeId::parse("c[1,]"), UnknownAttribute);
  CHECK_THROWS_AS(AttributeId::parse(""), UnknownAttribute);
}

TEST_CASE("window sizes") {
  const Trace t = eca_trace(184, 50, 3, 1);
  const DecisionTable table = extract_table(t, 10);
  REQUIRE(table.attribute_count() == 21);
  CHECK(table.attributes[10] == AttributeId::cell(0));
  CHECK(table.total_multiplicity() == 150);

  const auto life = ReferenceAutomaton::life();
  Rng rng(2);
  const Trace lt = run_trace(life, life.random_lattice(Shape::torus(10, 10), 0.3, rng), 2, 0);
  const DecisionTable lifetab = extract_table(lt, 2);
  CHECK(lifetab.attribute_count() == 25);
  CHECK(lifetab.attributes[12] == AttributeId::cell(0, 0));
  CHECK(lifetab.dims == 2);
}

TEST_CASE("hand-stepped ECA 184 row") {
  Trace t;
  t.alphabet = Alphabet::binary();
  t.steps = {Lattice(Shape::ring(5), std::vector<State>{1, 1, 0, 0, 1}),
             Lattice(Shape::ring(5), std::vector<State>{1, 0, 1, 0, 1})};
  const DecisionTable table = extract_table(t, 1);
  // cell 2 sees (1, 0, 0) and becomes 1
  const Observation* row = find_row(table, {1, 0, 0});
  REQUIRE(row != nullptr);
  CHECK(row->decision == 1);
  CHECK(row->multiplicity == 1);
  CHECK(table.total_multiplicity() == 5);
}

TEST_CASE("subsampling keeps the requested number of observations") {
  const Trace t = eca_trace(184, 100, 20, 3);
  ExtractOptions opt;
  opt.sample_limit = 500;
  opt.seed = 5;
  const DecisionTable a = extract_table(t, 10, opt);
  CHECK(a.total_multiplicity() == 500);
  CHECK(extract_table(t, 10, opt) == a);
  opt.sample_limit = 1u << 20;
  CHECK(extract_table(t, 10, opt).total_multiplicity() == 2000);
}

TEST_CASE("extract errors") {
  Trace empty;
  empty.alphabet = Alphabet::binary();
  CHECK_THROWS_AS(extract_table(empty, 1), std::invalid_argument);
  const Trace t = eca_trace(184, 10, 2, 1);
  CHECK_THROWS_AS(extract_table(t, 5), std::invalid_argument);
  CHECK_NOTHROW(extract_table(t, 4));
}

TEST_CASE("decisions match the reference update") {
  const auto eca = ReferenceAutomaton::elementary(110);
  Rng rng(4);
  const Trace t = run_trace(eca, eca.random_lattice(Shape::ring(60), 0.5, rng), 10, 0);
  const DecisionTable table = extract_table(t, 2);
  for (const auto& r : table.rows) {
    std::vector<std::pair<Offset, State>> pattern;
    for (std::size_t i = 0; i < table.attribute_count(); ++i) pattern.push_back({table.attributes[i].offset(), r.conditions[i]});
    REQUIRE(eca.central_update(pattern) == r.decision);
  }
}

TEST_CASE("live neighbor count") {
  DecisionTable t;
  t.dims = 2;
  t.alphabet = Alphabet::binary();
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) t.attributes.push_back(AttributeId::cell(dx, dy));
  }
  Observation dead{std::vector<State>(25, 0), 0, 1};
  Observation alive{std::vector<State>(25, 1), 1, 1};
  Observation three{std::vector<State>(25, 0), 1, 1};
  // (-1,-1), (+1,0) and (0,+1) are alive; (2,2) is outside the Moore ring
  three.conditions[6] = three.conditions[13] = three.conditions[17] = three.conditions[24] = 1;
  t.rows = {dead, alive, three};
  const DecisionTable with = add_live_neighbor_count(t);
  REQUIRE(with.attributes.back() == AttributeId::derived("L"));
  CHECK(find_row(with, [&] { auto c = dead.conditions; c.push_back(0); return c; }()) != nullptr);
  CHECK(find_row(with, [&] { auto c = alive.conditions; c.push_back(8); return c; }()) != nullptr);
  CHECK(find_row(with, [&] { auto c = three.conditions; c.push_back(3); return c; }()) != nullptr);

  DecisionTable oned;
  oned.alphabet = Alphabet::binary();
  oned.attributes = {AttributeId::cell(-1), AttributeId::cell(0), AttributeId::cell(1)};
  CHECK_THROWS_AS(add_live_neighbor_count(oned), UnknownAttribute);
  DecisionTable traffic = t;
  traffic.alphabet = Alphabet::traffic(1);
  CHECK_THROWS_AS(add_live_neighbor_count(traffic), std::invalid_argument);
}

TEST_CASE("aggregate") {
  DecisionTable t;
  t.attributes = {AttributeId::cell(0)};
  t.alphabet = Alphabet::binary();
  t.rows = {{{1}, 0, 1}, {{1}, 0, 1}, {{1}, 1, 1}, {{0}, 0, 4}};
  const DecisionTable a = aggregate(t);
  REQUIRE(a.rows.size() == 3);
  CHECK(a.rows[0] == Observation{{0}, 0, 4});
  CHECK(a.rows[1] == Observation{{1}, 0, 2});
  CHECK(a.rows[2] == Observation{{1}, 1, 1});
  CHECK(a.total_multiplicity() == t.total_multiplicity());
}

TEST_CASE("project") {
  const Trace t = eca_trace(184, 100, 20, 3);
  ExtractOptions opt;
  opt.sample_limit = 500;
  const DecisionTable full = extract_table(t, 10, opt);
  const std::vector<AttributeId> n{AttributeId::cell(-1), AttributeId::cell(0), AttributeId::cell(1)};
  const DecisionTable p = project(full, n);
  CHECK(p.attribute_count() + 1 == 4);
  CHECK(p.rows.size() <= 8);
  CHECK(p.total_multiplicity() == 500);
  CHECK(project(full, full.attributes) == full);
  // keep order follows the table
  CHECK(project(full, {AttributeId::cell(1), AttributeId::cell(-1)}).attributes ==
        std::vector<AttributeId>{AttributeId::cell(-1), AttributeId::cell(1)});
  CHECK_THROWS_AS(project(full, {AttributeId::cell(11)}), UnknownAttribute);
  // projecting twice equals projecting once onto the smaller set
  CHECK(project(project(full, n), {AttributeId::cell(0)}) == project(full, {AttributeId::cell(0)}));
}

TEST_CASE("Life projection onto center and L") {
  const auto life = ReferenceAutomaton::life();
  Rng rng(6);
  const Trace lt = run_trace(life, life.random_lattice(Shape::torus(20, 20), 0.35, rng), 5, 0);
  ExtractOptions opt;
  opt.derived = {DerivedAttribute::LiveNeighborCount};
  const DecisionTable t = extract_table(lt, 2, opt);
  CHECK(t.attribute_count() == 26);
  const DecisionTable p = project(t, {AttributeId::cell(0, 0), AttributeId::derived("L")});
  CHECK(p.attribute_count() == 2);
}

TEST_CASE("table text round trip") {
  const Trace t = eca_trace(184, 40, 5, 9);
  const DecisionTable table = extract_table(t, 2);
  std::ostringstream out;
  write_table(out, table);
  CHECK(out.str().rfind("c[-2]\tc[-1]\tc[0]\tc[+1]\tc[+2]\tdecision\tmult\n", 0) == 0);
  std::istringstream in(out.str());
  CHECK(read_table(in) == table);

  std::istringstream bad("c[0]\tdecision\tmult\n1\t0\n");
  CHECK_THROWS_AS(read_table(bad), ParseError);
  std::istringstream nohdr("c[0]\tdecision\n");
  CHECK_THROWS_AS(read_table(nohdr), ParseError);
  std::istringstream nonint("c[0]\tdecision\tmult\n1\tx\t1\n");
  try {
    read_table(nonint);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 2);
  }
}
