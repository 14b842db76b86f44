#include <doctest.h>

#include <stdexcept>

#include "caid/lattice.hpp"

using namespace caid;

TEST_CASE("alphabet keeps codes sorted and maps glyphs both ways") {
  const Alphabet a = Alphabet::traffic(2);
  CHECK(a.codes() == std::vector<State>{-1, 0, 1, 2});
  CHECK(a.quiescent() == -1);
  CHECK(a.glyph(-1) == '.');
  CHECK(a.code('2') == 2);
  CHECK_FALSE(a.is_binary());
  CHECK(Alphabet::binary().is_binary());
  CHECK(Alphabet::from_codes({1, 0, 1}) == Alphabet::binary());
  CHECK_THROWS_AS(Alphabet({{0, '.'}, {1, '.'}}), std::invalid_argument);
  CHECK_THROWS_AS(Alphabet({{0, '.'}, {0, '#'}}), std::invalid_argument);
}

TEST_CASE("ring neighbors wrap in both directions") {
  const Lattice ring(Shape::ring(5), std::vector<State>{0, 1, 2, 3, 4});
  CHECK(ring.at(0, {-1, 0}) == 4);
  CHECK(ring.at(4, {1, 0}) == 0);
  CHECK(ring.at(2, {-7, 0}) == 0);
  CHECK(ring.at(2, {10, 0}) == 2);
}

TEST_CASE("torus neighbors wrap row-major") {
  std::vector<State> cells(12);
  for (int i = 0; i < 12; ++i) cells[static_cast<std::size_t>(i)] = i;
  const Lattice t(Shape::torus(4, 3), cells);  // 4 wide, 3 high
  CHECK(t.at(0, {-1, -1}) == 11);
  CHECK(t.at(5, {0, 1}) == 9);
  CHECK(t.at(5, {3, 0}) == 4);
  CHECK(t.at(11, {1, 1}) == 0);
}

TEST_CASE("lattice rejects bad shapes and cell counts") {
  CHECK_THROWS_AS(Lattice(Shape{1, {4, 2}}, State{0}), std::invalid_argument);
  CHECK_THROWS_AS(Lattice(Shape::ring(0), State{0}), std::invalid_argument);
  CHECK_THROWS_AS(Lattice(Shape::ring(3), std::vector<State>{0, 1}), std::invalid_argument);
}

TEST_CASE("trace validation") {
  Trace t;
  t.alphabet = Alphabet::binary();
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.steps.push_back(Lattice(Shape::ring(3), State{0}));
  CHECK_NOTHROW(t.validate());
  t.steps.push_back(Lattice(Shape::ring(4), State{0}));
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.steps.back() = Lattice(Shape::ring(3), std::vector<State>{0, 2, 0});
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("occupied count") {
  const Lattice l(Shape::ring(6), std::vector<State>{-1, 0, 2, -1, 1, -1});
  CHECK(occupied_count(l, -1) == 3);
}
