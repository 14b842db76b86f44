#include <doctest.h>

#include <sstream>

#include "caid/automaton.hpp"
#include "caid/error.hpp"
#include "caid/io.hpp"
#include "caid/repro.hpp"

using namespace caid;

namespace {

std::string rows(std::size_t n, const std::string& row) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += row + "\n";
  return s;
}

std::pair<std::size_t, std::size_t> error_position(const std::string& text) {
  try {
    parse_trace(text);
  } catch (const ParseError& e) {
    return {e.line(), e.column()};
  }
  return {0, 0};
}

}  // namespace

TEST_CASE("alphabet text") {
  CHECK(format_alphabet(Alphabet::binary()) == "0:.,1:#");
  CHECK(format_alphabet(Alphabet::traffic(2)) == "-1:.,0:0,1:1,2:2");
  CHECK(parse_alphabet("-1:.,0:0,1:1,2:2") == Alphabet::traffic(2));
  CHECK_THROWS_AS(parse_alphabet("0:.,1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_alphabet("0:..,1:#"), std::invalid_argument);
}

TEST_CASE("reading a 1D trace") {
  const std::string header = "ca-trace v1; dims=1; extents=50; alphabet=0:.,1:#\n";
  const Trace t = parse_trace(header + rows(30, std::string(25, '.') + std::string(25, '#')));
  CHECK(t.steps.size() == 30);
  CHECK(t.shape().extents[0] == 50);
  CHECK(t.steps[3][24] == 0);
  CHECK(t.steps[3][25] == 1);
}

TEST_CASE("trace errors carry positions") {
  const std::string header = "ca-trace v1; dims=1; extents=50; alphabet=0:.,1:#\n";
  const std::string ok(50, '.');
  CHECK(error_position(header + ok + "\n" + std::string(49, '.') + "\n") == std::pair<std::size_t, std::size_t>{3, 50});
  CHECK(error_position(header + ok + "\n" + std::string(51, '.') + "\n") == std::pair<std::size_t, std::size_t>{3, 51});
  std::string bad = ok;
  bad[17] = 'x';
  CHECK(error_position(header + bad + "\n") == std::pair<std::size_t, std::size_t>{2, 18});
  CHECK(error_position(rows(3, ok)).first == 1);
  CHECK(error_position("").first == 1);
  CHECK(error_position("ca-trace v1; dims=3; extents=50; alphabet=0:.,1:#\n").first == 1);
  CHECK(error_position("ca-trace v1; dims=1; extents=50\n" + ok + "\n").first == 1);
  CHECK(error_position(header).first == 2);
  CHECK(error_position("ca-trace v1; dims=2; extents=4,2; alphabet=0:.,1:#\n....\n....\n\n....\n").first == 6);
}

TEST_CASE("traces round trip byte for byte") {
  SUBCASE("1D traffic with metadata") {
    const auto nasch = ReferenceAutomaton::nasch(2, 0.3);
    Rng rng(1);
    Trace t = run_trace(nasch, nasch.random_lattice(Shape::ring(80), 0.3, rng), 20, 1);
    t.metadata = {{"source", "unit"}, {"cell_m", "7.5"}};
    const std::string text = format_trace(t);
    CHECK(text.rfind("ca-trace v1; dims=1; extents=80; alphabet=-1:.,0:0,1:1,2:2; source=unit; cell_m=7.5\n", 0) == 0);
    const Trace back = parse_trace(text);
    CHECK(back.steps == t.steps);
    CHECK(back.metadata == t.metadata);
    CHECK(format_trace(back) == text);
  }
  SUBCASE("2D") {
    const auto life = ReferenceAutomaton::life();
    Rng rng(2);
    const Trace t = run_trace(life, life.random_lattice(Shape::torus(7, 5), 0.4, rng), 4, 0);
    const std::string text = format_trace(t);
    const Trace back = parse_trace(text);
    CHECK(back.shape() == Shape::torus(7, 5));
    CHECK(back.steps == t.steps);
    CHECK(format_trace(back) == text);
  }
}

TEST_CASE("time-space diagrams") {
  const std::string occupancy = "ca-trace v1; dims=1; extents=6; alphabet=0:.,1:#; cell_m=7.5\n#..#..\n.#..#.\n";
  const TimeSpaceDiagram d = parse_time_space_diagram(occupancy);
  CHECK(d.cell_length_m == 7.5);
  CHECK(d.trace.steps.size() == 2);
  CHECK(format_trace(d.trace) == occupancy);

  const TimeSpaceDiagram v = parse_time_space_diagram("ca-trace v1; dims=1; extents=4; alphabet=-1:.,0:0,1:1\n1..0\n.1.0\n");
  CHECK(v.cell_length_m == kDefaultCellLength);
  CHECK(v.trace.alphabet.is_binary());
  CHECK(v.trace.steps[0] == Lattice(Shape::ring(4), std::vector<State>{1, 0, 0, 1}));

  CHECK_THROWS_AS(parse_time_space_diagram("ca-trace v1; dims=2; extents=2,1; alphabet=0:.,1:#\n..\n"), ParseError);
  CHECK_THROWS_AS(parse_time_space_diagram("ca-trace v1; dims=1; extents=2; alphabet=0:.,1:#; cell_m=-3\n..\n"),
                  ParseError);
}

TEST_CASE("model files round trip") {
  IdentifiedModel m;
  m.alphabet = Alphabet::binary();
  m.neighborhood = neighborhood_of({AttributeId::cell(-1), AttributeId::cell(0), AttributeId::cell(1)});
  m.mode = ModelMode::Probabilistic;
  m.probabilistic_rules = nasch_reference_rules();
  for (auto& r : m.probabilistic_rules) r.total_match = 100;
  m.detectors = make_traffic_detectors();
  m.provenance = {{"window", "3"}, {"note", "a=b"}};
  std::ostringstream out;
  write_model(out, m);
  const std::string text = out.str();
  CHECK(text.find("detector=c[-2]=1 & c[-1]=0 & c[0]=0 | c[-2],c[-1],c[0] | 1 | c[-2],c[-1],c[0]\n") !=
        std::string::npos);
  std::istringstream in(text);
  const IdentifiedModel back = read_model(in);
  CHECK(back.neighborhood == m.neighborhood);
  CHECK(back.detectors == m.detectors);
  CHECK(back.provenance == m.provenance);
  CHECK(back.probabilistic_rules == m.probabilistic_rules);
  std::ostringstream again;
  write_model(again, back);
  CHECK(again.str() == text);

  IdentifiedModel life;
  life.alphabet = Alphabet::binary();
  life.dims = 2;
  life.neighborhood = neighborhood_of({AttributeId::cell(0, 0), AttributeId::derived("L")});
  life.rules = life_reference_rules();
  std::ostringstream lo;
  write_model(lo, life);
  std::istringstream li(lo.str());
  const IdentifiedModel lback = read_model(li);
  CHECK(lback.neighborhood == life.neighborhood);
  CHECK(same_rule_set(lback.rules, life.rules));
}

TEST_CASE("model file errors") {
  auto fails_at = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_model(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(fails_at("ca-model v2\n") == 1);
  CHECK(fails_at("ca-model v1\ndims=1\n") == 3);
  CHECK(fails_at("ca-model v1\ndims=1\ncolour=red\nrules\n") == 3);
  CHECK(fails_at("ca-model v1\ndims=1\nalphabet=0:.,1:#\nmode=deterministic\nneighborhood=c[0]\nderived=\nrules\n"
                 "c[0]=1 => 1 [supp=1 match=1 cer=1.000]\nc[0]=0 -> 0\n") == 9);
  CHECK(fails_at("ca-model v1\ndims=1\nalphabet=0:.,1:#\nmode=deterministic\nneighborhood=c[0]\nderived=\n"
                 "detector=c[0]=1 | c[3] | 1 | c[0]\nrules\n") == 7);
}
