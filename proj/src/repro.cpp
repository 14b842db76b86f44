#include "caid/repro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace caid {

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string join(const std::vector<AttributeId>& attrs, int dims) {
  std::string s = "{";
  for (std::size_t i = 0; i < attrs.size(); ++i) s += (i ? "," : "") + attrs[i].to_string(dims);
  return s + "}";
}

std::vector<AttributeId> cells_1d(int from, int to) {
  std::vector<AttributeId> out;
  for (int dx = from; dx <= to; ++dx) out.push_back(AttributeId::cell(dx));
  return out;
}

std::vector<AttributeId> moore() {
  std::vector<AttributeId> out;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) out.push_back(AttributeId::cell(dx, dy));
  }
  return out;
}

DecisionRule rule(std::vector<Descriptor> premise, State decision) {
  return DecisionRule{make_premise(std::move(premise)), decision, {}};
}

Descriptor d1(int dx, State v) { return {AttributeId::cell(dx), v}; }

/// Decisions of a rule list (first match) over every pattern of `attrs` with values in `codes`.
std::vector<std::optional<State>> decision_function(const std::vector<DecisionRule>& rules,
                                                    const std::vector<AttributeId>& attrs,
                                                    const std::vector<State>& codes) {
  DecisionTable probe;
  probe.attributes = attrs;
  std::vector<std::optional<State>> out;
  std::vector<std::size_t> digit(attrs.size(), 0);
  while (true) {
    Observation row;
    for (std::size_t i = 0; i < attrs.size(); ++i) row.conditions.push_back(codes[digit[i]]);
    std::optional<State> got;
    for (const auto& r : rules) {
      if (matches(r.premise, premise_indices(r.premise, probe), row)) {
        got = r.decision;
        break;
      }
    }
    out.push_back(got);
    std::size_t i = 0;
    while (i < digit.size() && ++digit[i] == codes.size()) digit[i++] = 0;
    if (i == digit.size()) break;
  }
  return out;
}

/// Same premises as the reference rules and outcome probabilities within `tol`.
bool matches_nasch_reference(const std::vector<ProbabilisticRule>& got, double tol, double* worst) {
  const auto want = nasch_reference_rules();
  *worst = 0.0;
  if (got.size() != want.size()) return false;
  for (const auto& w : want) {
    const auto it = std::find_if(got.begin(), got.end(), [&](const auto& g) { return g.premise == w.premise; });
    if (it == got.end()) return false;
    for (State v : {0, 1}) *worst = std::max(*worst, std::abs(it->probability_of(v) - w.probability_of(v)));
  }
  return *worst <= tol;
}

}  // namespace

Scenario eca_scenario(int rule_number, std::uint64_t seed) {
  const auto ref = ReferenceAutomaton::elementary(rule_number);
  Rng rng(derive_seed(seed, 11));
  Trace trace = run_trace(ref, ref.random_lattice(Shape::ring(100), 0.5, rng), 20, derive_seed(seed, 12));
  IdentifyConfig c;
  c.window = 10;
  c.sample_limit = 500;
  c.seed = derive_seed(seed, 13);
  return {"eca-" + std::to_string(rule_number), ref, std::move(trace), c};
}

Scenario nasch_d_scenario(std::uint64_t seed) {
  const auto ref = ReferenceAutomaton::nasch_deterministic(2);
  Rng rng(derive_seed(seed, 21));
  Trace trace = run_trace(ref, patchwork_lattice(ref, 2000, 50, 0.05, 0.6, rng), 1, derive_seed(seed, 22));
  IdentifyConfig c;
  c.window = 4;
  c.sample_limit = 2000;
  c.seed = derive_seed(seed, 23);
  return {"nasch-d", ref, std::move(trace), c};
}

Scenario life_scenario(std::uint64_t seed) {
  const auto ref = ReferenceAutomaton::life();
  Rng rng(derive_seed(seed, 31));
  const Shape shape = Shape::torus(40, 40);
  std::vector<State> cells(shape.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double density = 0.1 + 0.2 * static_cast<double>(i % 40 / 8);
    cells[i] = uniform01(rng) < density ? 1 : 0;
  }
  Trace trace = run_trace(ref, Lattice(shape, std::move(cells)), 5, derive_seed(seed, 32));
  IdentifyConfig c;
  c.window = 2;
  c.sample_limit = 8000;
  c.seed = derive_seed(seed, 33);
  c.derived = {DerivedAttribute::LiveNeighborCount};
  c.induction = Induction::Exhaustive;
  return {"life", ref, std::move(trace), c};
}

Scenario nasch_scenario(std::uint64_t seed) {
  const auto ref = ReferenceAutomaton::nasch(1, 0.2);
  Rng rng(derive_seed(seed, 41));
  Trace trace = occupancy_view(run_trace(ref, ref.random_lattice(Shape::ring(1000), 0.5, rng), 25, derive_seed(seed, 42)));
  IdentifyConfig c;
  c.window = 3;
  c.seed = derive_seed(seed, 43);
  c.mode = ModelMode::Probabilistic;
  c.reduct_algo = ReductAlgorithm::Dynamic;
  c.shorten = 0.95;
  return {"nasch", ref, std::move(trace), c};
}

std::vector<DecisionRule> eca184_reference_rules() {
  return {
      rule({d1(-1, 0), d1(1, 0)}, 0),
      rule({d1(-1, 0), d1(0, 0)}, 0),
      rule({d1(-1, 1), d1(0, 0)}, 1),
      rule({d1(0, 1), d1(1, 1)}, 1),
      rule({d1(-1, 1), d1(0, 1), d1(1, 0)}, 0),
  };
}

std::vector<DecisionRule> life_reference_rules() {
  const auto center = AttributeId::cell(0, 0);
  const auto live = AttributeId::derived(std::string(kLiveNeighbors));
  std::vector<DecisionRule> out;
  for (State l : {0, 1}) out.push_back(rule({{live, l}}, 0));
  out.push_back(rule({{center, 0}, {live, 2}}, 0));
  out.push_back(rule({{center, 1}, {live, 2}}, 1));
  out.push_back(rule({{live, 3}}, 1));
  for (State l : {4, 5, 6, 7, 8}) out.push_back(rule({{live, l}}, 0));
  return out;
}

std::vector<ProbabilisticRule> nasch_reference_rules() {
  auto r = [](std::vector<Descriptor> premise, std::vector<Outcome> outcomes) {
    return ProbabilisticRule{make_premise(std::move(premise)), std::move(outcomes), 0};
  };
  return {
      r({d1(-1, 0), d1(0, 0)}, {{0, 1.0}}),
      r({d1(-1, 0), d1(0, 1), d1(1, 0)}, {{0, 0.8}, {1, 0.2}}),
      r({d1(-1, 0), d1(0, 1), d1(1, 1)}, {{1, 1.0}}),
      r({d1(-1, 1), d1(0, 0), d1(1, 0)}, {{0, 0.2}, {1, 0.8}}),
      r({d1(-1, 1), d1(0, 0), d1(1, 1)}, {{0, 0.2}, {1, 0.8}}),
      r({d1(-1, 1), d1(0, 1), d1(1, 0)}, {{0, 0.8}, {1, 0.2}}),
      r({d1(-1, 1), d1(0, 1), d1(1, 1)}, {{1, 1.0}}),
  };
}

bool same_rule_set(const std::vector<DecisionRule>& a, const std::vector<DecisionRule>& b) {
  if (a.size() != b.size()) return false;
  return std::all_of(a.begin(), a.end(), [&](const DecisionRule& x) {
    return std::any_of(b.begin(), b.end(), [&](const DecisionRule& y) { return x.same_as(y); });
  });
}

bool ReproReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ReproCheck& c) { return c.pass; });
}

ReproReport run_repro(std::uint64_t seed) {
  ReproReport report;
  auto add = [&](std::string exp, std::string check, std::string expected, std::string observed, bool pass) {
    report.checks.push_back({std::move(exp), std::move(check), std::move(expected), std::move(observed), pass});
  };

  {
    const Scenario s = eca_scenario(184, seed);
    IdentifyArtifacts art;
    const auto model = identify(s.trace, s.config, &art);
    const auto want_n = cells_1d(-1, 1);
    add("eca-184", "exhaustive reduct", join(want_n, 1), join(art.selected, 1), art.selected == want_n);
    IdentifyConfig dyn = s.config;
    dyn.reduct_algo = ReductAlgorithm::Dynamic;
    IdentifyArtifacts dart;
    identify(s.trace, dyn, &dart);
    add("eca-184", "dynamic reduct", join(want_n, 1), join(dart.selected, 1), dart.selected == want_n);
    const auto table = eca184_reference_rules();
    add("eca-184", "lem2 rule count", std::to_string(table.size()), std::to_string(model.rules.size()),
        model.rules.size() == table.size());
    add("eca-184", "lem2 rules equal reference set", "equal", same_rule_set(model.rules, table) ? "equal" : "different",
        same_rule_set(model.rules, table));
    const bool same_fn = decision_function(model.rules, want_n, {0, 1}) == decision_function(table, want_n, {0, 1});
    add("eca-184", "lem2 decision function", "equal", same_fn ? "equal" : "different", same_fn);
    const auto ex = exhaustive_rules(art.projected);
    add("eca-184", "exhaustive rule count", "6", std::to_string(ex.size()), ex.size() == 6);
    const auto v = verify_deterministic(model, s.reference);
    add("eca-184", "verify all patterns", "8/8",
        std::to_string(v.patterns_checked - v.mismatches.size()) + "/" + std::to_string(v.patterns_checked),
        v.pass && v.patterns_checked == 8);
  }
  {
    const Scenario s = nasch_d_scenario(seed);
    IdentifyArtifacts art;
    const auto model = identify(s.trace, s.config, &art);
    const auto want_n = cells_1d(-2, 2);
    add("nasch-d", "exhaustive reduct", join(want_n, 1), join(art.selected, 1), art.selected == want_n);
    add("nasch-d", "lem2 rule count (recorded)", "16", std::to_string(model.rules.size()), true);
    Rng rng(derive_seed(seed, 24));
    const Trace check = run_trace(s.reference, s.reference.random_lattice(Shape::ring(200), 0.3, rng), 10000,
                                  derive_seed(seed, 25));
    const auto v = verify_deterministic(model, s.reference, &check);
    add("nasch-d", "verify reachable patterns", "no mismatches",
        std::to_string(v.mismatches.size()) + " mismatches of " + std::to_string(v.patterns_checked), v.pass);
  }
  {
    const Scenario s = life_scenario(seed);
    IdentifyConfig plain = s.config;
    plain.derived.clear();
    plain.induction = Induction::Lem2;
    IdentifyArtifacts part;
    identify(s.trace, plain, &part);
    add("life", "reduct without L", join(moore(), 2), join(part.selected, 2), part.selected == moore());
    IdentifyArtifacts art;
    const auto model = identify(s.trace, s.config, &art);
    const std::vector<AttributeId> want_n{AttributeId::cell(0, 0), AttributeId::derived(std::string(kLiveNeighbors))};
    add("life", "reduct with L", join(want_n, 2), join(art.selected, 2), art.selected == want_n);
    const bool same = same_rule_set(model.rules, life_reference_rules());
    add("life", "exhaustive rules equal reference set", "equal (10 rules)",
        std::string(same ? "equal" : "different") + " (" + std::to_string(model.rules.size()) + " rules)", same);
    const auto v = verify_deterministic(model, s.reference);
    add("life", "verify (state, L) pairs", "18/18",
        std::to_string(v.patterns_checked - v.mismatches.size()) + "/" + std::to_string(v.patterns_checked),
        v.pass && v.patterns_checked == 18);
  }
  {
    const Scenario s = nasch_scenario(seed);
    IdentifyArtifacts art;
    auto model = identify(s.trace, s.config, &art);
    const auto want_n = cells_1d(-1, 1);
    add("nasch", "shortened reduct", join(want_n, 1), join(art.selected, 1), art.selected == want_n);
    double worst = 0.0;
    const bool ok = matches_nasch_reference(model.probabilistic_rules, 0.05, &worst);
    add("nasch", "merged rules match reference set", "7 rules, |dp|<=0.050",
        std::to_string(model.probabilistic_rules.size()) + " rules, |dp|=" + fixed(worst), ok);
    const auto v = verify_probabilistic(model, s.reference, 20000, 0.05, derive_seed(seed, 44));
    add("nasch", "verify against reference", "max dev <= 0.050", "max dev " + fixed(v.max_deviation), v.pass);

    model.detectors = make_traffic_detectors();
    SurrogateOptions opt;
    opt.seed = derive_seed(seed, 45);
    const auto sr = traffic_surrogate(model, opt);
    std::size_t violations = 0;
    for (const auto& r : sr.runs) violations += r.violations;
    add("surrogate", "occupancy conservation", "0 violations", std::to_string(violations) + " violations", sr.conserved);
    double slope = 0.0;
    for (const auto& r : sr.runs) {
      if (std::abs(r.density - opt.jam_density) < 1e-12) slope = r.drift_slope;
    }
    add("surrogate", "jam drift at density 0.6", "slope < 0", "slope " + fixed(slope), sr.backward_drift);
  }
  return report;
}

void write_repro(std::ostream& out, const ReproReport& report, ReportFormat format) {
  auto no_spaces = [](std::string s) {
    std::replace(s.begin(), s.end(), ' ', '_');
    return s;
  };
  for (const auto& c : report.checks) {
    if (format == ReportFormat::MachineReadable) {
      out << "record=check experiment=" << c.experiment << " check=" << no_spaces(c.check)
          << " expected=" << no_spaces(c.expected) << " observed=" << no_spaces(c.observed)
          << " pass=" << (c.pass ? 1 : 0) << '\n';
    } else {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%-4s  %-9s  %-30s", c.pass ? "PASS" : "FAIL", c.experiment.c_str(), c.check.c_str());
      out << buf << "  expected " << c.expected << ", observed " << c.observed << '\n';
    }
  }
  if (format == ReportFormat::MachineReadable) out << "record=summary pass=" << (report.pass() ? 1 : 0) << '\n';
  else out << (report.pass() ? "all checks passed" : "some checks failed") << '\n';
}

}  // namespace caid
