#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "caid/pipeline.hpp"

namespace caid {

/// A reference automaton, the trace it produced for training and the identify settings for it.
struct Scenario {
  std::string name;
  ReferenceAutomaton reference;
  Trace trace;
  IdentifyConfig config;
};

/// ECA ring of 100 cells at density 0.5, 20 steps; 500 observations through window radius 10.
Scenario eca_scenario(int rule_number, std::uint64_t seed);
/// NaSch-D(2) over a 2000-cell patchwork ring (50-cell stretches, densities 0.05..0.6), one update;
/// 2000 observations through window radius 4.
Scenario nasch_d_scenario(std::uint64_t seed);
/// Life on a 40x40 torus in 8-column stripes of density 0.1, 0.3, .., 0.9, 5 steps; 8000 observations
/// through window radius 2, add L, exhaustive induction.
Scenario life_scenario(std::uint64_t seed);
/// NaSch(1, 0.2) occupancy on a 1000-cell ring at density 0.5, 25 steps (25000 observations); window radius 3,
/// dynamic reducts, shortening at 0.95, probabilistic rules.
Scenario nasch_scenario(std::uint64_t seed);

/// Published rule sets for the ECA 184, Life and NaSch identification runs.
std::vector<DecisionRule> eca184_reference_rules();
std::vector<DecisionRule> life_reference_rules();
std::vector<ProbabilisticRule> nasch_reference_rules();

/// True when the two rule sets hold the same (premise, decision) pairs, in any order.
bool same_rule_set(const std::vector<DecisionRule>& a, const std::vector<DecisionRule>& b);

struct ReproCheck {
  std::string experiment;
  std::string check;
  std::string expected;
  std::string observed;
  bool pass = false;
};

struct ReproReport {
  std::vector<ReproCheck> checks;
  bool pass() const;
};

/// Runs the four identification reproductions plus the traffic surrogate.
ReproReport run_repro(std::uint64_t seed);
void write_repro(std::ostream& out, const ReproReport& report, ReportFormat format);

}  // namespace caid
