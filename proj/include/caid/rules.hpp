#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "caid/decision_table.hpp"

namespace caid {

/// Condition `attribute = value`.
struct Descriptor {
  AttributeId attribute;
  State value = 0;

  friend auto operator<=>(const Descriptor&, const Descriptor&) = default;
  friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

/// Premise: conjunction of descriptors, at most one per attribute, sorted by attribute. Empty = always true.
using Premise = std::vector<Descriptor>;

/// Multiplicity-weighted support and match of a rule against a table.
struct RuleStats {
  std::uint64_t support = 0;
  std::uint64_t match = 0;

  bool no_match() const noexcept { return match == 0; }
  /// support / match; empty when nothing matches.
  std::optional<double> cer() const noexcept {
    if (match == 0) return std::nullopt;
    return static_cast<double>(support) / static_cast<double>(match);
  }
  friend bool operator==(const RuleStats&, const RuleStats&) = default;
};

struct DecisionRule {
  Premise premise;
  State decision = 0;
  RuleStats stats;

  /// Semantic equality: same premise set and decision; stats are ignored.
  bool same_as(const DecisionRule& other) const { return premise == other.premise && decision == other.decision; }
};

struct Outcome {
  State value = 0;
  double probability = 0.0;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Merged rule whose decision is a distribution {value / CER}.
struct ProbabilisticRule {
  Premise premise;
  std::vector<Outcome> outcomes;  // sorted by value, each probability > 0
  std::uint64_t total_match = 0;

  double probability_of(State value) const noexcept;
  friend bool operator==(const ProbabilisticRule&, const ProbabilisticRule&) = default;
};

/// Builds a normalized premise; throws std::invalid_argument on two descriptors for one attribute.
Premise make_premise(std::vector<Descriptor> descriptors);

/// Whether a row of `table` (given its attribute-index mapping) satisfies the premise.
bool matches(const Premise& premise, const std::vector<std::size_t>& attribute_index, const Observation& row);
/// Table indices of the premise attributes, in premise order. Throws UnknownAttribute.
std::vector<std::size_t> premise_indices(const Premise& premise, const DecisionTable& table);

RuleStats rule_stats(const DecisionRule& rule, const DecisionTable& table);

/// Result of checking a rule set as a cover of a table.
struct CoverCheck {
  bool complete = true;    // every row matched by some rule with its decision
  bool consistent = true;  // no rule matches a row of another decision
  bool minimal = true;     // dropping any descriptor of any rule breaks consistency
};
CoverCheck check_cover(const std::vector<DecisionRule>& rules, const DecisionTable& table);

/// LEM2 local covering, one decision class at a time. Descriptor choice: largest (multiplicity-weighted)
/// coverage of the still-uncovered concept rows, then fewest matched rows outside the concept, then
/// attribute order and value. Complexes are pruned of redundant descriptors, then redundant rules are
/// dropped. Throws InconsistentInput on conflicting rows.
std::vector<DecisionRule> lem2(const DecisionTable& table);

/// Every minimal consistent rule supported by some row, deduplicated. Throws InconsistentInput.
std::vector<DecisionRule> exhaustive_rules(const DecisionTable& table);

/// Recomputes stats on `table` and orders by support desc, fewer descriptors, premise, decision.
std::vector<DecisionRule> prioritize(std::vector<DecisionRule> rules, const DecisionTable& table);

/// One rule per observed condition pattern with outcome probabilities CER = per-decision multiplicity /
/// pattern multiplicity. Patterns sharing a prefix in attribute order collapse into one rule with the
/// trailing descriptors dropped when all of them carry the same distribution (within 1e-9).
std::vector<ProbabilisticRule> merge_uncertain(const DecisionTable& table);

/// Rule file lines.
///   c[-1]=1 & c[0]=0 => 1 [supp=120 match=120 cer=1.000]
///   c[-1]=1 & c[0]=0 & c[+1]=0 => {0:0.200, 1:0.800} [match=500]
/// An empty premise is written as `true`.
std::string format_rule(const DecisionRule& rule, int dims);
std::string format_rule(const ProbabilisticRule& rule, int dims);
std::string format_premise(const Premise& premise, int dims);

/// Parsed rule file; exactly one of the two lists is filled.
struct RuleSet {
  std::vector<DecisionRule> deterministic;
  std::vector<ProbabilisticRule> probabilistic;
};
RuleSet parse_rules(std::istream& in);
void write_rules(std::ostream& out, const RuleSet& rules, int dims);

}  // namespace caid
