#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "caid/lattice.hpp"
#include "caid/reducts.hpp"
#include "caid/rules.hpp"

namespace caid {

/// Conservation check over a pair of consecutive states. Fires at cell i when every premise cell
/// matches at time t and the states at t+1 over `check_offsets` do not sum to `target`.
struct ErrorDetector {
  std::vector<std::pair<Offset, State>> premise;
  std::vector<Offset> check_offsets;
  State target = 1;
  std::vector<Offset> repair_window;

  bool fires(const Lattice& before, const Lattice& after, std::size_t cell) const;
  /// Throws ParameterError when the window is empty or a premise/check offset lies outside its hull.
  void validate() const;

  friend bool operator==(const ErrorDetector&, const ErrorDetector&) = default;
};

/// The two traffic conservation detectors over cells (i-2, i-1, i), both repairing that window:
///   c[-2]=1, c[-1]=0, c[0]=0 at t and c[-2]+c[-1]+c[0] != 1 at t+1
///   c[-2]=1, c[-1]=0, c[0]=1 at t and c[-2]+c[-1] != 1 at t+1
std::vector<ErrorDetector> make_traffic_detectors();

enum class ModelMode { Deterministic, Probabilistic };

std::string to_string(ModelMode mode);
ModelMode parse_mode(std::string_view text);

/// An identified automaton: alphabet, neighborhood, prioritized rules and optional repair detectors.
struct IdentifiedModel {
  Alphabet alphabet;
  int dims = 1;
  Neighborhood neighborhood;
  ModelMode mode = ModelMode::Deterministic;
  std::vector<DecisionRule> rules;                    // deterministic mode, in priority order
  std::vector<ProbabilisticRule> probabilistic_rules;  // probabilistic mode
  std::vector<ErrorDetector> detectors;
  /// Ordered `key=value` record of the identification parameters and intermediate results.
  std::vector<std::pair<std::string, std::string>> provenance;

  /// Neighborhood offsets, then derived attributes: the attribute order rule premises refer to.
  std::vector<AttributeId> attributes() const;
  /// Throws std::invalid_argument on a broken invariant (CER != 1 in deterministic mode,
  /// probabilities not summing to 1, premises outside the neighborhood).
  void validate() const;
};

/// Neighborhood state of one cell in the model's attribute order.
std::vector<State> model_pattern(const IdentifiedModel& model, const Lattice& lattice, std::size_t cell);

/// One synchronous update. Probabilistic cells draw uniform01(seed, cell, attempt); `attempt` is 0
/// for the regular update. Throws NoMatchingRule or AlphabetMismatch.
Lattice step_with_ruleset(const IdentifiedModel& model, const Lattice& lattice, std::uint64_t seed);

struct RepairStats {
  std::uint64_t steps = 0;
  std::uint64_t detections = 0;     // detector firings, over all attempts
  std::uint64_t resampled_cells = 0;
  std::uint64_t repaired_steps = 0;  // steps needing at least one retry
  std::uint64_t fallbacks = 0;       // steps where windows were restored to time t
  std::uint64_t restored_cells = 0;
};

/// Update followed by up to `max_retries` rounds of re-sampling the windows of firing detectors
/// (attempt k draws uniform01(seed, cell, k)); windows still firing afterwards get their time-t states back.
Lattice step_with_repair(const IdentifiedModel& model, const std::vector<ErrorDetector>& detectors,
                         const Lattice& lattice, int max_retries, std::uint64_t seed, RepairStats* stats = nullptr);

/// Runs the model for `steps` updates (step t uses derive_seed(seed, t)); uses step_with_repair when the
/// model carries detectors.
Trace run_model_trace(const IdentifiedModel& model, Lattice initial, int steps, std::uint64_t seed,
                      int max_retries = 8, RepairStats* stats = nullptr);

/// Single-cell decision of a deterministic model for an attribute pattern; empty when no rule matches.
std::optional<State> decide(const IdentifiedModel& model, const std::vector<State>& pattern);
/// Matching probabilistic rule for a pattern, or nullptr.
const ProbabilisticRule* match_probabilistic(const IdentifiedModel& model, const std::vector<State>& pattern);

}  // namespace caid
