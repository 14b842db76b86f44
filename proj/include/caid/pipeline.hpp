#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "caid/automaton.hpp"
#include "caid/decision_table.hpp"
#include "caid/model.hpp"
#include "caid/reducts.hpp"
#include "caid/rules.hpp"

namespace caid {

enum class ReductAlgorithm { Exhaustive, Dynamic };
enum class Induction { Lem2, Exhaustive };

struct IdentifyConfig {
  int window = 1;
  ModelMode mode = ModelMode::Deterministic;
  ReductAlgorithm reduct_algo = ReductAlgorithm::Exhaustive;
  /// Minimum consistency ratio for reduct shortening; unset = no shortening.
  std::optional<double> shorten;
  Induction induction = Induction::Lem2;
  std::vector<DerivedAttribute> derived;
  std::optional<std::size_t> sample_limit;
  std::uint64_t seed = 0;
  std::size_t n_subtables = 16;
  double subtable_fraction = 0.9;
  double stability_threshold = 0.5;
};

/// Intermediate results of one identify run.
struct IdentifyArtifacts {
  DecisionTable table;
  std::vector<Reduct> reducts;
  std::vector<AttributeId> selected;  // the chosen reduct, after shortening
  DecisionTable projected;
};

/// extract -> derived attributes -> reducts -> neighborhood -> project -> induce or merge -> prioritize.
/// Exhaustive reduct search considers the minimum-size reducts only, which is all the neighborhood choice
/// needs. Dynamic reducts choose among the most stable reducts; shortening applies to the chosen one.
/// Probabilistic mode always uses merge_uncertain. Throws NoReductFound, InconsistentInput.
IdentifiedModel identify(const Trace& trace, const IdentifyConfig& config, IdentifyArtifacts* artifacts = nullptr);

/// Provenance entries written by identify, and the config they encode.
std::vector<std::pair<std::string, std::string>> provenance_of(const IdentifyConfig& config);
IdentifyConfig config_from_provenance(const std::vector<std::pair<std::string, std::string>>& provenance);

std::string to_string(ReductAlgorithm algo);
std::string to_string(Induction induction);
ReductAlgorithm parse_reduct_algorithm(std::string_view text);
Induction parse_induction(std::string_view text);

struct Mismatch {
  std::string pattern;
  std::string expected;
  std::string got;
};

struct PatternDistribution {
  std::string pattern;
  std::uint64_t count = 0;
  std::vector<Outcome> empirical;
  std::vector<Outcome> model;  // empty when no rule matches
  double deviation = 0.0;
};

struct VerificationReport {
  ModelMode mode = ModelMode::Deterministic;
  /// Distinct model input patterns compared (deterministic) or qualifying patterns (probabilistic).
  std::size_t patterns_checked = 0;
  /// Patterns over the union of model and reference neighborhoods that were evaluated.
  std::size_t domain_patterns = 0;
  std::vector<Mismatch> mismatches;
  std::vector<PatternDistribution> distributions;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Compares the model's decision against reference.central_update for every pattern over the union of the
/// model and reference neighborhoods: all |V|^n of them, or only the reachable ones when `reachable` is
/// given, i.e. patterns in the lattices the reference produced (every step of the trace but the initial one).
/// A pattern with no matching rule counts as a mismatch.
VerificationReport verify_deterministic(const IdentifiedModel& model, const ReferenceAutomaton& reference,
                                        const Trace* reachable = nullptr);

struct ProbabilisticCheckOptions {
  std::size_t min_count = 200;
  int width = 100;
  double density = 0.5;
};

/// Simulates the reference (viewed as binary occupancy when the model is binary) for `n_samples`
/// cell updates and compares empirical next-state frequencies per model pattern with the model's rule.
VerificationReport verify_probabilistic(const IdentifiedModel& model, const ReferenceAutomaton& reference,
                                        std::size_t n_samples, double tolerance, std::uint64_t seed,
                                        const ProbabilisticCheckOptions& options = {});

struct SurrogateOptions {
  int width = 200;
  std::vector<double> densities{0.2, 0.6};
  int steps = 1000;
  int fit_steps = 500;
  int max_retries = 8;
  /// Density whose jam drift must be negative.
  double jam_density = 0.6;
  std::uint64_t seed = 0;
};

struct SurrogateRun {
  double density = 0.0;
  std::size_t vehicles = 0;
  std::size_t violations = 0;  // steps whose occupied count differs from the initial one
  RepairStats repair;
  double drift_slope = 0.0;  // cells per step, of the tracked jam cluster over the last fit_steps
};

struct SurrogateReport {
  std::vector<SurrogateRun> runs;
  bool conserved = false;
  bool backward_drift = false;
  bool pass = false;
};

/// Runs a binary traffic model (with its detectors) on random rings and checks occupancy conservation
/// and the backward motion of the largest jam.
SurrogateReport traffic_surrogate(const IdentifiedModel& model, const SurrogateOptions& options = {});

/// Position (unwrapped, in cells) of the tracked largest occupied cluster at each step of `trace`.
std::vector<double> jam_track(const Trace& trace);
/// Least-squares slope of ys against 0, 1, 2, ...
double least_squares_slope(const std::vector<double>& ys);

enum class ReportFormat { Text, MachineReadable };
ReportFormat parse_report_format(std::string_view text);

void write_report(std::ostream& out, const VerificationReport& report, ReportFormat format);
void write_report(std::ostream& out, const SurrogateReport& report, ReportFormat format);

}  // namespace caid
