#include "caid/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "caid/error.hpp"
#include "caid/random.hpp"

namespace caid {

namespace {

std::string pattern_text(const IdentifiedModel& model, const std::vector<State>& pattern) {
  const auto attrs = model.attributes();
  std::string s = "(";
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i) s += ", ";
    s += attrs[i].to_string(model.dims) + "=" + std::to_string(pattern[i]);
  }
  return s + ")";
}

/// Premise attribute positions within the model's attribute list, one vector per rule.
template <class Rule>
std::vector<std::vector<std::size_t>> compile(const std::vector<Rule>& rules, const std::vector<AttributeId>& attrs) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(rules.size());
  for (const auto& r : rules) {
    std::vector<std::size_t> idx;
    for (const auto& d : r.premise) {
      const auto it = std::find(attrs.begin(), attrs.end(), d.attribute);
      if (it == attrs.end()) throw std::invalid_argument("rule premise references an attribute outside the model");
      idx.push_back(static_cast<std::size_t>(it - attrs.begin()));
    }
    out.push_back(std::move(idx));
  }
  return out;
}

bool satisfies(const Premise& premise, const std::vector<std::size_t>& idx, const std::vector<State>& pattern) {
  for (std::size_t k = 0; k < premise.size(); ++k) {
    if (pattern[idx[k]] != premise[k].value) return false;
  }
  return true;
}

State sample(const ProbabilisticRule& rule, double u) {
  double cumulative = 0.0;
  for (const auto& o : rule.outcomes) {
    cumulative += o.probability;
    if (u < cumulative) return o.value;
  }
  return rule.outcomes.back().value;
}

/// Per-call view of a model with compiled premises.
class Executor {
 public:
  explicit Executor(const IdentifiedModel& model)
      : model_(model),
        attrs_(model.attributes()),
        det_(compile(model.rules, attrs_)),
        prob_(compile(model.probabilistic_rules, attrs_)) {}

  void check(const Lattice& lattice) const {
    if (lattice.dims() != model_.dims) throw AlphabetMismatch("lattice dimensionality differs from the model");
    for (State s : lattice.cells()) {
      if (!model_.alphabet.contains(s)) {
        throw AlphabetMismatch("lattice state " + std::to_string(s) + " is not in the model alphabet");
      }
    }
    for (const auto& o : model_.neighborhood.offsets) {
      if (2 * std::abs(o.dx) + 1 > lattice.width() || 2 * std::abs(o.dy) + 1 > lattice.height()) {
        throw std::invalid_argument("model neighborhood does not fit inside the lattice");
      }
    }
  }

  State update(const Lattice& lattice, std::size_t cell, std::uint64_t seed, std::uint64_t attempt) const {
    const auto pattern = model_pattern(model_, lattice, cell);
    if (model_.mode == ModelMode::Deterministic) {
      for (std::size_t r = 0; r < model_.rules.size(); ++r) {
        if (satisfies(model_.rules[r].premise, det_[r], pattern)) return model_.rules[r].decision;
      }
    } else {
      for (std::size_t r = 0; r < model_.probabilistic_rules.size(); ++r) {
        if (satisfies(model_.probabilistic_rules[r].premise, prob_[r], pattern)) {
          return sample(model_.probabilistic_rules[r], uniform01(seed, cell, attempt));
        }
      }
    }
    throw NoMatchingRule(cell, pattern_text(model_, pattern));
  }

  std::optional<State> decide(const std::vector<State>& pattern) const {
    for (std::size_t r = 0; r < model_.rules.size(); ++r) {
      if (satisfies(model_.rules[r].premise, det_[r], pattern)) return model_.rules[r].decision;
    }
    return std::nullopt;
  }

  const ProbabilisticRule* match(const std::vector<State>& pattern) const {
    for (std::size_t r = 0; r < model_.probabilistic_rules.size(); ++r) {
      if (satisfies(model_.probabilistic_rules[r].premise, prob_[r], pattern)) return &model_.probabilistic_rules[r];
    }
    return nullptr;
  }

  Lattice step(const Lattice& lattice, std::uint64_t seed) const {
    check(lattice);
    Lattice next = lattice;
    for (std::size_t c = 0; c < lattice.size(); ++c) next[c] = update(lattice, c, seed, 0);
    return next;
  }

 private:
  const IdentifiedModel& model_;
  std::vector<AttributeId> attrs_;
  std::vector<std::vector<std::size_t>> det_;
  std::vector<std::vector<std::size_t>> prob_;
};

std::vector<std::size_t> firing_cells(const std::vector<ErrorDetector>& detectors, const Lattice& before,
                                      const Lattice& after) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < before.size(); ++c) {
    for (const auto& d : detectors) {
      if (d.fires(before, after, c)) out.push_back(c);
    }
  }
  return out;
}

std::vector<std::size_t> window_cells(const std::vector<ErrorDetector>& detectors, const Lattice& before,
                                      const Lattice& after) {
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < before.size(); ++c) {
    for (const auto& d : detectors) {
      if (!d.fires(before, after, c)) continue;
      for (const auto& o : d.repair_window) cells.push_back(before.neighbor(c, o));
    }
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

}  // namespace

bool ErrorDetector::fires(const Lattice& before, const Lattice& after, std::size_t cell) const {
  for (const auto& [o, v] : premise) {
    if (before.at(cell, o) != v) return false;
  }
  State sum = 0;
  for (const auto& o : check_offsets) sum += after.at(cell, o);
  return sum != target;
}

void ErrorDetector::validate() const {
  if (repair_window.empty()) throw ParameterError("error detector needs a non-empty repair window");
  auto lo = repair_window.front();
  auto hi = repair_window.front();
  for (const auto& o : repair_window) {
    lo = {std::min(lo.dx, o.dx), std::min(lo.dy, o.dy)};
    hi = {std::max(hi.dx, o.dx), std::max(hi.dy, o.dy)};
  }
  auto inside = [&](Offset o) { return o.dx >= lo.dx && o.dx <= hi.dx && o.dy >= lo.dy && o.dy <= hi.dy; };
  for (const auto& [o, v] : premise) {
    if (!inside(o)) throw ParameterError("error detector premise offset outside its repair window");
  }
  for (const auto& o : check_offsets) {
    if (!inside(o)) throw ParameterError("error detector check offset outside its repair window");
  }
}

std::vector<ErrorDetector> make_traffic_detectors() {
  const std::vector<Offset> window{{-2, 0}, {-1, 0}, {0, 0}};
  ErrorDetector free_road{{{{-2, 0}, 1}, {{-1, 0}, 0}, {{0, 0}, 0}}, window, 1, window};
  ErrorDetector gap_of_one{{{{-2, 0}, 1}, {{-1, 0}, 0}, {{0, 0}, 1}}, {{-2, 0}, {-1, 0}}, 1, window};
  return {free_road, gap_of_one};
}

std::string to_string(ModelMode mode) {
  return mode == ModelMode::Deterministic ? "deterministic" : "probabilistic";
}

ModelMode parse_mode(std::string_view text) {
  if (text == "deterministic") return ModelMode::Deterministic;
  if (text == "probabilistic") return ModelMode::Probabilistic;
  throw ParameterError("unknown mode '" + std::string(text) + "' (expected deterministic or probabilistic)");
}

std::vector<AttributeId> IdentifiedModel::attributes() const {
  std::vector<AttributeId> attrs;
  for (const auto& o : neighborhood.offsets) attrs.emplace_back(o);
  for (const auto& d : neighborhood.derived) attrs.push_back(AttributeId::derived(d));
  return attrs;
}

void IdentifiedModel::validate() const {
  const auto attrs = attributes();
  if (mode == ModelMode::Deterministic) {
    if (!probabilistic_rules.empty()) throw std::invalid_argument("deterministic model holds probabilistic rules");
    for (const auto& r : rules) {
      if (r.stats.support != r.stats.match) throw std::invalid_argument("deterministic rule with CER != 1");
    }
    compile(rules, attrs);
  } else {
    if (!rules.empty()) throw std::invalid_argument("probabilistic model holds deterministic rules");
    for (const auto& r : probabilistic_rules) {
      double sum = 0.0;
      for (const auto& o : r.outcomes) sum += o.probability;
      if (r.outcomes.empty() || std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("probabilistic rule outcomes do not sum to 1");
      }
    }
    compile(probabilistic_rules, attrs);
  }
  for (const auto& d : detectors) d.validate();
}

std::vector<State> model_pattern(const IdentifiedModel& model, const Lattice& lattice, std::size_t cell) {
  std::vector<State> pattern;
  pattern.reserve(model.neighborhood.offsets.size() + model.neighborhood.derived.size());
  for (const auto& o : model.neighborhood.offsets) pattern.push_back(lattice.at(cell, o));
  for (const auto& name : model.neighborhood.derived) {
    if (name != kLiveNeighbors || lattice.dims() != 2) {
      throw std::invalid_argument("unsupported derived attribute '" + name + "'");
    }
    State live = 0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx != 0 || dy != 0) live += lattice.at(cell, {dx, dy});
      }
    }
    pattern.push_back(live);
  }
  return pattern;
}

Lattice step_with_ruleset(const IdentifiedModel& model, const Lattice& lattice, std::uint64_t seed) {
  return Executor(model).step(lattice, seed);
}

Lattice step_with_repair(const IdentifiedModel& model, const std::vector<ErrorDetector>& detectors,
                         const Lattice& lattice, int max_retries, std::uint64_t seed, RepairStats* stats) {
  if (max_retries < 1) throw ParameterError("max_retries must be >= 1");
  RepairStats local;
  RepairStats& s = stats ? *stats : local;
  const Executor exec(model);
  Lattice next = exec.step(lattice, seed);
  ++s.steps;

  bool retried = false;
  for (int attempt = 1; attempt <= max_retries; ++attempt) {
    const auto fired = firing_cells(detectors, lattice, next);
    if (fired.empty()) {
      if (retried) ++s.repaired_steps;
      return next;
    }
    retried = true;
    s.detections += fired.size();
    for (std::size_t c : window_cells(detectors, lattice, next)) {
      next[c] = exec.update(lattice, c, seed, static_cast<std::uint64_t>(attempt));
      ++s.resampled_cells;
    }
  }
  auto fired = firing_cells(detectors, lattice, next);
  if (fired.empty()) {
    ++s.repaired_steps;
    return next;
  }
  ++s.fallbacks;
  while (!fired.empty()) {
    s.detections += fired.size();
    bool changed = false;
    for (std::size_t c : window_cells(detectors, lattice, next)) {
      if (next[c] != lattice[c]) {
        next[c] = lattice[c];
        ++s.restored_cells;
        changed = true;
      }
    }
    if (!changed) break;
    fired = firing_cells(detectors, lattice, next);
  }
  return next;
}

Trace run_model_trace(const IdentifiedModel& model, Lattice initial, int steps, std::uint64_t seed, int max_retries,
                      RepairStats* stats) {
  if (steps < 1) throw ParameterError("steps must be >= 1");
  Trace trace;
  trace.alphabet = model.alphabet;
  trace.steps.reserve(static_cast<std::size_t>(steps) + 1);
  trace.steps.push_back(std::move(initial));
  for (int t = 0; t < steps; ++t) {
    const std::uint64_t step_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    const Lattice& now = trace.steps.back();
    trace.steps.push_back(model.detectors.empty()
                              ? step_with_ruleset(model, now, step_seed)
                              : step_with_repair(model, model.detectors, now, max_retries, step_seed, stats));
  }
  return trace;
}

std::optional<State> decide(const IdentifiedModel& model, const std::vector<State>& pattern) {
  return Executor(model).decide(pattern);
}

const ProbabilisticRule* match_probabilistic(const IdentifiedModel& model, const std::vector<State>& pattern) {
  return Executor(model).match(pattern);
}

}  // namespace caid
