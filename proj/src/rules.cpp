#include "caid/rules.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "caid/error.hpp"

namespace caid {

namespace {

constexpr double kDistributionTolerance = 1e-9;

using Complex = std::vector<std::pair<std::size_t, State>>;  // (attribute index, value)

bool row_matches(const Complex& c, const Observation& row) {
  return std::all_of(c.begin(), c.end(), [&](const auto& d) { return row.conditions[d.first] == d.second; });
}

Premise to_premise(const Complex& c, const DecisionTable& table) {
  std::vector<Descriptor> out;
  for (const auto& [a, v] : c) out.push_back({table.attributes[a], v});
  return make_premise(std::move(out));
}

void require_consistent(const DecisionTable& table) {
  std::map<std::vector<State>, State> seen;
  for (const auto& r : table.rows) {
    auto [it, inserted] = seen.emplace(r.conditions, r.decision);
    if (!inserted && it->second != r.decision) {
      throw InconsistentInput(
          "decision table has conflicting observations (equal conditions, different decisions); "
          "the data looks stochastic, use the probabilistic mode");
    }
  }
}

DecisionRule finish_rule(Premise premise, State decision, const DecisionTable& table) {
  DecisionRule r{std::move(premise), decision, {}};
  r.stats = rule_stats(r, table);
  return r;
}

void assert_cover(const std::vector<DecisionRule>& rules, const DecisionTable& table, const char* who) {
  const CoverCheck c = check_cover(rules, table);
  if (!c.complete || !c.consistent || !c.minimal) {
    throw std::logic_error(std::string(who) + " produced a rule set that is not a complete, consistent, minimal cover");
  }
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

double ProbabilisticRule::probability_of(State value) const noexcept {
  for (const auto& o : outcomes) {
    if (o.value == value) return o.probability;
  }
  return 0.0;
}

Premise make_premise(std::vector<Descriptor> descriptors) {
  std::sort(descriptors.begin(), descriptors.end());
  for (std::size_t i = 1; i < descriptors.size(); ++i) {
    if (descriptors[i].attribute == descriptors[i - 1].attribute) {
      throw std::invalid_argument("premise has two descriptors for one attribute");
    }
  }
  return descriptors;
}

std::vector<std::size_t> premise_indices(const Premise& premise, const DecisionTable& table) {
  std::vector<std::size_t> idx;
  idx.reserve(premise.size());
  for (const auto& d : premise) idx.push_back(table.index_of(d.attribute));
  return idx;
}

bool matches(const Premise& premise, const std::vector<std::size_t>& attribute_index, const Observation& row) {
  for (std::size_t k = 0; k < premise.size(); ++k) {
    if (row.conditions[attribute_index[k]] != premise[k].value) return false;
  }
  return true;
}

RuleStats rule_stats(const DecisionRule& rule, const DecisionTable& table) {
  const auto idx = premise_indices(rule.premise, table);
  RuleStats s;
  for (const auto& row : table.rows) {
    if (!matches(rule.premise, idx, row)) continue;
    s.match += row.multiplicity;
    if (row.decision == rule.decision) s.support += row.multiplicity;
  }
  return s;
}

CoverCheck check_cover(const std::vector<DecisionRule>& rules, const DecisionTable& table) {
  CoverCheck c;
  std::vector<std::vector<std::size_t>> idx;
  for (const auto& r : rules) idx.push_back(premise_indices(r.premise, table));
  for (const auto& row : table.rows) {
    bool covered = false;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (!matches(rules[i].premise, idx[i], row)) continue;
      if (rules[i].decision == row.decision) covered = true;
      else c.consistent = false;
    }
    if (!covered) c.complete = false;
  }
  for (std::size_t i = 0; i < rules.size() && c.minimal; ++i) {
    for (std::size_t drop = 0; drop < rules[i].premise.size() && c.minimal; ++drop) {
      Premise reduced = rules[i].premise;
      reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(drop));
      const auto ridx = premise_indices(reduced, table);
      const bool still_consistent = std::none_of(table.rows.begin(), table.rows.end(), [&](const Observation& row) {
        return row.decision != rules[i].decision && matches(reduced, ridx, row);
      });
      if (still_consistent) c.minimal = false;
    }
  }
  return c;
}

std::vector<DecisionRule> lem2(const DecisionTable& table) {
  require_consistent(table);
  const std::size_t n = table.rows.size();
  const std::size_t n_attr = table.attributes.size();

  // Candidate descriptors in (attribute, value) order.
  std::vector<std::pair<std::size_t, State>> descriptors;
  for (std::size_t a = 0; a < n_attr; ++a) {
    std::set<State> values;
    for (const auto& r : table.rows) values.insert(r.conditions[a]);
    for (State v : values) descriptors.emplace_back(a, v);
  }

  std::vector<DecisionRule> out;
  for (State decision : table.decisions()) {
    std::vector<bool> concept_rows(n);
    for (std::size_t r = 0; r < n; ++r) concept_rows[r] = table.rows[r].decision == decision;

    auto covered_by = [&](const Complex& c) {
      std::vector<bool> m(n);
      for (std::size_t r = 0; r < n; ++r) m[r] = row_matches(c, table.rows[r]);
      return m;
    };
    auto inside_concept = [&](const Complex& c) {
      for (std::size_t r = 0; r < n; ++r) {
        if (!concept_rows[r] && row_matches(c, table.rows[r])) return false;
      }
      return true;
    };

    std::vector<Complex> complexes;
    std::vector<bool> goal = concept_rows;
    while (std::find(goal.begin(), goal.end(), true) != goal.end()) {
      Complex t;
      std::vector<bool> current(n, true);
      std::vector<bool> uncovered = goal;
      while (!inside_concept(t)) {
        std::optional<std::size_t> best;
        std::uint64_t best_cov = 0;
        std::uint64_t best_out = 0;
        for (std::size_t d = 0; d < descriptors.size(); ++d) {
          const auto [a, v] = descriptors[d];
          if (std::any_of(t.begin(), t.end(), [a = a](const auto& x) { return x.first == a; })) continue;
          std::uint64_t cov = 0;
          std::uint64_t outside = 0;
          for (std::size_t r = 0; r < n; ++r) {
            if (!current[r] || table.rows[r].conditions[a] != v) continue;
            if (uncovered[r]) cov += table.rows[r].multiplicity;
            if (!concept_rows[r]) outside += table.rows[r].multiplicity;
          }
          if (cov == 0) continue;
          if (!best || cov > best_cov || (cov == best_cov && outside < best_out)) {
            best = d;
            best_cov = cov;
            best_out = outside;
          }
        }
        if (!best) throw std::logic_error("lem2: no descriptor extends the complex");
        const auto [a, v] = descriptors[*best];
        t.emplace_back(a, v);
        for (std::size_t r = 0; r < n; ++r) {
          if (table.rows[r].conditions[a] != v) current[r] = uncovered[r] = false;
        }
      }
      std::sort(t.begin(), t.end());
      for (std::size_t i = 0; i < t.size();) {
        Complex reduced = t;
        reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(i));
        if (inside_concept(reduced)) t = std::move(reduced);
        else ++i;
      }
      complexes.push_back(t);
      const auto cov = covered_by(t);
      for (std::size_t r = 0; r < n; ++r) goal[r] = goal[r] && !cov[r];
    }

    for (std::size_t i = 0; i < complexes.size();) {
      std::vector<bool> others(n, false);
      for (std::size_t j = 0; j < complexes.size(); ++j) {
        if (j == i) continue;
        const auto cov = covered_by(complexes[j]);
        for (std::size_t r = 0; r < n; ++r) others[r] = others[r] || cov[r];
      }
      bool redundant = true;
      for (std::size_t r = 0; r < n && redundant; ++r) redundant = !concept_rows[r] || others[r];
      if (redundant) complexes.erase(complexes.begin() + static_cast<std::ptrdiff_t>(i));
      else ++i;
    }
    for (const auto& c : complexes) out.push_back(finish_rule(to_premise(c, table), decision, table));
  }
  assert_cover(out, table, "lem2");
  return out;
}

namespace {

/// Minimal hitting sets of `clauses` (attribute masks), each clause non-empty.
std::vector<std::uint64_t> minimal_transversals(std::vector<std::uint64_t> clauses) {
  std::sort(clauses.begin(), clauses.end(), [](auto a, auto b) {
    return std::popcount(a) != std::popcount(b) ? std::popcount(a) < std::popcount(b) : a < b;
  });
  std::vector<std::uint64_t> minimal;
  for (auto c : clauses) {
    if (std::none_of(minimal.begin(), minimal.end(), [c](auto q) { return (q & c) == q; })) minimal.push_back(c);
  }
  std::set<std::uint64_t> found;
  auto is_minimal = [&](std::uint64_t s) {
    for (auto rest = s; rest; rest &= rest - 1) {
      const auto a = rest & (~rest + 1);
      const bool has_private = std::any_of(minimal.begin(), minimal.end(), [&](auto q) { return (q & s) == a; });
      if (!has_private) return false;
    }
    return true;
  };
  auto dfs = [&](auto&& self, std::uint64_t s, std::uint64_t excluded) -> void {
    std::uint64_t branch = 0;
    int bits = 65;
    for (auto q : minimal) {
      if (q & s) continue;
      const auto allowed = q & ~excluded;
      if (!allowed) return;
      if (std::popcount(allowed) < bits) {
        branch = allowed;
        bits = std::popcount(allowed);
      }
    }
    if (bits == 65) {
      if (is_minimal(s)) found.insert(s);
      return;
    }
    std::uint64_t tried = 0;
    for (auto rest = branch; rest; rest &= rest - 1) {
      const auto a = rest & (~rest + 1);
      self(self, s | a, excluded | tried);
      tried |= a;
    }
  };
  dfs(dfs, 0, 0);
  return {found.begin(), found.end()};
}

}  // namespace

std::vector<DecisionRule> exhaustive_rules(const DecisionTable& table) {
  require_consistent(table);
  if (table.attributes.size() > 64) throw std::invalid_argument("exhaustive_rules supports at most 64 attributes");
  const std::size_t n_attr = table.attributes.size();
  std::set<std::pair<Complex, State>> seen;
  std::vector<DecisionRule> out;
  for (const auto& u : table.rows) {
    std::vector<std::uint64_t> clauses;
    for (const auto& v : table.rows) {
      if (v.decision == u.decision) continue;
      std::uint64_t m = 0;
      for (std::size_t a = 0; a < n_attr; ++a) {
        if (u.conditions[a] != v.conditions[a]) m |= std::uint64_t{1} << a;
      }
      clauses.push_back(m);
    }
    for (auto s : minimal_transversals(std::move(clauses))) {
      Complex c;
      for (std::size_t a = 0; a < n_attr; ++a) {
        if (s & (std::uint64_t{1} << a)) c.emplace_back(a, u.conditions[a]);
      }
      if (seen.emplace(c, u.decision).second) out.push_back(finish_rule(to_premise(c, table), u.decision, table));
    }
  }
  std::sort(out.begin(), out.end(), [](const DecisionRule& a, const DecisionRule& b) {
    if (a.decision != b.decision) return a.decision < b.decision;
    return a.premise < b.premise;
  });
  assert_cover(out, table, "exhaustive_rules");
  return out;
}

std::vector<DecisionRule> prioritize(std::vector<DecisionRule> rules, const DecisionTable& table) {
  for (auto& r : rules) r.stats = rule_stats(r, table);
  std::sort(rules.begin(), rules.end(), [](const DecisionRule& a, const DecisionRule& b) {
    if (a.stats.support != b.stats.support) return a.stats.support > b.stats.support;
    if (a.premise.size() != b.premise.size()) return a.premise.size() < b.premise.size();
    if (a.premise != b.premise) return a.premise < b.premise;
    return a.decision < b.decision;
  });
  return rules;
}

std::vector<ProbabilisticRule> merge_uncertain(const DecisionTable& table) {
  if (table.rows.empty()) throw std::invalid_argument("merge_uncertain: empty table");
  struct Pattern {
    std::vector<State> conditions;
    std::map<State, std::uint64_t> counts;
    std::uint64_t total = 0;
  };
  std::map<std::vector<State>, Pattern> grouped;
  for (const auto& r : table.rows) {
    auto& p = grouped[r.conditions];
    p.conditions = r.conditions;
    p.counts[r.decision] += r.multiplicity;
    p.total += r.multiplicity;
  }
  std::vector<Pattern> patterns;
  for (auto& [k, p] : grouped) patterns.push_back(std::move(p));

  auto same_distribution = [](const Pattern& a, const Pattern& b) {
    if (a.counts.size() != b.counts.size()) return false;
    for (auto ia = a.counts.begin(), ib = b.counts.begin(); ia != a.counts.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return false;
      const double pa = static_cast<double>(ia->second) / static_cast<double>(a.total);
      const double pb = static_cast<double>(ib->second) / static_cast<double>(b.total);
      if (std::abs(pa - pb) > kDistributionTolerance) return false;
    }
    return true;
  };

  std::vector<ProbabilisticRule> out;
  const std::size_t n_attr = table.attributes.size();
  auto emit = [&](auto&& self, std::size_t lo, std::size_t hi, std::size_t depth) -> void {
    bool uniform = true;
    for (std::size_t i = lo + 1; i < hi && uniform; ++i) uniform = same_distribution(patterns[lo], patterns[i]);
    if (uniform || depth == n_attr) {
      std::map<State, std::uint64_t> pooled;
      std::uint64_t total = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        for (const auto& [d, w] : patterns[i].counts) pooled[d] += w;
        total += patterns[i].total;
      }
      ProbabilisticRule rule;
      std::vector<Descriptor> ds;
      for (std::size_t a = 0; a < depth; ++a) ds.push_back({table.attributes[a], patterns[lo].conditions[a]});
      rule.premise = make_premise(std::move(ds));
      for (const auto& [d, w] : pooled) {
        rule.outcomes.push_back({d, static_cast<double>(w) / static_cast<double>(total)});
      }
      rule.total_match = total;
      out.push_back(std::move(rule));
      return;
    }
    for (std::size_t i = lo; i < hi;) {
      std::size_t j = i;
      while (j < hi && patterns[j].conditions[depth] == patterns[i].conditions[depth]) ++j;
      self(self, i, j, depth + 1);
      i = j;
    }
  };
  emit(emit, 0, patterns.size(), 0);
  return out;
}

std::string format_premise(const Premise& premise, int dims) {
  if (premise.empty()) return "true";
  std::string s;
  for (std::size_t i = 0; i < premise.size(); ++i) {
    if (i) s += " & ";
    s += premise[i].attribute.to_string(dims) + "=" + std::to_string(premise[i].value);
  }
  return s;
}

std::string format_rule(const DecisionRule& rule, int dims) {
  const auto cer = rule.stats.cer();
  return format_premise(rule.premise, dims) + " => " + std::to_string(rule.decision) +
         " [supp=" + std::to_string(rule.stats.support) + " match=" + std::to_string(rule.stats.match) +
         " cer=" + (cer ? fixed3(*cer) : std::string("none")) + "]";
}

std::string format_rule(const ProbabilisticRule& rule, int dims) {
  std::string s = format_premise(rule.premise, dims) + " => {";
  for (std::size_t i = 0; i < rule.outcomes.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(rule.outcomes[i].value) + ":" + fixed3(rule.outcomes[i].probability);
  }
  return s + "} [match=" + std::to_string(rule.total_match) + "]";
}

namespace {

template <class T>
T parse_number(std::string_view s, std::size_t line, std::size_t col, const char* what) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError(line, col, std::string("invalid ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

double parse_probability(std::string_view s, std::size_t line, std::size_t col) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || *end != '\0' || !(v > 0.0 && v <= 1.0)) {
    throw ParseError(line, col, "invalid probability '" + str + "'");
  }
  return v;
}

Premise parse_premise(std::string_view text, std::size_t line) {
  if (text == "true") return {};
  std::vector<Descriptor> ds;
  std::size_t start = 0;
  while (true) {
    const auto amp = text.find(" & ", start);
    const auto item = text.substr(start, amp == std::string_view::npos ? std::string_view::npos : amp - start);
    const auto eq = item.rfind('=');
    if (eq == std::string_view::npos) throw ParseError(line, start + 1, "descriptor without '='");
    try {
      ds.push_back({AttributeId::parse(item.substr(0, eq)), parse_number<State>(item.substr(eq + 1), line, start + eq + 2, "value")});
    } catch (const UnknownAttribute& e) {
      throw ParseError(line, start + 1, e.what());
    }
    if (amp == std::string_view::npos) break;
    start = amp + 3;
  }
  try {
    return make_premise(std::move(ds));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, 0, e.what());
  }
}

std::string_view after_prefix(std::string_view s, std::string_view prefix, std::size_t line, std::size_t col) {
  if (s.substr(0, prefix.size()) != prefix) throw ParseError(line, col, "expected '" + std::string(prefix) + "'");
  return s.substr(prefix.size());
}

}  // namespace

RuleSet parse_rules(std::istream& in) {
  RuleSet set;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s(raw);
    if (s.empty() || s.front() == '#') continue;
    const auto arrow = s.find(" => ");
    if (arrow == std::string_view::npos) throw ParseError(line, 0, "missing ' => '");
    Premise premise = parse_premise(s.substr(0, arrow), line);
    std::string_view rhs = s.substr(arrow + 4);
    const std::size_t rhs_col = arrow + 5;
    const auto bracket = rhs.find(" [");
    if (bracket == std::string_view::npos || rhs.back() != ']') throw ParseError(line, rhs_col, "missing statistics");
    const std::string_view decision = rhs.substr(0, bracket);
    const std::string_view stats = rhs.substr(bracket + 2, rhs.size() - bracket - 3);
    const std::size_t stats_col = rhs_col + bracket + 2;

    if (!decision.empty() && decision.front() == '{') {
      if (!set.deterministic.empty()) throw ParseError(line, rhs_col, "probabilistic rule in a deterministic rule file");
      if (decision.back() != '}') throw ParseError(line, rhs_col, "unterminated outcome list");
      ProbabilisticRule rule;
      rule.premise = std::move(premise);
      std::string_view items = decision.substr(1, decision.size() - 2);
      std::size_t start = 0;
      double sum = 0.0;
      while (true) {
        const auto comma = items.find(", ", start);
        const auto item = items.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        const auto colon = item.find(':');
        const std::size_t col = rhs_col + 1 + start;
        if (colon == std::string_view::npos) throw ParseError(line, col, "outcome without ':'");
        Outcome o{parse_number<State>(item.substr(0, colon), line, col, "outcome value"),
                  parse_probability(item.substr(colon + 1), line, col + colon + 1)};
        if (!rule.outcomes.empty() && o.value <= rule.outcomes.back().value) {
          throw ParseError(line, col, "outcomes must be sorted by value");
        }
        sum += o.probability;
        rule.outcomes.push_back(o);
        if (comma == std::string_view::npos) break;
        start = comma + 2;
      }
      if (std::abs(sum - 1.0) > 0.01) throw ParseError(line, rhs_col, "outcome probabilities do not sum to 1");
      for (auto& o : rule.outcomes) o.probability /= sum;
      rule.total_match = parse_number<std::uint64_t>(after_prefix(stats, "match=", line, stats_col), line, stats_col,
                                                     "match count");
      set.probabilistic.push_back(std::move(rule));
    } else {
      if (!set.probabilistic.empty()) throw ParseError(line, rhs_col, "deterministic rule in a probabilistic rule file");
      DecisionRule rule;
      rule.premise = std::move(premise);
      rule.decision = parse_number<State>(decision, line, rhs_col, "decision");
      std::string_view rest = after_prefix(stats, "supp=", line, stats_col);
      auto sp = rest.find(' ');
      rule.stats.support = parse_number<std::uint64_t>(rest.substr(0, sp), line, stats_col, "support");
      rest = after_prefix(rest.substr(sp == std::string_view::npos ? rest.size() : sp + 1), "match=", line, stats_col);
      sp = rest.find(' ');
      rule.stats.match = parse_number<std::uint64_t>(rest.substr(0, sp), line, stats_col, "match");
      if (rule.stats.support > rule.stats.match) throw ParseError(line, stats_col, "support exceeds match");
      rest = after_prefix(rest.substr(sp == std::string_view::npos ? rest.size() : sp + 1), "cer=", line, stats_col);
      const auto cer = rule.stats.cer();
      if (rest != (cer ? fixed3(*cer) : std::string("none"))) {
        throw ParseError(line, stats_col, "cer does not equal supp/match");
      }
      set.deterministic.push_back(std::move(rule));
    }
  }
  return set;
}

void write_rules(std::ostream& out, const RuleSet& rules, int dims) {
  for (const auto& r : rules.deterministic) out << format_rule(r, dims) << '\n';
  for (const auto& r : rules.probabilistic) out << format_rule(r, dims) << '\n';
}

}  // namespace caid
