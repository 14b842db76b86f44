#include "caid/reducts.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "caid/error.hpp"
#include "caid/random.hpp"

namespace caid {

namespace {

constexpr std::size_t kMaxAttributes = 64;

AttrMask bit(std::size_t i) { return AttrMask{1} << i; }

/// Table with every attribute value replaced by a dense per-attribute code, plus per-row full-pattern ids.
struct CodedTable {
  std::size_t n_attr = 0;
  std::size_t n_rows = 0;
  std::vector<std::uint8_t> codes;  // row-major
  std::vector<std::size_t> cardinality;
  std::vector<State> decision;
  std::vector<std::uint32_t> full_class;

  std::uint8_t code(std::size_t row, std::size_t attr) const { return codes[row * n_attr + attr]; }

  AttrMask diff(std::size_t u, std::size_t v) const {
    AttrMask m = 0;
    const std::uint8_t* a = &codes[u * n_attr];
    const std::uint8_t* b = &codes[v * n_attr];
    for (std::size_t i = 0; i < n_attr; ++i) {
      if (a[i] != b[i]) m |= bit(i);
    }
    return m;
  }
};

CodedTable encode(const DecisionTable& table) {
  if (table.attributes.size() > kMaxAttributes) {
    throw std::invalid_argument("reduct search supports at most 64 condition attributes, table has " +
                                std::to_string(table.attributes.size()));
  }
  CodedTable c;
  c.n_attr = table.attributes.size();
  c.n_rows = table.rows.size();
  c.codes.resize(c.n_attr * c.n_rows);
  c.cardinality.assign(c.n_attr, 0);
  for (std::size_t a = 0; a < c.n_attr; ++a) {
    std::map<State, std::uint8_t> dict;
    for (const auto& r : table.rows) dict.emplace(r.conditions[a], 0);
    if (dict.size() > 256) throw std::invalid_argument("attribute has more than 256 distinct values");
    std::uint8_t next = 0;
    for (auto& [v, code] : dict) code = next++;
    c.cardinality[a] = dict.size();
    for (std::size_t r = 0; r < c.n_rows; ++r) c.codes[r * c.n_attr + a] = dict[table.rows[r].conditions[a]];
  }
  std::map<std::vector<State>, std::uint32_t> classes;
  for (const auto& r : table.rows) {
    c.decision.push_back(r.decision);
    auto [it, inserted] = classes.emplace(r.conditions, static_cast<std::uint32_t>(classes.size()));
    c.full_class.push_back(it->second);
  }
  return c;
}

/// Blocks of rows indiscernible on the current attribute set, keeping only blocks that violate
/// decision consistency (two decisions and two full patterns). Empty <=> the attribute set is consistent.
struct Partition {
  std::vector<std::uint32_t> rows;
  std::vector<std::uint32_t> starts;  // block b = rows[starts[b], starts[b+1])

  bool consistent() const noexcept { return rows.empty(); }
  std::size_t blocks() const noexcept { return starts.empty() ? 0 : starts.size() - 1; }
};

bool violating(const CodedTable& t, const std::uint32_t* begin, const std::uint32_t* end) {
  if (end - begin < 2) return false;
  bool two_decisions = false;
  bool two_classes = false;
  for (const auto* p = begin + 1; p != end; ++p) {
    two_decisions = two_decisions || t.decision[*p] != t.decision[*begin];
    two_classes = two_classes || t.full_class[*p] != t.full_class[*begin];
    if (two_decisions && two_classes) return true;
  }
  return false;
}

Partition initial_partition(const CodedTable& t) {
  Partition p;
  p.rows.resize(t.n_rows);
  std::iota(p.rows.begin(), p.rows.end(), std::uint32_t{0});
  if (!violating(t, p.rows.data(), p.rows.data() + p.rows.size())) {
    p.rows.clear();
    return p;
  }
  p.starts = {0, static_cast<std::uint32_t>(p.rows.size())};
  return p;
}

Partition refine(const CodedTable& t, const Partition& in, std::size_t attr) {
  Partition out;
  out.rows.reserve(in.rows.size());
  out.starts.push_back(0);
  const std::size_t k = t.cardinality[attr];
  std::vector<std::uint32_t> count(k + 1);
  std::vector<std::uint32_t> scratch;
  for (std::size_t b = 0; b < in.blocks(); ++b) {
    const auto* begin = in.rows.data() + in.starts[b];
    const auto* end = in.rows.data() + in.starts[b + 1];
    std::fill(count.begin(), count.end(), 0);
    for (const auto* p = begin; p != end; ++p) ++count[t.code(*p, attr) + 1];
    for (std::size_t v = 1; v <= k; ++v) count[v] += count[v - 1];
    scratch.assign(static_cast<std::size_t>(end - begin), 0);
    std::vector<std::uint32_t> pos(count.begin(), count.end() - 1);
    for (const auto* p = begin; p != end; ++p) scratch[pos[t.code(*p, attr)]++] = *p;
    for (std::size_t v = 0; v < k; ++v) {
      const auto* sb = scratch.data() + count[v];
      const auto* se = scratch.data() + count[v + 1];
      if (violating(t, sb, se)) {
        out.rows.insert(out.rows.end(), sb, se);
        out.starts.push_back(static_cast<std::uint32_t>(out.rows.size()));
      }
    }
  }
  if (out.rows.empty()) out.starts.clear();
  return out;
}

Partition partition_for(const CodedTable& t, AttrMask mask) {
  Partition p = initial_partition(t);
  for (std::size_t a = 0; a < t.n_attr && !p.consistent(); ++a) {
    if (mask & bit(a)) p = refine(t, p, a);
  }
  return p;
}

bool consistent_mask(const CodedTable& t, AttrMask mask) { return partition_for(t, mask).consistent(); }

/// A discernibility clause (attribute mask of a decision-discernible pair) not hit by the partition's
/// attribute set; the smallest one found within a bounded scan.
AttrMask conflict_clause(const CodedTable& t, const Partition& p) {
  constexpr std::size_t kBudget = 4096;
  AttrMask best = 0;
  int best_bits = 65;
  std::size_t examined = 0;
  for (std::size_t b = 0; b < p.blocks(); ++b) {
    const auto* begin = p.rows.data() + p.starts[b];
    const auto* end = p.rows.data() + p.starts[b + 1];
    for (const auto* u = begin; u != end; ++u) {
      for (const auto* v = u + 1; v != end; ++v) {
        if (t.decision[*u] == t.decision[*v] || t.full_class[*u] == t.full_class[*v]) continue;
        const AttrMask m = t.diff(*u, *v);
        const int bits = std::popcount(m);
        if (bits < best_bits) {
          best = m;
          best_bits = bits;
          if (bits == 1) return best;
        }
        if (++examined >= kBudget) return best;
      }
    }
  }
  return best;
}

class ReductSearch {
 public:
  explicit ReductSearch(const CodedTable& table) : t_(table), root_(initial_partition(table)) {}

  std::vector<AttrMask> run(std::size_t cap) {
    found_.clear();
    cap_ = cap;
    dfs(0, 0, root_);
    std::vector<AttrMask> out(found_.begin(), found_.end());
    return out;
  }

 private:
  void add_clause(AttrMask c) {
    for (AttrMask q : pool_) {
      if ((q & c) == q) return;
    }
    std::erase_if(pool_, [c](AttrMask q) { return (q & c) == c; });
    pool_.push_back(c);
  }

  bool minimal(AttrMask s) const {
    for (std::size_t a = 0; a < t_.n_attr; ++a) {
      if (!(s & bit(a))) continue;
      const AttrMask rest = s & ~bit(a);
      const bool private_clause =
          std::any_of(pool_.begin(), pool_.end(), [&](AttrMask q) { return (q & s) == bit(a); });
      if (!private_clause && consistent_mask(t_, rest)) return false;
    }
    return true;
  }

  void dfs(AttrMask s, AttrMask excluded, const Partition& p) {
    if (p.consistent()) {
      if (minimal(s)) found_.insert(s);
      return;
    }
    const auto size = static_cast<std::size_t>(std::popcount(s));
    if (size >= cap_) return;

    AttrMask branch = 0;
    int branch_bits = 65;
    std::vector<AttrMask> open;
    for (AttrMask q : pool_) {
      if (q & s) continue;
      const AttrMask allowed = q & ~excluded;
      if (allowed == 0) return;
      open.push_back(allowed);
      if (std::popcount(allowed) < branch_bits) {
        branch = allowed;
        branch_bits = std::popcount(allowed);
      }
    }
    if (open.empty()) {
      const AttrMask c = conflict_clause(t_, p);
      add_clause(c);
      branch = c & ~excluded;
      if (branch == 0) return;
      open.push_back(branch);
    }

    // Pairwise-disjoint open clauses each need their own attribute.
    std::size_t lower_bound = 0;
    AttrMask used = 0;
    std::sort(open.begin(), open.end(), [](AttrMask a, AttrMask b) { return std::popcount(a) < std::popcount(b); });
    for (AttrMask q : open) {
      if (!(q & used)) {
        used |= q;
        ++lower_bound;
      }
    }
    if (size + lower_bound > cap_) return;

    AttrMask tried = 0;
    for (AttrMask rest = branch; rest; rest &= rest - 1) {
      const auto a = static_cast<std::size_t>(std::countr_zero(rest));
      dfs(s | bit(a), excluded | tried, refine(t_, p, a));
      tried |= bit(a);
    }
  }

  const CodedTable& t_;
  Partition root_;
  std::vector<AttrMask> pool_;
  std::set<AttrMask> found_;
  std::size_t cap_ = 0;
};

/// Sum of Chebyshev distances of the offset attributes and their count, for exact comparisons.
std::pair<long long, long long> distance_sum(const std::vector<AttributeId>& attrs) {
  long long sum = 0;
  long long n = 0;
  for (const auto& a : attrs) {
    if (a.is_offset()) {
      sum += chebyshev(a.offset());
      ++n;
    }
  }
  return {sum, n};
}

/// Three-way comparison of average distances, exact in integers.
int compare_avg_distance(const std::vector<AttributeId>& a, const std::vector<AttributeId>& b) {
  auto [sa, na] = distance_sum(a);
  auto [sb, nb] = distance_sum(b);
  if (na == 0) na = 1;
  if (nb == 0) nb = 1;
  const long long l = sa * nb;
  const long long r = sb * na;
  return l < r ? -1 : (l > r ? 1 : 0);
}

bool size_distance_order(const Reduct& a, const Reduct& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  if (int c = compare_avg_distance(a.attributes, b.attributes); c != 0) return c < 0;
  return a.attributes < b.attributes;
}

Reduct make_reduct(const DecisionTable& table, AttrMask m, double stability) {
  return Reduct{attributes_of(table, m), stability};
}

std::size_t min_reduct_size(const DecisionTable& table, ReductSearch& search) {
  for (std::size_t k = 0; k <= table.attributes.size(); ++k) {
    if (!search.run(k).empty()) return k;
  }
  return table.attributes.size();
}

DecisionTable sample_subtable(const DecisionTable& table, double fraction, Rng& rng) {
  std::vector<std::uint32_t> pool;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    pool.insert(pool.end(), table.rows[r].multiplicity, static_cast<std::uint32_t>(r));
  }
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
  k = std::clamp<std::size_t>(k, 1, pool.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + uniform_below(rng, pool.size() - i)]);
  std::vector<std::uint64_t> counts(table.rows.size(), 0);
  for (std::size_t i = 0; i < k; ++i) ++counts[pool[i]];
  DecisionTable sub;
  sub.dims = table.dims;
  sub.attributes = table.attributes;
  sub.alphabet = table.alphabet;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (counts[r] == 0) continue;
    Observation o = table.rows[r];
    o.multiplicity = counts[r];
    sub.rows.push_back(std::move(o));
  }
  return sub;
}

bool is_reduct_of(const CodedTable& t, AttrMask m) {
  if (!consistent_mask(t, m)) return false;
  for (AttrMask rest = m; rest; rest &= rest - 1) {
    const AttrMask a = rest & (~rest + 1);
    if (consistent_mask(t, m & ~a)) return false;
  }
  return true;
}

/// Weighted count of pairs with different decisions among a group, given per-decision weights.
std::uint64_t different_decision_pairs(const std::map<State, std::uint64_t>& by_decision) {
  std::uint64_t total = 0;
  std::uint64_t squares = 0;
  for (const auto& [d, w] : by_decision) {
    total += w;
    squares += w * w;
  }
  return (total * total - squares) / 2;
}

/// Pairs with different decisions that fall in the same block of the given attribute projection.
std::uint64_t indiscernible_decision_pairs(const DecisionTable& table, const std::vector<std::size_t>& idx) {
  std::map<std::vector<State>, std::map<State, std::uint64_t>> blocks;
  std::vector<State> key(idx.size());
  for (const auto& r : table.rows) {
    for (std::size_t k = 0; k < idx.size(); ++k) key[k] = r.conditions[idx[k]];
    blocks[key][r.decision] += r.multiplicity;
  }
  std::uint64_t total = 0;
  for (const auto& [k, by_decision] : blocks) total += different_decision_pairs(by_decision);
  return total;
}

struct PairCounts {
  std::uint64_t total = 0;          // decision-discernible pairs of the full table
  std::uint64_t full_conflicts = 0;  // different decisions, identical full conditions
};

PairCounts full_pair_counts(const DecisionTable& table) {
  std::vector<std::size_t> none;
  std::vector<std::size_t> all(table.attributes.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  PairCounts c;
  c.full_conflicts = indiscernible_decision_pairs(table, all);
  c.total = indiscernible_decision_pairs(table, none) - c.full_conflicts;
  return c;
}

std::uint64_t lost_pairs(const DecisionTable& table, const PairCounts& c, const std::vector<AttributeId>& attrs) {
  std::vector<std::size_t> idx;
  for (const auto& a : attrs) idx.push_back(table.index_of(a));
  std::sort(idx.begin(), idx.end());
  return indiscernible_decision_pairs(table, idx) - c.full_conflicts;
}

}  // namespace

double average_distance(const std::vector<AttributeId>& attrs) {
  auto [sum, n] = distance_sum(attrs);
  return n == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(n);
}

AttrMask mask_of(const DecisionTable& table, const std::vector<AttributeId>& attrs) {
  if (table.attributes.size() > kMaxAttributes) throw std::invalid_argument("more than 64 attributes");
  AttrMask m = 0;
  for (const auto& a : attrs) m |= bit(table.index_of(a));
  return m;
}

std::vector<AttributeId> attributes_of(const DecisionTable& table, AttrMask mask) {
  std::vector<AttributeId> out;
  for (std::size_t i = 0; i < table.attributes.size(); ++i) {
    if (mask & bit(i)) out.push_back(table.attributes[i]);
  }
  return out;
}

bool decision_consistent(const DecisionTable& table, const std::vector<AttributeId>& attrs) {
  const AttrMask m = mask_of(table, attrs);
  return consistent_mask(encode(table), m);
}

std::vector<Reduct> exhaustive_reducts(const DecisionTable& table, std::optional<std::size_t> max_size) {
  const CodedTable coded = encode(table);
  ReductSearch search(coded);
  const std::size_t cap = std::min(max_size.value_or(table.attributes.size()), table.attributes.size());
  std::vector<Reduct> out;
  for (AttrMask m : search.run(cap)) out.push_back(make_reduct(table, m, 1.0));
  if (out.empty()) throw NoReductFound("no reduct with at most " + std::to_string(cap) + " attributes");
  std::sort(out.begin(), out.end(), size_distance_order);
  return out;
}

std::vector<Reduct> shortest_reducts(const DecisionTable& table) {
  const CodedTable coded = encode(table);
  ReductSearch search(coded);
  const std::size_t k = min_reduct_size(table, search);
  std::vector<Reduct> out;
  for (AttrMask m : search.run(k)) out.push_back(make_reduct(table, m, 1.0));
  std::sort(out.begin(), out.end(), size_distance_order);
  return out;
}

std::vector<Reduct> dynamic_reducts(const DecisionTable& table, const DynamicReductOptions& options) {
  if (options.n_subtables < 1) throw ParameterError("dynamic reducts need at least one subtable");
  if (!(options.fraction > 0.0 && options.fraction <= 1.0)) throw ParameterError("subtable fraction must be in (0, 1]");
  if (!(options.stability_threshold >= 0.0 && options.stability_threshold <= 1.0)) {
    throw ParameterError("stability threshold must be in [0, 1]");
  }
  if (table.rows.empty()) throw std::invalid_argument("dynamic reducts of an empty table");

  const CodedTable coded = encode(table);
  ReductSearch search(coded);
  std::size_t cap = 0;
  if (options.max_size) {
    cap = std::min(*options.max_size, table.attributes.size());
  } else {
    cap = std::min(min_reduct_size(table, search) + 1, table.attributes.size());
  }
  const std::vector<AttrMask> candidates = search.run(cap);
  if (candidates.empty()) throw NoReductFound("no reduct with at most " + std::to_string(cap) + " attributes");

  std::vector<std::size_t> hits(candidates.size(), 0);
  Rng rng(options.seed);
  for (std::size_t s = 0; s < options.n_subtables; ++s) {
    const CodedTable sub = encode(sample_subtable(table, options.fraction, rng));
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (is_reduct_of(sub, candidates[c])) ++hits[c];
    }
  }

  std::vector<Reduct> out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double stability = static_cast<double>(hits[c]) / static_cast<double>(options.n_subtables);
    if (stability >= options.stability_threshold) out.push_back(make_reduct(table, candidates[c], stability));
  }
  if (out.empty()) throw NoReductFound("no reduct reaches stability " + std::to_string(options.stability_threshold));
  std::sort(out.begin(), out.end(), [](const Reduct& a, const Reduct& b) {
    if (a.stability != b.stability) return a.stability > b.stability;
    return size_distance_order(a, b);
  });
  return out;
}

double consistency_ratio(const DecisionTable& table, const std::vector<AttributeId>& attrs) {
  const PairCounts c = full_pair_counts(table);
  if (c.total == 0) return 1.0;
  const std::uint64_t lost = lost_pairs(table, c, attrs);
  return static_cast<double>(c.total - lost) / static_cast<double>(c.total);
}

DecisionTable majority_decision_table(const DecisionTable& table) {
  std::map<std::vector<State>, std::map<State, std::uint64_t>> by_pattern;
  for (const auto& r : table.rows) by_pattern[r.conditions][r.decision] += r.multiplicity;
  DecisionTable out;
  out.dims = table.dims;
  out.attributes = table.attributes;
  out.alphabet = table.alphabet;
  for (const auto& [cond, by_decision] : by_pattern) {
    State best = by_decision.begin()->first;
    std::uint64_t best_w = 0;
    std::uint64_t total = 0;
    for (const auto& [d, w] : by_decision) {
      total += w;
      if (w > best_w) {
        best = d;
        best_w = w;
      }
    }
    out.rows.push_back(Observation{cond, best, total});
  }
  return out;
}

std::vector<AttributeId> shorten(const DecisionTable& table, const std::vector<AttributeId>& reduct,
                                 double min_consistency, const ShortenOptions& options) {
  if (!(min_consistency > 0.0 && min_consistency <= 1.0)) throw ParameterError("min_consistency must be in (0, 1]");
  const DecisionTable eval = options.majority_decisions ? majority_decision_table(table) : table;
  std::vector<AttributeId> current;
  for (std::size_t i = 0; i < table.attributes.size(); ++i) {
    if (std::find(reduct.begin(), reduct.end(), table.attributes[i]) != reduct.end()) {
      current.push_back(table.attributes[i]);
    }
  }
  if (current.size() != reduct.size()) throw UnknownAttribute("reduct names attributes missing from the table");
  const PairCounts counts = full_pair_counts(eval);
  if (counts.total == 0) return {};

  auto distance = [](const AttributeId& a) { return a.is_offset() ? chebyshev(a.offset()) : 0; };
  while (!current.empty()) {
    std::optional<std::size_t> best;
    std::uint64_t best_lost = 0;
    for (std::size_t i = 0; i < current.size(); ++i) {
      std::vector<AttributeId> rest = current;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      const std::uint64_t lost = lost_pairs(eval, counts, rest);
      const bool better = !best || lost < best_lost ||
                          (lost == best_lost && distance(current[i]) > distance(current[*best]));
      if (better) {
        best = i;
        best_lost = lost;
      }
    }
    const double ratio = static_cast<double>(counts.total - best_lost) / static_cast<double>(counts.total);
    if (ratio < min_consistency) break;
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(*best));
  }
  return current;
}

Neighborhood neighborhood_of(const std::vector<AttributeId>& attrs) {
  Neighborhood n;
  for (const auto& a : attrs) {
    if (a.is_offset()) n.offsets.push_back(a.offset());
    else n.derived.push_back(a.derived_name());
  }
  std::sort(n.offsets.begin(), n.offsets.end());
  n.avg_distance = average_distance(attrs);
  return n;
}

Neighborhood select_neighborhood(const std::vector<Reduct>& reducts) {
  if (reducts.empty()) throw std::invalid_argument("select_neighborhood: no reducts");
  const Reduct* best = &reducts.front();
  for (const auto& r : reducts) {
    if (size_distance_order(r, *best)) best = &r;
  }
  return neighborhood_of(best->attributes);
}

std::string format_reduct(const Reduct& reduct, int dims) {
  std::string attrs;
  for (std::size_t i = 0; i < reduct.attributes.size(); ++i) {
    if (i) attrs += ',';
    attrs += reduct.attributes[i].to_string(dims);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "reduct size=%zu stability=%.3f attrs=[", reduct.size(), reduct.stability);
  std::string out = buf;
  std::snprintf(buf, sizeof buf, "] avg_dist=%.3f", average_distance(reduct.attributes));
  return out + attrs + buf;
}

}  // namespace caid
