#include "caid/decision_table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "caid/error.hpp"
#include "caid/random.hpp"

namespace caid {

namespace {

std::string signed_int(int v) { return v > 0 ? "+" + std::to_string(v) : std::to_string(v); }

bool parse_signed(std::string_view s, int& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

struct RowKeyHash {
  std::size_t operator()(const std::vector<State>& v) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (State s : v) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(s)));
    return static_cast<std::size_t>(h);
  }
};

/// Rows keyed by conditions with the decision appended.
using RowCounts = std::unordered_map<std::vector<State>, std::uint64_t, RowKeyHash>;

std::vector<Observation> canonical_rows(const RowCounts& counts) {
  std::vector<Observation> rows;
  rows.reserve(counts.size());
  for (const auto& [key, m] : counts) {
    Observation o;
    o.conditions.assign(key.begin(), key.end() - 1);
    o.decision = key.back();
    o.multiplicity = m;
    rows.push_back(std::move(o));
  }
  std::sort(rows.begin(), rows.end(), [](const Observation& a, const Observation& b) {
    if (a.conditions != b.conditions) return a.conditions < b.conditions;
    return a.decision < b.decision;
  });
  return rows;
}

void add_row(RowCounts& counts, std::vector<State> key, State decision, std::uint64_t m) {
  key.push_back(decision);
  counts[std::move(key)] += m;
}

}  // namespace

AttributeId AttributeId::parse(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 2) == "c[" && text.back() == ']') {
    const auto inner = text.substr(2, text.size() - 3);
    const auto comma = inner.find(',');
    int dx = 0;
    int dy = 0;
    if (comma == std::string_view::npos) {
      if (parse_signed(inner, dx)) return cell(dx);
    } else if (parse_signed(inner.substr(0, comma), dx) && parse_signed(inner.substr(comma + 1), dy)) {
      return cell(dx, dy);
    }
    throw UnknownAttribute("malformed cell attribute '" + std::string(text) + "'");
  }
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
      })) {
    throw UnknownAttribute("malformed attribute name '" + std::string(text) + "'");
  }
  return derived(std::string(text));
}

std::string AttributeId::to_string(int dims) const {
  if (!is_offset()) return derived_name();
  const Offset o = offset();
  if (dims == 1 && o.dy == 0) return "c[" + signed_int(o.dx) + "]";
  return "c[" + signed_int(o.dx) + "," + signed_int(o.dy) + "]";
}

std::uint64_t DecisionTable::total_multiplicity() const noexcept {
  std::uint64_t total = 0;
  for (const auto& r : rows) total += r.multiplicity;
  return total;
}

std::optional<std::size_t> DecisionTable::find(const AttributeId& attr) const noexcept {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i] == attr) return i;
  }
  return std::nullopt;
}

std::size_t DecisionTable::index_of(const AttributeId& attr) const {
  if (auto i = find(attr)) return *i;
  throw UnknownAttribute("attribute " + attr.to_string(dims) + " is not in the table");
}

std::vector<State> DecisionTable::decisions() const {
  std::vector<State> d;
  for (const auto& r : rows) d.push_back(r.decision);
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

DecisionTable extract_table(const Trace& trace, int window, const ExtractOptions& options) {
  if (trace.steps.size() < 2) throw std::invalid_argument("extract_table: trace needs at least 2 steps");
  if (window < 1) throw std::invalid_argument("extract_table: window radius must be >= 1");
  trace.validate();
  const Shape& shape = trace.shape();
  for (int d = 0; d < shape.dims; ++d) {
    if (2 * window + 1 > shape.extents[static_cast<std::size_t>(d)]) {
      throw std::invalid_argument("extract_table: window radius " + std::to_string(window) +
                                  " exceeds lattice extent " + std::to_string(shape.extents[static_cast<std::size_t>(d)]));
    }
  }

  DecisionTable table;
  table.dims = shape.dims;
  table.alphabet = trace.alphabet;
  std::vector<Offset> offsets;
  for (int dy = shape.dims == 2 ? -window : 0; dy <= (shape.dims == 2 ? window : 0); ++dy) {
    for (int dx = -window; dx <= window; ++dx) offsets.push_back({dx, dy});
  }
  for (const auto& o : offsets) table.attributes.emplace_back(o);

  const std::size_t cells = shape.size();
  const std::size_t total = (trace.steps.size() - 1) * cells;
  std::vector<std::size_t> picked;
  const bool subsample = options.sample_limit && *options.sample_limit < total;
  if (subsample) {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(options.seed);
    const std::size_t k = *options.sample_limit;
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_below(rng, total - i)]);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    picked = std::move(idx);
  }

  RowCounts counts;
  std::vector<State> key(offsets.size());
  auto observe = [&](std::size_t flat) {
    const std::size_t t = flat / cells;
    const std::size_t cell = flat % cells;
    const Lattice& now = trace.steps[t];
    for (std::size_t a = 0; a < offsets.size(); ++a) key[a] = now.at(cell, offsets[a]);
    add_row(counts, key, trace.steps[t + 1][cell], 1);
  };
  if (subsample) {
    for (std::size_t flat : picked) observe(flat);
  } else {
    for (std::size_t flat = 0; flat < total; ++flat) observe(flat);
  }
  table.rows = canonical_rows(counts);

  for (auto d : options.derived) {
    if (d == DerivedAttribute::LiveNeighborCount) table = add_live_neighbor_count(table);
  }
  return table;
}

DecisionTable add_live_neighbor_count(const DecisionTable& table) {
  if (!table.alphabet.is_binary()) throw std::invalid_argument("live neighbor count needs a binary alphabet");
  if (table.find(AttributeId::derived(std::string(kLiveNeighbors)))) {
    throw std::invalid_argument("table already has attribute L");
  }
  std::vector<std::size_t> moore;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      auto i = table.find(AttributeId::cell(dx, dy));
      if (!i) {
        throw UnknownAttribute("live neighbor count needs attribute " + AttributeId::cell(dx, dy).to_string(2));
      }
      moore.push_back(*i);
    }
  }
  DecisionTable out = table;
  out.attributes.push_back(AttributeId::derived(std::string(kLiveNeighbors)));
  for (auto& row : out.rows) {
    State live = 0;
    for (std::size_t i : moore) live += row.conditions[i];
    row.conditions.push_back(live);
  }
  return aggregate(out);
}

DecisionTable aggregate(const DecisionTable& table) {
  RowCounts counts;
  for (const auto& r : table.rows) add_row(counts, r.conditions, r.decision, r.multiplicity);
  DecisionTable out;
  out.dims = table.dims;
  out.attributes = table.attributes;
  out.alphabet = table.alphabet;
  out.rows = canonical_rows(counts);
  return out;
}

DecisionTable project(const DecisionTable& table, const std::vector<AttributeId>& keep) {
  std::vector<bool> selected(table.attributes.size(), false);
  for (const auto& a : keep) selected[table.index_of(a)] = true;
  DecisionTable out;
  out.dims = table.dims;
  out.alphabet = table.alphabet;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < table.attributes.size(); ++i) {
    if (selected[i]) {
      idx.push_back(i);
      out.attributes.push_back(table.attributes[i]);
    }
  }
  RowCounts counts;
  std::vector<State> key(idx.size());
  for (const auto& r : table.rows) {
    for (std::size_t k = 0; k < idx.size(); ++k) key[k] = r.conditions[idx[k]];
    add_row(counts, key, r.decision, r.multiplicity);
  }
  out.rows = canonical_rows(counts);
  return out;
}

void write_table(std::ostream& out, const DecisionTable& table) {
  for (std::size_t i = 0; i < table.attributes.size(); ++i) out << table.attribute_name(i) << '\t';
  out << "decision\tmult\n";
  for (const auto& r : table.rows) {
    for (State v : r.conditions) out << v << '\t';
    out << r.decision << '\t' << r.multiplicity << '\n';
  }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) out.push_back(field);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

}  // namespace

DecisionTable read_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, 0, "missing header");
  const auto header = split_tabs(line);
  if (header.size() < 2 || header[header.size() - 2] != "decision" || header.back() != "mult") {
    throw ParseError(1, 0, "header must end with 'decision<TAB>mult'");
  }
  DecisionTable table;
  for (std::size_t i = 0; i + 2 < header.size(); ++i) {
    try {
      table.attributes.push_back(AttributeId::parse(header[i]));
    } catch (const UnknownAttribute& e) {
      throw ParseError(1, i + 1, e.what());
    }
    if (header[i].find(',') != std::string::npos) table.dims = 2;
  }
  std::vector<State> codes;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw ParseError(lineno, 0, "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size()));
    }
    Observation o;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      long long v = 0;
      const auto* end = fields[i].data() + fields[i].size();
      const auto res = std::from_chars(fields[i].data(), end, v);
      if (res.ec != std::errc{} || res.ptr != end) throw ParseError(lineno, i + 1, "not an integer: '" + fields[i] + "'");
      if (i + 2 < fields.size()) {
        o.conditions.push_back(static_cast<State>(v));
        if (table.attributes[i].is_offset()) codes.push_back(static_cast<State>(v));
      } else if (i + 2 == fields.size()) {
        o.decision = static_cast<State>(v);
        codes.push_back(o.decision);
      } else {
        if (v < 1) throw ParseError(lineno, i + 1, "multiplicity must be >= 1");
        o.multiplicity = static_cast<std::uint64_t>(v);
      }
    }
    table.rows.push_back(std::move(o));
  }
  table.alphabet = Alphabet::from_codes(codes);
  return aggregate(table);
}

}  // namespace caid
