#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "caid/lattice.hpp"

namespace caid {

/// A named attribute computed from the candidate window, e.g. "L" (live Moore neighbors).
struct Derived {
  std::string name;
  friend auto operator<=>(const Derived&, const Derived&) = default;
};

/// Condition attribute of a decision table: a cell at a relative offset, or a derived quantity.
/// Offsets order before derived attributes; offsets order row-major (dy, then dx).
class AttributeId {
 public:
  AttributeId(Offset offset) : value_(offset) {}  // NOLINT(google-explicit-constructor)
  AttributeId(Derived derived) : value_(std::move(derived)) {}  // NOLINT(google-explicit-constructor)

  static AttributeId cell(int dx, int dy = 0) { return AttributeId(Offset{dx, dy}); }
  static AttributeId derived(std::string name) { return AttributeId(Derived{std::move(name)}); }
  /// Parses "c[-1]", "c[+1,0]", or a derived name such as "L".
  static AttributeId parse(std::string_view text);

  bool is_offset() const noexcept { return std::holds_alternative<Offset>(value_); }
  Offset offset() const { return std::get<Offset>(value_); }
  const std::string& derived_name() const { return std::get<Derived>(value_).name; }

  /// "c[-1]" for 1D, "c[-1,+2]" for 2D offsets (dims picks the form), or the derived name.
  std::string to_string(int dims = 1) const;

  friend auto operator<=>(const AttributeId&, const AttributeId&) = default;
  friend bool operator==(const AttributeId&, const AttributeId&) = default;

 private:
  std::variant<Offset, Derived> value_;
};

/// The live-neighbor-count attribute name.
inline constexpr std::string_view kLiveNeighbors = "L";

struct Observation {
  std::vector<State> conditions;
  State decision = 0;
  std::uint64_t multiplicity = 1;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Condition attributes -> decision (central cell at t+1), rows carrying multiplicities.
struct DecisionTable {
  int dims = 1;
  std::vector<AttributeId> attributes;
  std::vector<Observation> rows;
  Alphabet alphabet;

  std::size_t attribute_count() const noexcept { return attributes.size(); }
  std::uint64_t total_multiplicity() const noexcept;
  /// Index of `attr` in `attributes`; throws UnknownAttribute.
  std::size_t index_of(const AttributeId& attr) const;
  std::optional<std::size_t> find(const AttributeId& attr) const noexcept;
  /// Sorted distinct decision values.
  std::vector<State> decisions() const;
  std::string attribute_name(std::size_t i) const { return attributes[i].to_string(dims); }

  friend bool operator==(const DecisionTable&, const DecisionTable&) = default;
};

enum class DerivedAttribute { LiveNeighborCount };

struct ExtractOptions {
  std::vector<DerivedAttribute> derived;
  std::optional<std::size_t> sample_limit;
  std::uint64_t seed = 0;
};

/// One observation per (cell, consecutive step pair) over a Chebyshev window of the given radius,
/// optionally subsampled uniformly without replacement to `sample_limit`. The result is aggregated.
DecisionTable extract_table(const Trace& trace, int window, const ExtractOptions& options = {});

/// Appends L = sum of the eight Moore radius-1 neighbor states (binary tables only).
DecisionTable add_live_neighbor_count(const DecisionTable& table);

/// Merges identical (conditions, decision) rows and sorts canonically.
DecisionTable aggregate(const DecisionTable& table);

/// Restricts conditions to `keep` (kept in table order) and aggregates.
DecisionTable project(const DecisionTable& table, const std::vector<AttributeId>& keep);

/// Tab-separated text: header `c[..]... decision mult`, one row per line.
void write_table(std::ostream& out, const DecisionTable& table);
DecisionTable read_table(std::istream& in);

}  // namespace caid
