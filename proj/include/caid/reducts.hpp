#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caid/decision_table.hpp"

namespace caid {

/// Bit i set <=> table attribute i selected. Tables are limited to 64 condition attributes.
using AttrMask = std::uint64_t;

struct Reduct {
  std::vector<AttributeId> attributes;  // in table order
  double stability = 1.0;

  std::size_t size() const noexcept { return attributes.size(); }
  friend bool operator==(const Reduct&, const Reduct&) = default;
};

/// Spatial part of a reduct: derived attributes are carried along by name but contribute no offsets.
struct Neighborhood {
  std::vector<Offset> offsets;  // sorted
  std::vector<std::string> derived;
  double avg_distance = 0.0;

  friend bool operator==(const Neighborhood&, const Neighborhood&) = default;
};

/// Mean Chebyshev distance of the offset attributes to the center (0 when there are none).
double average_distance(const std::vector<AttributeId>& attrs);

AttrMask mask_of(const DecisionTable& table, const std::vector<AttributeId>& attrs);
std::vector<AttributeId> attributes_of(const DecisionTable& table, AttrMask mask);

/// True iff every pair of rows with different decisions that is discernible on all attributes
/// is also discernible on `attrs`. Conflicting rows (same full conditions) never count against it.
bool decision_consistent(const DecisionTable& table, const std::vector<AttributeId>& attrs);

/// All minimal decision-consistent attribute subsets of size <= max_size (default: no cap),
/// sorted by (size, avg distance, attribute order). Throws NoReductFound if none fits the cap.
std::vector<Reduct> exhaustive_reducts(const DecisionTable& table, std::optional<std::size_t> max_size = std::nullopt);

/// Exhaustive reducts of the minimum size only.
std::vector<Reduct> shortest_reducts(const DecisionTable& table);

struct DynamicReductOptions {
  std::size_t n_subtables = 16;
  double fraction = 0.9;
  double stability_threshold = 0.5;
  std::uint64_t seed = 0;
  /// Largest candidate size; unset means minimum reduct size + 1.
  std::optional<std::size_t> max_size;
};

/// Reducts of the full table scored by the fraction of random subtables (drawn by multiplicity, without
/// replacement) in which they are also reducts. Sorted by (stability desc, size, avg distance, order).
std::vector<Reduct> dynamic_reducts(const DecisionTable& table, const DynamicReductOptions& options = {});

/// Preserved decision-discernible pairs over all decision-discernible pairs of the full table,
/// weighting each pair by the product of row multiplicities. 1.0 when there are no such pairs.
double consistency_ratio(const DecisionTable& table, const std::vector<AttributeId>& attrs);

/// Replaces each row's decision by the most frequent decision among rows with the same full
/// conditions (ties to the smaller value), then aggregates.
DecisionTable majority_decision_table(const DecisionTable& table);

struct ShortenOptions {
  /// Evaluate the consistency ratio on majority_decision_table(table) instead of the raw table.
  bool majority_decisions = true;
};

/// Greedy worst-first removal while the consistency ratio stays >= min_consistency. The attribute
/// removed next is the one losing the fewest pairs; ties go to the farther attribute, then the earlier one
/// in table order.
std::vector<AttributeId> shorten(const DecisionTable& table, const std::vector<AttributeId>& reduct,
                                 double min_consistency, const ShortenOptions& options = {});

/// Shortest reduct, then lowest average distance, then attribute order.
Neighborhood select_neighborhood(const std::vector<Reduct>& reducts);
Neighborhood neighborhood_of(const std::vector<AttributeId>& attrs);

/// `reduct size=K stability=S attrs=[c[-1],c[0],c[+1]] avg_dist=D`
std::string format_reduct(const Reduct& reduct, int dims);

}  // namespace caid
