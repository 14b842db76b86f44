#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "caid/lattice.hpp"
#include "caid/random.hpp"

namespace caid {

enum class AutomatonKind { Elementary, NaSchDeterministic, NaSch, Life };

/// The reference automata used to generate training traces and to check identified models.
///
/// Traffic automata store the velocity a vehicle will travel with on its next move, so a step first
/// moves every vehicle by its state and then recomputes its velocity from the new gap:
///   v <- min(v + 1, gap, v_max), and for NaSch additionally v <- max(0, v - 1) when xi < p.
/// Under this encoding the next state of a cell depends on the five cells i-2..i+2 for v_max = 2.
class ReferenceAutomaton {
 public:
  static ReferenceAutomaton elementary(int rule_number);
  static ReferenceAutomaton nasch_deterministic(int v_max);
  static ReferenceAutomaton nasch(int v_max, double braking);
  static ReferenceAutomaton life();

  /// Parses "eca:184", "nasch-d:2", "nasch:1:0.2" or "life".
  static ReferenceAutomaton parse(std::string_view text);

  AutomatonKind kind() const noexcept { return kind_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  int dims() const noexcept { return kind_ == AutomatonKind::Life ? 2 : 1; }
  bool probabilistic() const noexcept { return kind_ == AutomatonKind::NaSch; }
  int rule_number() const noexcept { return rule_; }
  int v_max() const noexcept { return v_max_; }
  double braking() const noexcept { return braking_; }

  /// Chebyshev radius of the cells that can influence the next state of a central cell.
  int interaction_radius() const noexcept;
  std::string name() const;

  /// One synchronous update. Deterministic kinds ignore `seed`.
  Lattice step(const Lattice& lattice, std::uint64_t seed) const;

  /// Next state of the central cell for a finite neighborhood pattern, computed by embedding the pattern
  /// in a quiescent lattice large enough that wrap-around cannot reach the center. Deterministic kinds only.
  State central_update(const std::vector<std::pair<Offset, State>>& pattern) const;

  /// Random initial lattice at the given occupancy (non-quiescent fraction). Traffic vehicles get
  /// velocities in [0, v_max] capped by their gap.
  Lattice random_lattice(Shape shape, double density, Rng& rng) const;

 private:
  ReferenceAutomaton(AutomatonKind kind, Alphabet alphabet) : kind_(kind), alphabet_(std::move(alphabet)) {}

  void check_lattice(const Lattice& lattice) const;
  Lattice step_elementary(const Lattice& lattice) const;
  Lattice step_traffic(const Lattice& lattice, std::uint64_t seed) const;
  Lattice step_life(const Lattice& lattice) const;

  AutomatonKind kind_;
  Alphabet alphabet_;
  int rule_ = 0;
  int v_max_ = 0;
  double braking_ = 0.0;
};

/// 1D lattice made of `segment`-cell stretches, each at a density drawn uniformly from [low, high],
/// advanced by one reference step so that traffic states are reachable ones.
Lattice patchwork_lattice(const ReferenceAutomaton& automaton, int width, int segment, double low, double high,
                          Rng& rng);

/// Runs `steps` updates; step t uses derive_seed(seed, t). Result has steps + 1 lattices.
Trace run_trace(const ReferenceAutomaton& automaton, Lattice initial, int steps, std::uint64_t seed);

/// Binary occupancy: quiescent -> 0, anything else -> 1.
Lattice occupancy_view(const Lattice& lattice, State quiescent);
Trace occupancy_view(const Trace& trace);

}  // namespace caid
