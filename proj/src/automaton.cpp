#include "caid/automaton.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

#include "caid/error.hpp"

namespace caid {

ReferenceAutomaton ReferenceAutomaton::elementary(int rule_number) {
  if (rule_number < 0 || rule_number > 255) {
    throw ParameterError("elementary rule number must be in [0, 255], got " + std::to_string(rule_number));
  }
  ReferenceAutomaton a(AutomatonKind::Elementary, Alphabet::binary());
  a.rule_ = rule_number;
  return a;
}

ReferenceAutomaton ReferenceAutomaton::nasch_deterministic(int v_max) {
  if (v_max < 1 || v_max > 9) throw ParameterError("v_max must be in [1, 9], got " + std::to_string(v_max));
  ReferenceAutomaton a(AutomatonKind::NaSchDeterministic, Alphabet::traffic(v_max));
  a.v_max_ = v_max;
  return a;
}

ReferenceAutomaton ReferenceAutomaton::nasch(int v_max, double braking) {
  if (v_max < 1 || v_max > 9) throw ParameterError("v_max must be in [1, 9], got " + std::to_string(v_max));
  if (!(braking >= 0.0 && braking <= 1.0)) throw ParameterError("braking probability must be in [0, 1]");
  ReferenceAutomaton a(AutomatonKind::NaSch, Alphabet::traffic(v_max));
  a.v_max_ = v_max;
  a.braking_ = braking;
  return a;
}

ReferenceAutomaton ReferenceAutomaton::life() { return ReferenceAutomaton(AutomatonKind::Life, Alphabet::binary()); }

namespace {

int parse_int(std::string_view s, std::string_view what) {
  std::string str(s);
  char* end = nullptr;
  const long v = std::strtol(str.c_str(), &end, 10);
  if (str.empty() || *end != '\0') throw ParameterError("invalid " + std::string(what) + ": '" + str + "'");
  return static_cast<int>(v);
}

double parse_double(std::string_view s, std::string_view what) {
  std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || *end != '\0') throw ParameterError("invalid " + std::string(what) + ": '" + str + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

ReferenceAutomaton ReferenceAutomaton::parse(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts[0] == "eca" && parts.size() == 2) return elementary(parse_int(parts[1], "rule number"));
  if (parts[0] == "nasch-d" && parts.size() == 2) return nasch_deterministic(parse_int(parts[1], "v_max"));
  if (parts[0] == "nasch" && parts.size() == 3) {
    return nasch(parse_int(parts[1], "v_max"), parse_double(parts[2], "braking probability"));
  }
  if (parts[0] == "life" && parts.size() == 1) return life();
  throw ParameterError("unknown automaton '" + std::string(text) +
                       "' (expected eca:N, nasch-d:VMAX, nasch:VMAX:P or life)");
}

int ReferenceAutomaton::interaction_radius() const noexcept {
  switch (kind_) {
    case AutomatonKind::Elementary:
    case AutomatonKind::Life:
      return 1;
    case AutomatonKind::NaSchDeterministic:
    case AutomatonKind::NaSch:
      return v_max_;
  }
  return 1;
}

std::string ReferenceAutomaton::name() const {
  switch (kind_) {
    case AutomatonKind::Elementary:
      return "eca:" + std::to_string(rule_);
    case AutomatonKind::NaSchDeterministic:
      return "nasch-d:" + std::to_string(v_max_);
    case AutomatonKind::NaSch: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "nasch:%d:%g", v_max_, braking_);
      return buf;
    }
    case AutomatonKind::Life:
      return "life";
  }
  return "?";
}

void ReferenceAutomaton::check_lattice(const Lattice& lattice) const {
  if (lattice.dims() != dims()) {
    throw AlphabetMismatch(name() + " needs a " + std::to_string(dims()) + "D lattice");
  }
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    if (!alphabet_.contains(lattice[i])) {
      throw AlphabetMismatch("cell " + std::to_string(i) + " holds state " + std::to_string(lattice[i]) +
                             " outside the alphabet of " + name());
    }
  }
}

Lattice ReferenceAutomaton::step(const Lattice& lattice, std::uint64_t seed) const {
  check_lattice(lattice);
  switch (kind_) {
    case AutomatonKind::Elementary:
      return step_elementary(lattice);
    case AutomatonKind::NaSchDeterministic:
    case AutomatonKind::NaSch:
      return step_traffic(lattice, seed);
    case AutomatonKind::Life:
      return step_life(lattice);
  }
  return lattice;
}

Lattice ReferenceAutomaton::step_elementary(const Lattice& lattice) const {
  Lattice next(lattice.shape(), State{0});
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const int pattern = 4 * lattice.at(i, {-1, 0}) + 2 * lattice[i] + lattice.at(i, {1, 0});
    next[i] = (rule_ >> pattern) & 1;
  }
  return next;
}

namespace {

/// Empty cells in front of each vehicle, measured to the next vehicle around the ring.
std::vector<std::size_t> vehicle_positions(const Lattice& lattice) {
  std::vector<std::size_t> occ;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    if (lattice[i] >= 0) occ.push_back(i);
  }
  return occ;
}

int gap_ahead(const std::vector<std::size_t>& occ, std::size_t k, std::size_t n) {
  if (occ.size() == 1) return static_cast<int>(n) - 1;
  const std::size_t here = occ[k];
  const std::size_t ahead = occ[(k + 1) % occ.size()];
  return static_cast<int>((ahead + n - here - 1) % n);
}

}  // namespace

Lattice ReferenceAutomaton::step_traffic(const Lattice& lattice, std::uint64_t seed) const {
  const std::size_t n = lattice.size();

  // Step II: every vehicle advances by its current velocity, never past the vehicle ahead.
  Lattice moved(lattice.shape(), State{-1});
  const auto occ = vehicle_positions(lattice);
  for (std::size_t k = 0; k < occ.size(); ++k) {
    const int advance = std::min(lattice[occ[k]], gap_ahead(occ, k, n));
    moved[(occ[k] + static_cast<std::size_t>(advance)) % n] = advance;
  }

  // Step I (and I-a): velocity for the next move from the gaps at the new positions.
  Lattice next(lattice.shape(), State{-1});
  const auto occ2 = vehicle_positions(moved);
  for (std::size_t k = 0; k < occ2.size(); ++k) {
    const std::size_t cell = occ2[k];
    int v = std::min({moved[cell] + 1, gap_ahead(occ2, k, n), v_max_});
    if (kind_ == AutomatonKind::NaSch && uniform01(seed, cell) < braking_) v = std::max(0, v - 1);
    next[cell] = v;
  }
  return next;
}

Lattice ReferenceAutomaton::step_life(const Lattice& lattice) const {
  Lattice next(lattice.shape(), State{0});
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    int live = 0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx != 0 || dy != 0) live += lattice.at(i, {dx, dy});
      }
    }
    next[i] = (live == 3 || (live == 2 && lattice[i] == 1)) ? 1 : 0;
  }
  return next;
}

State ReferenceAutomaton::central_update(const std::vector<std::pair<Offset, State>>& pattern) const {
  if (probabilistic()) throw ParameterError("central_update needs a deterministic automaton");
  int reach = 0;
  for (const auto& [o, s] : pattern) {
    if (dims() == 1 && o.dy != 0) throw AlphabetMismatch("2D offset in a 1D pattern");
    reach = std::max(reach, chebyshev(o));
  }
  const int extent = 2 * (reach + interaction_radius()) + 3;
  const Shape shape = dims() == 1 ? Shape::ring(extent) : Shape::torus(extent, extent);
  Lattice lattice(shape, alphabet_.quiescent());
  const std::size_t center = dims() == 1 ? static_cast<std::size_t>(extent / 2)
                                         : static_cast<std::size_t>(extent / 2) * static_cast<std::size_t>(extent) +
                                               static_cast<std::size_t>(extent / 2);
  for (const auto& [o, s] : pattern) lattice[lattice.neighbor(center, o)] = s;
  return step(lattice, 0)[center];
}

Lattice ReferenceAutomaton::random_lattice(Shape shape, double density, Rng& rng) const {
  if (!(density >= 0.0 && density <= 1.0)) throw ParameterError("density must be in [0, 1]");
  if (shape.dims != dims()) throw ParameterError(name() + " needs a " + std::to_string(dims()) + "D shape");
  const std::size_t n = shape.size();
  const auto k = static_cast<std::size_t>(std::llround(density * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_below(rng, n - i)]);

  const bool traffic = kind_ == AutomatonKind::NaSch || kind_ == AutomatonKind::NaSchDeterministic;
  Lattice lattice(shape, alphabet_.quiescent());
  for (std::size_t i = 0; i < k; ++i) {
    lattice[idx[i]] = traffic ? static_cast<State>(uniform_below(rng, static_cast<std::uint64_t>(v_max_) + 1)) : 1;
  }
  if (traffic) {
    const auto occ = vehicle_positions(lattice);
    for (std::size_t j = 0; j < occ.size(); ++j) lattice[occ[j]] = std::min(lattice[occ[j]], gap_ahead(occ, j, n));
  }
  return lattice;
}

Lattice patchwork_lattice(const ReferenceAutomaton& automaton, int width, int segment, double low, double high,
                          Rng& rng) {
  if (automaton.dims() != 1) throw ParameterError("patchwork lattices are one-dimensional");
  if (segment < 1 || width < segment || width % segment != 0) {
    throw ParameterError("width must be a positive multiple of the segment length");
  }
  if (!(low >= 0.0 && low <= high && high <= 1.0)) throw ParameterError("densities must satisfy 0 <= low <= high <= 1");
  std::vector<State> cells;
  cells.reserve(static_cast<std::size_t>(width));
  for (int s = 0; s < width / segment; ++s) {
    const double density = low + (high - low) * uniform01(rng);
    const Lattice part = automaton.random_lattice(Shape::ring(segment), density, rng);
    cells.insert(cells.end(), part.cells().begin(), part.cells().end());
  }
  return automaton.step(Lattice(Shape::ring(width), std::move(cells)), mix64(rng()));
}

Trace run_trace(const ReferenceAutomaton& automaton, Lattice initial, int steps, std::uint64_t seed) {
  if (steps < 1) throw ParameterError("run_trace needs at least one step");
  Trace trace;
  trace.alphabet = automaton.alphabet();
  trace.steps.reserve(static_cast<std::size_t>(steps) + 1);
  trace.steps.push_back(std::move(initial));
  for (int t = 0; t < steps; ++t) {
    trace.steps.push_back(automaton.step(trace.steps.back(), derive_seed(seed, static_cast<std::uint64_t>(t))));
  }
  return trace;
}

Lattice occupancy_view(const Lattice& lattice, State quiescent) {
  Lattice out(lattice.shape(), State{0});
  for (std::size_t i = 0; i < lattice.size(); ++i) out[i] = lattice[i] == quiescent ? 0 : 1;
  return out;
}

Trace occupancy_view(const Trace& trace) {
  Trace out;
  out.alphabet = Alphabet::binary();
  out.metadata = trace.metadata;
  const State q = trace.alphabet.quiescent();
  out.steps.reserve(trace.steps.size());
  for (const auto& l : trace.steps) out.steps.push_back(occupancy_view(l, q));
  return out;
}

}  // namespace caid
