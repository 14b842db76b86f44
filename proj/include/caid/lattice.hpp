#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace caid {

/// Cell state code. Empty/dead is the alphabet minimum: -1 for traffic automata with velocities, 0 for binary ones.
using State = int;

/// Relative position of a cell with respect to a central cell. dy is 0 for 1D lattices.
struct Offset {
  int dx = 0;
  int dy = 0;

  friend constexpr auto operator<=>(const Offset& a, const Offset& b) noexcept {
    if (auto c = a.dy <=> b.dy; c != 0) return c;
    return a.dx <=> b.dx;
  }
  friend constexpr bool operator==(const Offset&, const Offset&) noexcept = default;
};

/// Chebyshev distance to the center.
constexpr int chebyshev(Offset o) noexcept {
  const int ax = o.dx < 0 ? -o.dx : o.dx;
  const int ay = o.dy < 0 ? -o.dy : o.dy;
  return ax > ay ? ax : ay;
}

struct Symbol {
  State code;
  char glyph;
};

/// Ordered set of cell states with their one-character rendering.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<Symbol> symbols);

  static Alphabet binary();                 // 0:'.', 1:'#'
  static Alphabet traffic(int v_max);       // -1:'.', 0..v_max:'0'..
  static Alphabet from_codes(std::vector<State> codes);

  const std::vector<Symbol>& symbols() const noexcept { return symbols_; }
  std::vector<State> codes() const;
  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  bool contains(State s) const noexcept;
  bool is_binary() const noexcept;
  State quiescent() const;  // smallest code
  char glyph(State s) const;
  bool has_glyph(char c) const noexcept;
  State code(char c) const;

  friend bool operator==(const Alphabet& a, const Alphabet& b) noexcept;

 private:
  std::vector<Symbol> symbols_;  // sorted by code
};

/// Periodic lattice extents. 1D lattices use extents[1] == 1.
struct Shape {
  int dims = 1;
  std::array<int, 2> extents{0, 1};

  static Shape ring(int width) { return Shape{1, {width, 1}}; }
  static Shape torus(int width, int height) { return Shape{2, {width, height}}; }

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(extents[0]) * static_cast<std::size_t>(extents[1]);
  }
  friend bool operator==(const Shape&, const Shape&) noexcept = default;
};

/// Dense periodic lattice (ring or torus). Cells are stored row-major: index = y * width + x.
class Lattice {
 public:
  Lattice() = default;
  Lattice(Shape shape, State fill);
  Lattice(Shape shape, std::vector<State> cells);

  const Shape& shape() const noexcept { return shape_; }
  int dims() const noexcept { return shape_.dims; }
  int width() const noexcept { return shape_.extents[0]; }
  int height() const noexcept { return shape_.extents[1]; }
  std::size_t size() const noexcept { return cells_.size(); }

  State operator[](std::size_t i) const noexcept { return cells_[i]; }
  State& operator[](std::size_t i) noexcept { return cells_[i]; }
  const std::vector<State>& cells() const noexcept { return cells_; }

  /// Index of the cell at `offset` from cell `index`, wrapping periodically.
  std::size_t neighbor(std::size_t index, Offset offset) const noexcept;
  State at(std::size_t index, Offset offset) const noexcept { return cells_[neighbor(index, offset)]; }

  friend bool operator==(const Lattice&, const Lattice&) noexcept = default;

 private:
  Shape shape_;
  std::vector<State> cells_;
};

/// Ordered sequence of lattices of one shape over one alphabet.
struct Trace {
  Alphabet alphabet;
  std::vector<Lattice> steps;
  /// Extra `key=value` header fields, preserved in order for byte-exact rewriting.
  std::vector<std::pair<std::string, std::string>> metadata;

  const Shape& shape() const { return steps.front().shape(); }
  /// Throws std::invalid_argument when steps disagree in shape or hold states outside the alphabet.
  void validate() const;
};

/// Number of cells whose state differs from the alphabet's quiescent code.
std::size_t occupied_count(const Lattice& lattice, State quiescent);

}  // namespace caid
