#include "caid/lattice.hpp"

#include <algorithm>
#include <stdexcept>

namespace caid {

Alphabet::Alphabet(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
  std::sort(symbols_.begin(), symbols_.end(), [](const Symbol& a, const Symbol& b) { return a.code < b.code; });
  for (std::size_t i = 1; i < symbols_.size(); ++i) {
    if (symbols_[i].code == symbols_[i - 1].code) throw std::invalid_argument("alphabet: duplicate state code");
  }
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    for (std::size_t j = i + 1; j < symbols_.size(); ++j) {
      if (symbols_[i].glyph == symbols_[j].glyph) throw std::invalid_argument("alphabet: duplicate glyph");
    }
  }
}

Alphabet Alphabet::binary() { return Alphabet({{0, '.'}, {1, '#'}}); }

Alphabet Alphabet::traffic(int v_max) {
  std::vector<Symbol> s{{-1, '.'}};
  for (int v = 0; v <= v_max; ++v) s.push_back({v, static_cast<char>('0' + v)});
  return Alphabet(std::move(s));
}

Alphabet Alphabet::from_codes(std::vector<State> codes) {
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  if (codes == std::vector<State>{0, 1}) return binary();
  std::vector<Symbol> s;
  for (State c : codes) {
    char g = '?';
    if (c == -1) g = '.';
    else if (c >= 0 && c <= 9) g = static_cast<char>('0' + c);
    else if (c >= 10 && c < 36) g = static_cast<char>('a' + c - 10);
    else throw std::invalid_argument("alphabet: no default glyph for state " + std::to_string(c));
    s.push_back({c, g});
  }
  return Alphabet(std::move(s));
}

std::vector<State> Alphabet::codes() const {
  std::vector<State> out;
  out.reserve(symbols_.size());
  for (const auto& s : symbols_) out.push_back(s.code);
  return out;
}

bool Alphabet::contains(State s) const noexcept {
  return std::any_of(symbols_.begin(), symbols_.end(), [s](const Symbol& x) { return x.code == s; });
}

bool Alphabet::is_binary() const noexcept {
  return symbols_.size() == 2 && symbols_[0].code == 0 && symbols_[1].code == 1;
}

State Alphabet::quiescent() const {
  if (symbols_.empty()) throw std::logic_error("empty alphabet has no quiescent state");
  return symbols_.front().code;
}

char Alphabet::glyph(State s) const {
  for (const auto& x : symbols_) {
    if (x.code == s) return x.glyph;
  }
  throw std::out_of_range("state " + std::to_string(s) + " not in alphabet");
}

bool Alphabet::has_glyph(char c) const noexcept {
  return std::any_of(symbols_.begin(), symbols_.end(), [c](const Symbol& x) { return x.glyph == c; });
}

State Alphabet::code(char c) const {
  for (const auto& x : symbols_) {
    if (x.glyph == c) return x.code;
  }
  throw std::out_of_range(std::string("glyph '") + c + "' not in alphabet");
}

bool operator==(const Alphabet& a, const Alphabet& b) noexcept {
  if (a.symbols_.size() != b.symbols_.size()) return false;
  for (std::size_t i = 0; i < a.symbols_.size(); ++i) {
    if (a.symbols_[i].code != b.symbols_[i].code || a.symbols_[i].glyph != b.symbols_[i].glyph) return false;
  }
  return true;
}

Lattice::Lattice(Shape shape, State fill) : shape_(shape), cells_(shape.size(), fill) {
  if (shape.dims < 1 || shape.dims > 2 || shape.extents[0] < 1 || shape.extents[1] < 1 ||
      (shape.dims == 1 && shape.extents[1] != 1)) {
    throw std::invalid_argument("lattice: invalid shape");
  }
}

Lattice::Lattice(Shape shape, std::vector<State> cells) : Lattice(shape, State{0}) {
  if (cells.size() != shape.size()) throw std::invalid_argument("lattice: cell count does not match extents");
  cells_ = std::move(cells);
}

std::size_t Lattice::neighbor(std::size_t index, Offset offset) const noexcept {
  const int w = shape_.extents[0];
  const int h = shape_.extents[1];
  const int x = static_cast<int>(index % static_cast<std::size_t>(w));
  const int y = static_cast<int>(index / static_cast<std::size_t>(w));
  int nx = (x + offset.dx) % w;
  if (nx < 0) nx += w;
  int ny = (y + offset.dy) % h;
  if (ny < 0) ny += h;
  return static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx);
}

void Trace::validate() const {
  if (steps.empty()) throw std::invalid_argument("trace: no steps");
  const Shape& s = steps.front().shape();
  for (std::size_t t = 0; t < steps.size(); ++t) {
    if (!(steps[t].shape() == s)) throw std::invalid_argument("trace: step " + std::to_string(t) + " has different extents");
    for (State v : steps[t].cells()) {
      if (!alphabet.contains(v)) {
        throw std::invalid_argument("trace: step " + std::to_string(t) + " holds state " + std::to_string(v) +
                                    " outside the alphabet");
      }
    }
  }
}

std::size_t occupied_count(const Lattice& lattice, State quiescent) {
  return static_cast<std::size_t>(
      std::count_if(lattice.cells().begin(), lattice.cells().end(), [quiescent](State s) { return s != quiescent; }));
}

}  // namespace caid
