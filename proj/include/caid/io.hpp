#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "caid/lattice.hpp"
#include "caid/model.hpp"

namespace caid {

/// `0:.,1:#`
std::string format_alphabet(const Alphabet& alphabet);
Alphabet parse_alphabet(std::string_view text);

/// Trace text format:
///   ca-trace v1; dims=1; extents=50; alphabet=0:.,1:#
///   ..##..#...   (one line per time step; 2D steps are H lines of W glyphs separated by a blank line)
/// Extra `key=value` header fields are kept in Trace::metadata. Errors carry line/column positions.
Trace read_trace(std::istream& in);
Trace parse_trace(std::string_view text);
void write_trace(std::ostream& out, const Trace& trace);
std::string format_trace(const Trace& trace);

/// Default road length of one cell, in meters, when the header has no `cell_m` field.
inline constexpr double kDefaultCellLength = 7.0;

struct TimeSpaceDiagram {
  Trace trace;  // binary occupancy, metadata as read
  double cell_length_m = kDefaultCellLength;
};

/// Reads a 1D trace file and converts it to binary occupancy (quiescent -> 0, else 1); file metadata
/// and header stay untouched, so writing the trace of an occupancy file reproduces it byte for byte.
TimeSpaceDiagram parse_time_space_diagram(std::string_view text);

/// Model file: `ca-model v1`, `key=value` header lines, `rules`, then one rule per line.
void write_model(std::ostream& out, const IdentifiedModel& model);
IdentifiedModel read_model(std::istream& in);

}  // namespace caid
