#include "caid/io.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "caid/automaton.hpp"
#include "caid/error.hpp"

namespace caid {

namespace {

constexpr std::string_view kTraceMagic = "ca-trace v1";
constexpr std::string_view kModelMagic = "ca-model v1";

std::vector<std::string_view> split(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

template <class T>
bool to_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return !s.empty() && res.ec == std::errc{} && res.ptr == end;
}

std::string join_offsets(const std::vector<Offset>& offsets, int dims) {
  std::string s;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (i) s += ',';
    s += AttributeId(offsets[i]).to_string(dims);
  }
  return s;
}

/// Splits "c[-1],c[0],c[+1,2]" on the commas between attributes.
std::vector<std::string_view> split_attributes(std::string_view s) {
  std::vector<std::string_view> out;
  if (s.empty()) return out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '[') ++depth;
    else if (s[i] == ']') --depth;
    else if (s[i] == ',' && depth == 0) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

std::vector<Offset> parse_offsets(std::string_view s, std::size_t line) {
  std::vector<Offset> out;
  for (auto item : split_attributes(s)) {
    try {
      const auto a = AttributeId::parse(item);
      if (!a.is_offset()) throw ParseError(line, 0, "expected a cell offset, got '" + std::string(item) + "'");
      out.push_back(a.offset());
    } catch (const UnknownAttribute& e) {
      throw ParseError(line, 0, e.what());
    }
  }
  return out;
}

std::string format_detector(const ErrorDetector& d, int dims) {
  std::string s;
  for (std::size_t i = 0; i < d.premise.size(); ++i) {
    if (i) s += " & ";
    s += AttributeId(d.premise[i].first).to_string(dims) + "=" + std::to_string(d.premise[i].second);
  }
  return s + " | " + join_offsets(d.check_offsets, dims) + " | " + std::to_string(d.target) + " | " +
         join_offsets(d.repair_window, dims);
}

ErrorDetector parse_detector(std::string_view s, std::size_t line) {
  const auto parts = split(s, " | ");
  if (parts.size() != 4) throw ParseError(line, 0, "detector needs 4 '|'-separated fields");
  ErrorDetector d;
  for (auto item : split(parts[0], " & ")) {
    const auto eq = item.rfind('=');
    State v = 0;
    if (eq == std::string_view::npos || !to_number(item.substr(eq + 1), v)) {
      throw ParseError(line, 0, "malformed detector premise '" + std::string(item) + "'");
    }
    const auto offs = parse_offsets(item.substr(0, eq), line);
    if (offs.size() != 1) throw ParseError(line, 0, "malformed detector premise '" + std::string(item) + "'");
    d.premise.emplace_back(offs.front(), v);
  }
  d.check_offsets = parse_offsets(parts[1], line);
  if (!to_number(parts[2], d.target)) throw ParseError(line, 0, "malformed detector target");
  d.repair_window = parse_offsets(parts[3], line);
  try {
    d.validate();
  } catch (const ParameterError& e) {
    throw ParseError(line, 0, e.what());
  }
  return d;
}

}  // namespace

std::string format_alphabet(const Alphabet& alphabet) {
  std::string s;
  for (std::size_t i = 0; i < alphabet.symbols().size(); ++i) {
    if (i) s += ',';
    s += std::to_string(alphabet.symbols()[i].code) + ":" + alphabet.symbols()[i].glyph;
  }
  return s;
}

Alphabet parse_alphabet(std::string_view text) {
  std::vector<Symbol> symbols;
  for (auto item : split(text, ",")) {
    const auto colon = item.rfind(':');
    State code = 0;
    if (colon == std::string_view::npos || colon + 2 != item.size() || !to_number(item.substr(0, colon), code)) {
      throw std::invalid_argument("malformed alphabet entry '" + std::string(item) + "'");
    }
    symbols.push_back({code, item.back()});
  }
  return Alphabet(std::move(symbols));
}

Trace read_trace(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError(1, 0, "missing header");
  const auto fields = split(header, "; ");
  if (fields.empty() || fields[0] != kTraceMagic) throw ParseError(1, 1, "missing 'ca-trace v1' header");

  Trace trace;
  int dims = 0;
  std::vector<int> extents;
  bool have_alphabet = false;
  std::size_t col = fields[0].size() + 3;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    const auto f = fields[i];
    const auto eq = f.find('=');
    if (eq == std::string_view::npos) throw ParseError(1, col, "header field without '='");
    const auto key = f.substr(0, eq);
    const auto value = f.substr(eq + 1);
    if (key == "dims" && i == 1) {
      if (!to_number(value, dims) || (dims != 1 && dims != 2)) throw ParseError(1, col + eq + 1, "dims must be 1 or 2");
    } else if (key == "extents" && i == 2) {
      for (auto e : split(value, ",")) {
        int v = 0;
        if (!to_number(e, v) || v < 1) throw ParseError(1, col + eq + 1, "extents must be positive integers");
        extents.push_back(v);
      }
      if (extents.size() != static_cast<std::size_t>(dims)) {
        throw ParseError(1, col + eq + 1, "extents must list one value per dimension");
      }
    } else if (key == "alphabet" && i == 3) {
      try {
        trace.alphabet = parse_alphabet(value);
      } catch (const std::invalid_argument& e) {
        throw ParseError(1, col + eq + 1, e.what());
      }
      have_alphabet = true;
    } else if (i >= 4) {
      trace.metadata.emplace_back(std::string(key), std::string(value));
    } else {
      throw ParseError(1, col, "expected header fields dims, extents, alphabet in that order");
    }
    col += f.size() + 2;
  }
  if (!have_alphabet) throw ParseError(1, 0, "header needs dims, extents and alphabet");

  const Shape shape = dims == 1 ? Shape::ring(extents[0]) : Shape::torus(extents[0], extents[1]);
  const auto width = static_cast<std::size_t>(shape.extents[0]);
  const auto height = static_cast<std::size_t>(shape.extents[1]);
  std::string line;
  std::size_t lineno = 1;
  std::vector<State> cells;
  std::size_t rows_in_block = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (dims == 2 && rows_in_block == 0 && line.empty() && !trace.steps.empty()) continue;
    if (line.size() != width) {
      throw ParseError(lineno, std::min(line.size(), width) + 1,
                       "row has " + std::to_string(line.size()) + " cells, expected " + std::to_string(width));
    }
    for (std::size_t x = 0; x < width; ++x) {
      if (!trace.alphabet.has_glyph(line[x])) {
        throw ParseError(lineno, x + 1, std::string("undeclared character '") + line[x] + "'");
      }
      cells.push_back(trace.alphabet.code(line[x]));
    }
    if (++rows_in_block == height) {
      trace.steps.emplace_back(shape, std::move(cells));
      cells.clear();
      rows_in_block = 0;
    }
  }
  if (rows_in_block != 0) throw ParseError(lineno + 1, 0, "incomplete 2D block at end of file");
  if (trace.steps.empty()) throw ParseError(lineno + 1, 0, "trace has no time steps");
  return trace;
}

Trace parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_trace(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
  trace.validate();
  const Shape& shape = trace.shape();
  out << kTraceMagic << "; dims=" << shape.dims << "; extents=" << shape.extents[0];
  if (shape.dims == 2) out << ',' << shape.extents[1];
  out << "; alphabet=" << format_alphabet(trace.alphabet);
  for (const auto& [k, v] : trace.metadata) out << "; " << k << '=' << v;
  out << '\n';
  const auto width = static_cast<std::size_t>(shape.extents[0]);
  std::string row(width, ' ');
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    if (shape.dims == 2 && t > 0) out << '\n';
    const auto& lat = trace.steps[t];
    for (std::size_t y = 0; y < static_cast<std::size_t>(shape.extents[1]); ++y) {
      for (std::size_t x = 0; x < width; ++x) row[x] = trace.alphabet.glyph(lat[y * width + x]);
      out << row << '\n';
    }
  }
}

std::string format_trace(const Trace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

TimeSpaceDiagram parse_time_space_diagram(std::string_view text) {
  Trace raw = parse_trace(text);
  if (raw.shape().dims != 1) throw ParseError(1, 0, "time-space diagrams are one-dimensional");
  TimeSpaceDiagram d;
  for (const auto& [k, v] : raw.metadata) {
    if (k == "cell_m") {
      try {
        std::size_t used = 0;
        d.cell_length_m = std::stod(v, &used);
        if (used != v.size() || !(d.cell_length_m > 0)) throw std::invalid_argument("bad");
      } catch (const std::exception&) {
        throw ParseError(1, 0, "cell_m must be a positive number");
      }
    }
  }
  if (raw.alphabet.is_binary()) {
    d.trace = std::move(raw);
  } else {
    d.trace = occupancy_view(raw);
  }
  return d;
}

void write_model(std::ostream& out, const IdentifiedModel& model) {
  out << kModelMagic << '\n';
  out << "dims=" << model.dims << '\n';
  out << "alphabet=" << format_alphabet(model.alphabet) << '\n';
  out << "mode=" << to_string(model.mode) << '\n';
  out << "neighborhood=" << join_offsets(model.neighborhood.offsets, model.dims) << '\n';
  out << "derived=";
  for (std::size_t i = 0; i < model.neighborhood.derived.size(); ++i) {
    out << (i ? "," : "") << model.neighborhood.derived[i];
  }
  out << '\n';
  for (const auto& d : model.detectors) out << "detector=" << format_detector(d, model.dims) << '\n';
  for (const auto& [k, v] : model.provenance) out << "provenance." << k << '=' << v << '\n';
  out << "rules\n";
  write_rules(out, RuleSet{model.rules, model.probabilistic_rules}, model.dims);
}

IdentifiedModel read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kModelMagic) throw ParseError(1, 1, "missing 'ca-model v1' header");
  IdentifiedModel model;
  std::size_t lineno = 1;
  bool body = false;
  std::vector<AttributeId> attrs;
  while (std::getline(in, line)) {
    ++lineno;
    if (line == "rules") {
      body = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, 0, "expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string_view value = std::string_view(line).substr(eq + 1);
    try {
      if (key == "dims") {
        if (!to_number(value, model.dims) || (model.dims != 1 && model.dims != 2)) {
          throw ParseError(lineno, eq + 2, "dims must be 1 or 2");
        }
      } else if (key == "alphabet") {
        model.alphabet = parse_alphabet(value);
      } else if (key == "mode") {
        model.mode = parse_mode(value);
      } else if (key == "neighborhood") {
        for (const auto& o : parse_offsets(value, lineno)) attrs.emplace_back(o);
      } else if (key == "derived") {
        if (!value.empty()) {
          for (auto d : split(value, ",")) attrs.push_back(AttributeId::derived(std::string(d)));
        }
      } else if (key == "detector") {
        model.detectors.push_back(parse_detector(value, lineno));
      } else if (key.rfind("provenance.", 0) == 0) {
        model.provenance.emplace_back(key.substr(11), std::string(value));
      } else {
        throw ParseError(lineno, 1, "unknown model field '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, eq + 2, e.what());
    }
  }
  if (!body) throw ParseError(lineno + 1, 0, "missing 'rules' section");
  model.neighborhood = neighborhood_of(attrs);
  std::ostringstream rest;
  rest << in.rdbuf();
  std::istringstream rule_text(rest.str());
  RuleSet rules;
  try {
    rules = parse_rules(rule_text);
  } catch (const ParseError& e) {
    throw ParseError(lineno + e.line(), e.column(), e.message());
  }
  model.rules = std::move(rules.deterministic);
  model.probabilistic_rules = std::move(rules.probabilistic);
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, 0, std::string("invalid model: ") + e.what());
  }
  return model;
}

}  // namespace caid
