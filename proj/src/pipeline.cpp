#include "caid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "caid/error.hpp"
#include "caid/random.hpp"

namespace caid {

namespace {

std::string fixed(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pattern_text(const std::vector<AttributeId>& attrs, const std::vector<State>& values, int dims) {
  std::string s;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i) s += ',';
    s += attrs[i].to_string(dims) + "=" + std::to_string(values[i]);
  }
  return s.empty() ? "true" : s;
}

std::string outcome_text(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(outcomes[i].value) + ":" + fixed(outcomes[i].probability);
  }
  return s;
}

std::string derived_text(const std::vector<DerivedAttribute>& derived) {
  std::string s;
  for (std::size_t i = 0; i < derived.size(); ++i) {
    if (i) s += ',';
    if (derived[i] == DerivedAttribute::LiveNeighborCount) s += kLiveNeighbors;
  }
  return s;
}

std::vector<AttributeId> neighborhood_attributes(const Neighborhood& n) {
  std::vector<AttributeId> attrs;
  for (const auto& o : n.offsets) attrs.emplace_back(o);
  for (const auto& d : n.derived) attrs.push_back(AttributeId::derived(d));
  return attrs;
}

/// Offsets a reference automaton's next central state can depend on.
std::vector<Offset> reference_hull(const ReferenceAutomaton& reference) {
  const int r = reference.interaction_radius();
  std::vector<Offset> out;
  const int ry = reference.dims() == 2 ? r : 0;
  for (int dy = -ry; dy <= ry; ++dy) {
    for (int dx = -r; dx <= r; ++dx) out.push_back({dx, dy});
  }
  return out;
}

Lattice embed(const std::vector<Offset>& offsets, const std::vector<State>& values, int dims, State fill) {
  int reach = 1;
  for (const auto& o : offsets) reach = std::max(reach, chebyshev(o));
  const int extent = 2 * reach + 3;
  Lattice lat(dims == 1 ? Shape::ring(extent) : Shape::torus(extent, extent), fill);
  const std::size_t center = dims == 1 ? static_cast<std::size_t>(extent / 2)
                                       : static_cast<std::size_t>(extent / 2) * static_cast<std::size_t>(extent) +
                                             static_cast<std::size_t>(extent / 2);
  for (std::size_t i = 0; i < offsets.size(); ++i) lat[lat.neighbor(center, offsets[i])] = values[i];
  return lat;
}

std::size_t embed_center(const Lattice& lat) {
  const auto w = static_cast<std::size_t>(lat.width());
  return lat.dims() == 1 ? w / 2 : (static_cast<std::size_t>(lat.height()) / 2) * w + w / 2;
}

Lattice random_occupancy(Shape shape, double density, Rng& rng) {
  const std::size_t n = shape.size();
  const auto k = static_cast<std::size_t>(std::llround(density * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_below(rng, n - i)]);
  Lattice lat(shape, 0);
  for (std::size_t i = 0; i < k; ++i) lat[idx[i]] = 1;
  return lat;
}

}  // namespace

std::string to_string(ReductAlgorithm algo) { return algo == ReductAlgorithm::Exhaustive ? "exhaustive" : "dynamic"; }
std::string to_string(Induction induction) { return induction == Induction::Lem2 ? "lem2" : "exhaustive"; }

ReductAlgorithm parse_reduct_algorithm(std::string_view text) {
  if (text == "exhaustive") return ReductAlgorithm::Exhaustive;
  if (text == "dynamic") return ReductAlgorithm::Dynamic;
  throw ParameterError("unknown reduct algorithm '" + std::string(text) + "'");
}

Induction parse_induction(std::string_view text) {
  if (text == "lem2") return Induction::Lem2;
  if (text == "exhaustive") return Induction::Exhaustive;
  throw ParameterError("unknown induction method '" + std::string(text) + "'");
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "text") return ReportFormat::Text;
  if (text == "machine-readable") return ReportFormat::MachineReadable;
  throw ParameterError("unknown report format '" + std::string(text) + "'");
}

std::vector<std::pair<std::string, std::string>> provenance_of(const IdentifyConfig& c) {
  return {
      {"window", std::to_string(c.window)},
      {"mode", to_string(c.mode)},
      {"reduct_algo", to_string(c.reduct_algo)},
      {"shorten", c.shorten ? fixed(*c.shorten, 17) : "none"},
      {"induction", to_string(c.induction)},
      {"derived", derived_text(c.derived)},
      {"sample_limit", c.sample_limit ? std::to_string(*c.sample_limit) : "none"},
      {"seed", std::to_string(c.seed)},
      {"n_subtables", std::to_string(c.n_subtables)},
      {"subtable_fraction", fixed(c.subtable_fraction, 17)},
      {"stability_threshold", fixed(c.stability_threshold, 17)},
  };
}

IdentifyConfig config_from_provenance(const std::vector<std::pair<std::string, std::string>>& provenance) {
  IdentifyConfig c;
  for (const auto& [k, v] : provenance) {
    try {
      if (k == "window") c.window = std::stoi(v);
      else if (k == "mode") c.mode = parse_mode(v);
      else if (k == "reduct_algo") c.reduct_algo = parse_reduct_algorithm(v);
      else if (k == "shorten") c.shorten = v == "none" ? std::nullopt : std::optional<double>(std::stod(v));
      else if (k == "induction") c.induction = parse_induction(v);
      else if (k == "derived") {
        c.derived.clear();
        if (v == kLiveNeighbors) c.derived.push_back(DerivedAttribute::LiveNeighborCount);
        else if (!v.empty()) throw ParameterError("unknown derived attribute '" + v + "'");
      } else if (k == "sample_limit") {
        c.sample_limit = v == "none" ? std::nullopt : std::optional<std::size_t>(std::stoull(v));
      } else if (k == "seed") c.seed = std::stoull(v);
      else if (k == "n_subtables") c.n_subtables = std::stoull(v);
      else if (k == "subtable_fraction") c.subtable_fraction = std::stod(v);
      else if (k == "stability_threshold") c.stability_threshold = std::stod(v);
    } catch (const std::logic_error&) {
      throw ParameterError("malformed provenance entry " + k + "=" + v);
    }
  }
  return c;
}

IdentifiedModel identify(const Trace& trace, const IdentifyConfig& config, IdentifyArtifacts* artifacts) {
  if (config.window < 1) throw ParameterError("window radius must be >= 1");
  IdentifyArtifacts local;
  IdentifyArtifacts& a = artifacts ? *artifacts : local;

  a.table = extract_table(trace, config.window, ExtractOptions{config.derived, config.sample_limit, config.seed});

  Neighborhood chosen;
  if (config.reduct_algo == ReductAlgorithm::Exhaustive) {
    a.reducts = shortest_reducts(a.table);
    chosen = select_neighborhood(a.reducts);
  } else {
    DynamicReductOptions opt;
    opt.n_subtables = config.n_subtables;
    opt.fraction = config.subtable_fraction;
    opt.stability_threshold = config.stability_threshold;
    opt.seed = derive_seed(config.seed, 1);
    a.reducts = dynamic_reducts(a.table, opt);
    std::vector<Reduct> most_stable;
    for (const auto& r : a.reducts) {
      if (r.stability == a.reducts.front().stability) most_stable.push_back(r);
    }
    chosen = select_neighborhood(most_stable);
  }
  a.selected = neighborhood_attributes(chosen);
  if (config.shorten) {
    a.selected = shorten(a.table, a.selected, *config.shorten);
    chosen = neighborhood_of(a.selected);
    a.selected = neighborhood_attributes(chosen);
  }
  a.projected = project(a.table, a.selected);

  IdentifiedModel model;
  model.alphabet = trace.alphabet;
  model.dims = trace.shape().dims;
  model.neighborhood = chosen;
  model.mode = config.mode;
  if (config.mode == ModelMode::Deterministic) {
    auto rules = config.induction == Induction::Lem2 ? lem2(a.projected) : exhaustive_rules(a.projected);
    model.rules = prioritize(std::move(rules), a.projected);
  } else {
    model.probabilistic_rules = merge_uncertain(a.projected);
  }

  model.provenance = provenance_of(config);
  model.provenance.emplace_back("table.rows", std::to_string(a.table.rows.size()));
  model.provenance.emplace_back("table.observations", std::to_string(a.table.total_multiplicity()));
  model.provenance.emplace_back("table.attributes", std::to_string(a.table.attributes.size()));
  model.provenance.emplace_back("reducts.count", std::to_string(a.reducts.size()));
  model.provenance.emplace_back("reducts.first", format_reduct(a.reducts.front(), model.dims));
  std::string selected;
  for (std::size_t i = 0; i < a.selected.size(); ++i) selected += (i ? "," : "") + a.selected[i].to_string(model.dims);
  model.provenance.emplace_back("neighborhood", selected);
  model.provenance.emplace_back(
      "rules.count", std::to_string(model.mode == ModelMode::Deterministic ? model.rules.size()
                                                                           : model.probabilistic_rules.size()));
  model.validate();
  return model;
}

VerificationReport verify_deterministic(const IdentifiedModel& model, const ReferenceAutomaton& reference,
                                        const Trace* reachable) {
  if (model.mode != ModelMode::Deterministic) throw std::invalid_argument("verify_deterministic needs a deterministic model");
  if (reference.probabilistic()) throw std::invalid_argument("verify_deterministic needs a deterministic reference");
  if (model.dims != reference.dims()) throw std::invalid_argument("model and reference dimensionality differ");

  std::set<Offset> domain_set(model.neighborhood.offsets.begin(), model.neighborhood.offsets.end());
  for (const auto& o : reference_hull(reference)) domain_set.insert(o);
  const std::vector<Offset> domain(domain_set.begin(), domain_set.end());
  const auto codes = reference.alphabet().codes();

  std::set<std::vector<State>> patterns;
  if (reachable) {
    if (reachable->steps.size() < 2) throw std::invalid_argument("reachable patterns need a trace of at least 2 steps");
    for (std::size_t t = 1; t < reachable->steps.size(); ++t) {
      const Lattice& lat = reachable->steps[t];
      std::vector<State> p(domain.size());
      for (std::size_t c = 0; c < lat.size(); ++c) {
        for (std::size_t i = 0; i < domain.size(); ++i) p[i] = lat.at(c, domain[i]);
        patterns.insert(p);
      }
    }
  } else {
    const double total = std::pow(static_cast<double>(codes.size()), static_cast<double>(domain.size()));
    if (total > 4194304.0) throw std::invalid_argument("pattern domain too large for exhaustive verification");
    std::vector<std::size_t> digit(domain.size(), 0);
    while (true) {
      std::vector<State> p(domain.size());
      for (std::size_t i = 0; i < domain.size(); ++i) p[i] = codes[digit[i]];
      patterns.insert(std::move(p));
      std::size_t i = 0;
      while (i < digit.size() && ++digit[i] == codes.size()) digit[i++] = 0;
      if (i == digit.size()) break;
    }
  }

  const auto attrs = model.attributes();
  struct KeyResult {
    std::optional<State> got;
    bool mismatched = false;
  };
  std::map<std::vector<State>, KeyResult> keys;
  VerificationReport report;
  report.mode = ModelMode::Deterministic;
  report.domain_patterns = patterns.size();
  for (const auto& p : patterns) {
    std::vector<std::pair<Offset, State>> cells;
    for (std::size_t i = 0; i < domain.size(); ++i) cells.emplace_back(domain[i], p[i]);
    const State expected = reference.central_update(cells);
    const Lattice lat = embed(domain, p, model.dims, reference.alphabet().quiescent());
    const auto key = model_pattern(model, lat, embed_center(lat));
    auto [it, inserted] = keys.try_emplace(key);
    if (inserted) it->second.got = decide(model, key);
    if (it->second.got != expected && !it->second.mismatched) {
      it->second.mismatched = true;
      std::vector<AttributeId> dattrs(domain.begin(), domain.end());
      report.mismatches.push_back({pattern_text(dattrs, p, model.dims), std::to_string(expected),
                                   it->second.got ? std::to_string(*it->second.got) : "none"});
    }
  }
  report.patterns_checked = keys.size();
  report.pass = report.mismatches.empty();
  return report;
}

VerificationReport verify_probabilistic(const IdentifiedModel& model, const ReferenceAutomaton& reference,
                                        std::size_t n_samples, double tolerance, std::uint64_t seed,
                                        const ProbabilisticCheckOptions& options) {
  if (model.mode != ModelMode::Probabilistic) throw std::invalid_argument("verify_probabilistic needs a probabilistic model");
  if (model.dims != reference.dims()) throw std::invalid_argument("model and reference dimensionality differ");
  if (n_samples == 0) throw ParameterError("n_samples must be >= 1");

  Rng rng(derive_seed(seed, 0x5eed));
  const Shape shape = reference.dims() == 1 ? Shape::ring(options.width) : Shape::torus(options.width, options.width);
  const Lattice initial = reference.random_lattice(shape, options.density, rng);
  const auto steps = static_cast<int>((n_samples + shape.size() - 1) / shape.size());
  Trace trace = run_trace(reference, initial, steps, seed);
  if (model.alphabet.is_binary() && !reference.alphabet().is_binary()) trace = occupancy_view(trace);

  std::map<std::vector<State>, std::map<State, std::uint64_t>> counts;
  std::size_t taken = 0;
  for (std::size_t t = 0; t + 1 < trace.steps.size() && taken < n_samples; ++t) {
    for (std::size_t c = 0; c < shape.size() && taken < n_samples; ++c, ++taken) {
      ++counts[model_pattern(model, trace.steps[t], c)][trace.steps[t + 1][c]];
    }
  }

  const auto attrs = model.attributes();
  VerificationReport report;
  report.mode = ModelMode::Probabilistic;
  report.tolerance = tolerance;
  report.domain_patterns = counts.size();
  for (const auto& [key, by_decision] : counts) {
    std::uint64_t total = 0;
    for (const auto& [d, n] : by_decision) total += n;
    if (total < options.min_count) continue;
    PatternDistribution pd;
    pd.pattern = pattern_text(attrs, key, model.dims);
    pd.count = total;
    for (const auto& [d, n] : by_decision) {
      pd.empirical.push_back({d, static_cast<double>(n) / static_cast<double>(total)});
    }
    if (const auto* rule = match_probabilistic(model, key)) {
      pd.model = rule->outcomes;
      std::set<State> values;
      for (const auto& o : pd.empirical) values.insert(o.value);
      for (const auto& o : pd.model) values.insert(o.value);
      for (State v : values) {
        double e = 0.0;
        for (const auto& o : pd.empirical) {
          if (o.value == v) e = o.probability;
        }
        pd.deviation = std::max(pd.deviation, std::abs(e - rule->probability_of(v)));
      }
    } else {
      pd.deviation = 1.0;
      report.mismatches.push_back({pd.pattern, outcome_text(pd.empirical), "none"});
    }
    report.max_deviation = std::max(report.max_deviation, pd.deviation);
    report.distributions.push_back(std::move(pd));
  }
  report.patterns_checked = report.distributions.size();
  report.pass = report.max_deviation <= tolerance;
  return report;
}

namespace {

struct Cluster {
  std::size_t start = 0;
  std::size_t length = 0;
};

/// Maximal circular runs of occupied cells.
std::vector<Cluster> clusters_of(const Lattice& lat) {
  const std::size_t n = lat.size();
  std::vector<Cluster> out;
  std::size_t first_empty = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (lat[i] == 0) {
      first_empty = i;
      break;
    }
  }
  if (first_empty == n) return {{0, n}};
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t i = (first_empty + k) % n;
    if (lat[i] == 0) continue;
    if (!out.empty() && (out.back().start + out.back().length) % n == i) ++out.back().length;
    else out.push_back({i, 1});
  }
  return out;
}

double center_of(const Cluster& c) { return static_cast<double>(c.start) + static_cast<double>(c.length - 1) / 2.0; }

}  // namespace

std::vector<double> jam_track(const Trace& trace) {
  std::vector<double> track;
  if (trace.steps.empty()) return track;
  const std::size_t n = trace.steps.front().size();
  const double w = static_cast<double>(n);
  std::optional<Cluster> prev;
  double position = 0.0;
  for (const auto& lat : trace.steps) {
    const auto clusters = clusters_of(lat);
    if (clusters.empty()) {
      track.push_back(position);
      continue;
    }
    const Cluster* pick = nullptr;
    if (prev) {
      std::vector<bool> near(n, false);
      for (std::size_t k = 0; k < prev->length + 2; ++k) near[(prev->start + n - 1 + k) % n] = true;
      for (const auto& c : clusters) {
        bool touches = false;
        for (std::size_t k = 0; k < c.length && !touches; ++k) touches = near[(c.start + k) % n];
        if (touches && (!pick || c.length > pick->length)) pick = &c;
      }
    }
    if (!pick) {
      pick = &clusters.front();
      for (const auto& c : clusters) {
        if (c.length > pick->length) pick = &c;
      }
    }
    const double center = center_of(*pick);
    if (!prev) {
      position = center;
    } else {
      double delta = std::fmod(center - std::fmod(position, w) + 2.0 * w, w);
      if (delta >= w / 2.0) delta -= w;
      position += delta;
    }
    prev = *pick;
    track.push_back(position);
  }
  return track;
}

double least_squares_slope(const std::vector<double>& ys) {
  const auto n = static_cast<double>(ys.size());
  if (ys.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const auto x = static_cast<double>(i);
    sx += x;
    sy += ys[i];
    sxx += x * x;
    sxy += x * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SurrogateReport traffic_surrogate(const IdentifiedModel& model, const SurrogateOptions& options) {
  if (model.dims != 1 || !model.alphabet.is_binary()) throw std::invalid_argument("traffic surrogate needs a binary 1D model");
  if (options.fit_steps < 2 || options.fit_steps > options.steps) throw ParameterError("fit_steps must be in [2, steps]");
  SurrogateReport report;
  report.conserved = true;
  bool saw_jam_run = false;
  for (std::size_t k = 0; k < options.densities.size(); ++k) {
    SurrogateRun run;
    run.density = options.densities[k];
    Rng rng(derive_seed(options.seed, k));
    const Lattice initial = random_occupancy(Shape::ring(options.width), run.density, rng);
    run.vehicles = occupied_count(initial, 0);
    const Trace trace =
        run_model_trace(model, initial, options.steps, derive_seed(options.seed, 100 + k), options.max_retries, &run.repair);
    for (const auto& lat : trace.steps) {
      if (occupied_count(lat, 0) != run.vehicles) ++run.violations;
    }
    Trace tail;
    tail.alphabet = trace.alphabet;
    tail.steps.assign(trace.steps.end() - options.fit_steps, trace.steps.end());
    run.drift_slope = least_squares_slope(jam_track(tail));
    if (run.violations != 0) report.conserved = false;
    if (std::abs(run.density - options.jam_density) < 1e-12) {
      saw_jam_run = true;
      report.backward_drift = run.drift_slope < 0.0;
    }
    report.runs.push_back(run);
  }
  report.pass = report.conserved && (!saw_jam_run || report.backward_drift);
  return report;
}

void write_report(std::ostream& out, const VerificationReport& r, ReportFormat format) {
  const bool det = r.mode == ModelMode::Deterministic;
  if (format == ReportFormat::MachineReadable) {
    out << "record=summary mode=" << to_string(r.mode) << " patterns_checked=" << r.patterns_checked
        << " domain_patterns=" << r.domain_patterns << " mismatches=" << r.mismatches.size();
    if (!det) out << " max_deviation=" << fixed(r.max_deviation, 6) << " tolerance=" << fixed(r.tolerance, 6);
    out << " pass=" << (r.pass ? 1 : 0) << '\n';
    for (const auto& m : r.mismatches) {
      out << "record=mismatch pattern=" << m.pattern << " expected=" << m.expected << " got=" << m.got << '\n';
    }
    for (const auto& d : r.distributions) {
      out << "record=pattern pattern=" << d.pattern << " count=" << d.count << " empirical=" << outcome_text(d.empirical)
          << " model=" << outcome_text(d.model) << " deviation=" << fixed(d.deviation, 6) << '\n';
    }
    return;
  }
  out << "verification (" << to_string(r.mode) << "): " << (r.pass ? "PASS" : "FAIL") << '\n';
  out << "  patterns checked: " << r.patterns_checked << " (domain " << r.domain_patterns << ")\n";
  if (!det) out << "  max deviation: " << fixed(r.max_deviation) << " (tolerance " << fixed(r.tolerance) << ")\n";
  out << "  mismatches: " << r.mismatches.size() << '\n';
  for (const auto& m : r.mismatches) out << "    " << m.pattern << "  expected " << m.expected << "  got " << m.got << '\n';
  for (const auto& d : r.distributions) {
    out << "    " << d.pattern << "  n=" << d.count << "  empirical {" << outcome_text(d.empirical) << "}  model {"
        << outcome_text(d.model) << "}  dev " << fixed(d.deviation) << '\n';
  }
}

void write_report(std::ostream& out, const SurrogateReport& r, ReportFormat format) {
  if (format == ReportFormat::MachineReadable) {
    for (const auto& run : r.runs) {
      out << "record=run density=" << fixed(run.density) << " vehicles=" << run.vehicles
          << " violations=" << run.violations << " detections=" << run.repair.detections
          << " resampled=" << run.repair.resampled_cells << " fallbacks=" << run.repair.fallbacks
          << " drift_slope=" << fixed(run.drift_slope, 6) << '\n';
    }
    out << "record=summary conserved=" << (r.conserved ? 1 : 0) << " backward_drift=" << (r.backward_drift ? 1 : 0)
        << " pass=" << (r.pass ? 1 : 0) << '\n';
    return;
  }
  out << "traffic surrogate: " << (r.pass ? "PASS" : "FAIL") << '\n';
  for (const auto& run : r.runs) {
    out << "  density " << fixed(run.density, 2) << ": " << run.vehicles << " vehicles, " << run.violations
        << " conservation violations, " << run.repair.detections << " detections, " << run.repair.fallbacks
        << " fallbacks, jam drift " << fixed(run.drift_slope) << " cells/step\n";
  }
}

}  // namespace caid
