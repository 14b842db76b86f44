// caid: identify cellular automata from traces.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "caid/error.hpp"
#include "caid/io.hpp"
#include "caid/pipeline.hpp"
#include "caid/repro.hpp"

using namespace caid;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kInputError = 2;

struct Globals {
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string out;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::invalid_argument("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path);
  return in;
}

std::string slurp(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<AttributeId> parse_attribute_list(const std::string& text) {
  std::vector<AttributeId> out;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(AttributeId::parse(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(AttributeId::parse(cur));
  return out;
}

std::vector<DerivedAttribute> parse_derived(const std::string& text) {
  if (text.empty()) return {};
  if (text == kLiveNeighbors) return {DerivedAttribute::LiveNeighborCount};
  throw ParameterError("unknown derived attribute '" + text + "' (supported: L)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identify cellular automaton models from spatio-temporal traces"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"text", "machine-readable"}));
  app.add_option("--out", g.out, "Output file (default: stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a reference automaton and write a trace");
  std::string automaton = "eca:184";
  int width = 100;
  int height = 0;
  int steps = 50;
  double density = 0.5;
  bool occupancy = false;
  sim->add_option("--automaton", automaton, "eca:N, nasch-d:VMAX, nasch:VMAX:P or life");
  sim->add_option("--width", width, "Lattice width")->check(CLI::PositiveNumber);
  sim->add_option("--height", height, "Lattice height (2D automata; default = width)");
  sim->add_option("--steps", steps, "Number of updates")->check(CLI::PositiveNumber);
  sim->add_option("--density", density, "Initial occupied fraction")->check(CLI::Range(0.0, 1.0));
  sim->add_flag("--occupancy", occupancy, "Write the binary occupancy view");

  // extract
  auto* ext = app.add_subcommand("extract", "Build a decision table from a trace");
  std::string trace_path;
  int window = 1;
  std::string derived;
  std::size_t sample_limit = 0;
  std::string keep;
  ext->add_option("--trace", trace_path, "Trace file")->required();
  ext->add_option("--window", window, "Candidate window radius")->check(CLI::PositiveNumber);
  ext->add_option("--derived", derived, "Derived attribute to add (L)");
  ext->add_option("--sample-limit", sample_limit, "Maximum number of observations (0 = all)");
  ext->add_option("--project", keep, "Comma-separated attributes to keep");

  // reducts
  auto* red = app.add_subcommand("reducts", "Compute reducts of a decision table");
  std::string table_path;
  std::string algo = "exhaustive";
  std::size_t max_size = 0;
  double shorten_to = 0.0;
  std::size_t n_subtables = 16;
  red->add_option("--table", table_path, "Decision table file")->required();
  red->add_option("--algo", algo, "exhaustive or dynamic")->check(CLI::IsMember({"exhaustive", "dynamic"}));
  red->add_option("--max-size", max_size, "Largest reduct size (0 = no cap / default)");
  red->add_option("--shorten", shorten_to, "Shorten the selected reduct to this consistency ratio");
  red->add_option("--subtables", n_subtables, "Number of subtables for dynamic reducts");

  // rules
  auto* rul = app.add_subcommand("rules", "Induce rules from a decision table");
  std::string method = "lem2";
  std::string attrs;
  rul->add_option("--table", table_path, "Decision table file")->required();
  rul->add_option("--attrs", attrs, "Project onto these attributes first");
  rul->add_option("--method", method, "lem2, exhaustive or merge")->check(CLI::IsMember({"lem2", "exhaustive", "merge"}));

  // identify
  auto* idn = app.add_subcommand("identify", "Identify a model from a trace");
  std::string mode = "deterministic";
  std::string induction = "lem2";
  double shorten_id = 0.0;
  bool traffic_detectors = false;
  idn->add_option("--trace", trace_path, "Trace file")->required();
  idn->add_option("--window", window, "Candidate window radius")->check(CLI::PositiveNumber);
  idn->add_option("--mode", mode, "deterministic or probabilistic")
      ->check(CLI::IsMember({"deterministic", "probabilistic"}));
  idn->add_option("--reduct-algo", algo, "exhaustive or dynamic")->check(CLI::IsMember({"exhaustive", "dynamic"}));
  idn->add_option("--shorten", shorten_id, "Minimum consistency ratio for shortening (0 = off)");
  idn->add_option("--induction", induction, "lem2 or exhaustive")->check(CLI::IsMember({"lem2", "exhaustive"}));
  idn->add_option("--derived", derived, "Derived attribute to add (L)");
  idn->add_option("--sample-limit", sample_limit, "Maximum number of observations (0 = all)");
  idn->add_flag("--traffic-detectors", traffic_detectors, "Attach the traffic conservation detectors");

  // verify
  auto* ver = app.add_subcommand("verify", "Verify a model against a reference automaton");
  std::string model_path;
  std::string reference = "eca:184";
  std::string patterns = "all";
  std::string reachable_path;
  std::size_t samples = 20000;
  double tolerance = 0.05;
  bool surrogate = false;
  ver->add_option("--model", model_path, "Model file")->required();
  ver->add_option("--reference", reference, "Reference automaton");
  ver->add_option("--patterns", patterns, "all or reachable")->check(CLI::IsMember({"all", "reachable"}));
  ver->add_option("--reachable-trace", reachable_path, "Trace whose patterns count as reachable");
  ver->add_option("--samples", samples, "Observations for probabilistic verification");
  ver->add_option("--tolerance", tolerance, "Maximum probability deviation");
  ver->add_flag("--surrogate", surrogate, "Run the traffic conservation and jam-drift checks instead");

  auto* rep = app.add_subcommand("repro", "Run the reproduction suite and print a pass/fail matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    const ReportFormat format = parse_report_format(g.format);
    Output out(g.out);

    if (*sim) {
      const auto ref = ReferenceAutomaton::parse(automaton);
      Rng rng(derive_seed(g.seed, 1));
      const Shape shape = ref.dims() == 1 ? Shape::ring(width) : Shape::torus(width, height > 0 ? height : width);
      Trace trace = run_trace(ref, ref.random_lattice(shape, density, rng), steps, g.seed);
      if (occupancy) trace = occupancy_view(trace);
      write_trace(out.stream(), trace);
      return kOk;
    }
    if (*ext) {
      const Trace trace = parse_trace(slurp(trace_path));
      ExtractOptions opt;
      opt.derived = parse_derived(derived);
      if (sample_limit > 0) opt.sample_limit = sample_limit;
      opt.seed = g.seed;
      DecisionTable table = extract_table(trace, window, opt);
      if (!keep.empty()) table = project(table, parse_attribute_list(keep));
      write_table(out.stream(), table);
      return kOk;
    }
    if (*red) {
      auto in = open_input(table_path);
      const DecisionTable table = read_table(in);
      std::vector<Reduct> reducts;
      if (algo == "exhaustive") {
        reducts = max_size > 0 ? exhaustive_reducts(table, max_size) : exhaustive_reducts(table);
      } else {
        DynamicReductOptions opt;
        opt.seed = g.seed;
        opt.n_subtables = n_subtables;
        if (max_size > 0) opt.max_size = max_size;
        reducts = dynamic_reducts(table, opt);
      }
      for (const auto& r : reducts) out.stream() << format_reduct(r, table.dims) << '\n';
      const Neighborhood n = select_neighborhood(reducts);
      std::vector<AttributeId> chosen(n.offsets.begin(), n.offsets.end());
      for (const auto& d : n.derived) chosen.push_back(AttributeId::derived(d));
      if (shorten_to > 0.0) {
        chosen = shorten(table, chosen, shorten_to);
        out.stream() << "shortened ";
      } else {
        out.stream() << "selected ";
      }
      out.stream() << format_reduct(Reduct{chosen, 1.0}, table.dims) << '\n';
      return kOk;
    }
    if (*rul) {
      auto in = open_input(table_path);
      DecisionTable table = read_table(in);
      if (!attrs.empty()) table = project(table, parse_attribute_list(attrs));
      RuleSet set;
      if (method == "merge") set.probabilistic = merge_uncertain(table);
      else set.deterministic = prioritize(method == "lem2" ? lem2(table) : exhaustive_rules(table), table);
      write_rules(out.stream(), set, table.dims);
      return kOk;
    }
    if (*idn) {
      const Trace trace = parse_trace(slurp(trace_path));
      IdentifyConfig c;
      c.window = window;
      c.mode = parse_mode(mode);
      c.reduct_algo = parse_reduct_algorithm(algo);
      if (shorten_id > 0.0) c.shorten = shorten_id;
      c.induction = parse_induction(induction);
      c.derived = parse_derived(derived);
      if (sample_limit > 0) c.sample_limit = sample_limit;
      c.seed = g.seed;
      IdentifiedModel model = identify(trace, c);
      if (traffic_detectors) model.detectors = make_traffic_detectors();
      write_model(out.stream(), model);
      return kOk;
    }
    if (*ver) {
      auto in = open_input(model_path);
      const IdentifiedModel model = read_model(in);
      if (surrogate) {
        SurrogateOptions opt;
        opt.seed = g.seed;
        const auto report = traffic_surrogate(model, opt);
        write_report(out.stream(), report, format);
        return report.pass ? kOk : kFailed;
      }
      const auto ref = ReferenceAutomaton::parse(reference);
      VerificationReport report;
      if (model.mode == ModelMode::Deterministic) {
        if (patterns == "reachable") {
          if (reachable_path.empty()) throw ParameterError("--patterns reachable needs --reachable-trace");
          const Trace trace = parse_trace(slurp(reachable_path));
          report = verify_deterministic(model, ref, &trace);
        } else {
          report = verify_deterministic(model, ref);
        }
      } else {
        report = verify_probabilistic(model, ref, samples, tolerance, g.seed);
      }
      write_report(out.stream(), report, format);
      return report.pass ? kOk : kFailed;
    }
    if (*rep) {
      const auto report = run_repro(g.seed);
      write_repro(out.stream(), report, format);
      return report.pass() ? kOk : kFailed;
    }
  } catch (const std::exception& e) {
    std::cerr << "caid: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
