// shrinkerlab command-line driver. Exit status: 0 success, 2 invalid input,
// 3 numeric failure (unresolved grid, tail bound, failed acceptance criterion).
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "shrinkerlab/catalog.hpp"
#include "shrinkerlab/flow.hpp"
#include "shrinkerlab/functionals.hpp"
#include "shrinkerlab/heatlab.hpp"
#include "shrinkerlab/manifest.hpp"
#include "shrinkerlab/verify.hpp"

using namespace shrinkerlab;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
  std::string output;
  std::string format = "json";
  int threads = 0;
  unsigned seed = 0;
};

struct SurfaceOptions {
  std::string catalog;
  std::string manifest;
  std::vector<int> resolution;
  bool finite_difference = false;
  double scale_min = 0.02;
  double scale_max = 50.0;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_format = true) {
  cmd->add_option("-o,--output", o.output, "Write results to this file instead of stdout");
  if (with_format) cmd->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", o.threads, "Worker threads (default: SHRINKERLAB_THREADS or 1)");
  cmd->add_option("--seed", o.seed, "Seed for randomized optimizer starts");
}

void add_surface(CLI::App* cmd, SurfaceOptions& s) {
  auto* cat = cmd->add_option("--catalog", s.catalog, "Catalog entry, name:p1,p2,...");
  auto* man = cmd->add_option("--manifest", s.manifest, "JSON manifest {name, params, resolution}");
  cat->excludes(man);
  cmd->add_option("--resolution", s.resolution, "Nodes per parameter axis")->delimiter(',');
  cmd->add_flag("--fd", s.finite_difference, "Finite-difference chart derivatives");
  cmd->add_option("--scale-min", s.scale_min, "Smallest probe scale");
  cmd->add_option("--scale-max", s.scale_max, "Largest probe scale");
}

std::vector<int> parse_index_range(const std::string& text) {
  const std::size_t dots = text.find("..");
  if (dots == std::string::npos) {
    std::vector<int> out;
    for (double v : parse_number_list(text, "index list")) {
      if (v != std::floor(v) || v < 0) throw ValidationError("indices must be non-negative integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }
  const auto lo = parse_number_list(text.substr(0, dots), "range start");
  const auto hi = parse_number_list(text.substr(dots + 2), "range end");
  if (lo.size() != 1 || hi.size() != 1 || lo[0] < 0 || hi[0] < lo[0] || lo[0] != std::floor(lo[0]) ||
      hi[0] != std::floor(hi[0]))
    throw ValidationError("malformed index range '" + text + "'");
  std::vector<int> out;
  for (int m = static_cast<int>(lo[0]); m <= static_cast<int>(hi[0]); ++m) out.push_back(m);
  return out;
}

ManifestEntry load_surface(const SurfaceOptions& s) {
  ManifestEntry entry;
  if (!s.manifest.empty()) {
    std::ifstream in(s.manifest);
    if (!in) throw ValidationError("cannot open manifest '" + s.manifest + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
    }
    entry = chart_from_manifest(j);
  } else if (!s.catalog.empty()) {
    const auto spec = parse_catalog_spec(s.catalog);
    entry.chart = catalog_make(spec.name, spec.params);
    entry.resolution = entry.chart.default_resolution;
  } else {
    throw ValidationError("one of --catalog or --manifest is required");
  }
  if (!s.resolution.empty()) {
    if (static_cast<int>(s.resolution.size()) != entry.chart.intrinsic_dim)
      throw ValidationError("--resolution needs one entry per intrinsic dimension");
    entry.resolution = s.resolution;
  }
  return entry;
}

OptimizerConfig optimizer_from(const CommonOptions& c, const SurfaceOptions& s) {
  OptimizerConfig cfg;
  cfg.threads = c.threads;
  cfg.seed = c.seed;
  cfg.scale_min = s.scale_min;
  cfg.scale_max = s.scale_max;
  cfg.record_scan = c.format == "csv";
  cfg.validate();
  return cfg;
}

json result_json(const FunctionalResult& r, const ChartSpec& chart) {
  return {{"value", r.value},
          {"center", std::vector<double>(r.center.data(), r.center.data() + r.center.size())},
          {"scale", r.scale},
          {"refinement_gap", r.refinement_gap},
          {"diagnostics",
           {{"converged", r.converged},
            {"n_starts", r.n_starts},
            {"evaluations", r.evaluations},
            {"tail_bound", chart.tail_bound}}}};
}

void write_scan_csv(std::ostream& out, const FunctionalResult& r, int ambient, int m = -1) {
  for (const auto& rec : r.scan) {
    if (m >= 0) out << m << ',';
    for (int k = 0; k < ambient; ++k) out << rec.center[k] << ',';
    out << rec.scale << ',' << rec.value << '\n';
  }
}

std::string scan_header(int ambient, bool with_m) {
  std::string h = with_m ? "m," : "";
  for (int k = 0; k < ambient; ++k) h += "x" + std::to_string(k) + ",";
  return h + "scale,value\n";
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ValidationError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int run_functional(Functional f, const CommonOptions& c, const SurfaceOptions& s, const std::vector<int>& m_values) {
  const ManifestEntry entry = load_surface(s);
  const OptimizerConfig cfg = optimizer_from(c, s);
  const DerivativeMode mode = s.finite_difference ? DerivativeMode::finite_difference : DerivativeMode::analytic;
  std::vector<FunctionalResult> results;
  for (int m : m_values) results.push_back(evaluate_functional(entry.chart, f, m, cfg, entry.resolution, mode));

  Sink sink(c.output);
  std::ostream& out = sink.stream();
  out.precision(17);
  const bool many = m_values.size() > 1 || f == Functional::stabilized || f == Functional::vt_bound;
  if (c.format == "csv") {
    out << scan_header(entry.chart.ambient_dim, many);
    for (std::size_t i = 0; i < results.size(); ++i)
      write_scan_csv(out, results[i], entry.chart.ambient_dim, many ? m_values[i] : -1);
    return 0;
  }
  json j = result_json(results.back(), entry.chart);
  j["functional"] = functional_name(f);
  j["manifest"] = chart_manifest(entry.chart, entry.resolution);
  if (many) {
    json list = json::array();
    bool monotone = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
      json item = result_json(results[i], entry.chart);
      item["m"] = m_values[i];
      list.push_back(item);
      if (i > 0 && results[i].value < results[i - 1].value - 1e-6) monotone = false;
    }
    j["by_m"] = list;
    j["m"] = m_values.back();
    if (f == Functional::stabilized) j["diagnostics"]["monotone_in_m"] = monotone;
  }
  out << j.dump(2) << '\n';
  return 0;
}

int run_constants(int n, const std::string& range, const std::string& output) {
  if (n < 1) throw ValidationError("--n must be at least 1");
  Sink sink(output);
  std::ostream& out = sink.stream();
  out.precision(17);
  out << "n,m,c_hat\n";
  for (int m : parse_index_range(range)) out << n << ',' << m << ',' << c_hat(n, m) << '\n';
  return 0;
}

struct HeatOptions {
  int N = 1;
  double L = 60.0;
  double h = 0.03;
  double tail_tolerance = 1e-4;
  std::string density = "bump";
  std::vector<double> times = {0.5, 1.0, 2.0};
  std::string output;
};

GridDensity heat_initial(const HeatOptions& o) {
  if (!(o.h > 0.0)) throw ValidationError("--h must be positive");
  const int points = static_cast<int>(std::lround(2.0 * o.L / o.h)) + 1;
  const auto spec = parse_catalog_spec(o.density);
  if (spec.name == "gaussian") {
    if (spec.params.size() > 1) throw ValidationError("gaussian takes at most one parameter (t0)");
    return gaussian_density(o.N, spec.params.empty() ? 1.0 : spec.params[0], Eigen::VectorXd::Zero(o.N), o.L, points);
  }
  if (spec.name == "what") {
    if (spec.params.size() != 2 || spec.params[0] != std::floor(spec.params[0]))
      throw ValidationError("what takes two parameters: integer m, rho");
    return density_from_weight(o.N, static_cast<int>(spec.params[0]), spec.params[1], o.L, points, o.tail_tolerance);
  }
  if (spec.name == "bump") {
    if (spec.params.size() > 1) throw ValidationError("bump takes at most one parameter (half width)");
    return bump_density(o.N, spec.params.empty() ? 1.0 : spec.params[0], o.L, points);
  }
  throw ValidationError("unknown density '" + spec.name + "' (gaussian|what:m,rho|bump)");
}

int run_heat(const HeatOptions& o) {
  const GridDensity u0 = heat_initial(o);
  Sink sink(o.output);
  std::ostream& out = sink.stream();
  out.precision(12);
  out << "t,mass,tau,harnack_margin,l1_to_gaussian\n";
  for (double t : o.times) {
    const GridDensity u = heat_at(u0, t);
    const auto est = estimate_virtual_time(u);
    const auto match = moment_match(u, t);
    const auto dist = gaussian_distance(u, t, match.T0, match.x0);
    out << t << ',' << u.mass() << ',' << est.tau << ',' << check_harnack(u0, t) << ',' << dist.l1 << '\n';
  }
  return 0;
}

struct FlowOptions {
  std::string curve = "ellipse:2,1";
  double T = 0.8;
  double dt_factor = 0.2;
  int checkpoints = 10;
  int points = 256;
};

int run_flow_command(const FlowOptions& o, const CommonOptions& c) {
  const auto spec = parse_catalog_spec(o.curve);
  CurveState curve;
  if (spec.name == "circle") {
    if (spec.params.size() != 1) throw ValidationError("circle takes one parameter R");
    curve = circle_curve(spec.params[0], o.points);
  } else if (spec.name == "ellipse") {
    if (spec.params.size() != 2) throw ValidationError("ellipse takes two parameters a,b");
    curve = ellipse_curve(spec.params[0], spec.params[1], o.points);
  } else {
    throw ValidationError("unknown curve '" + spec.name + "' (circle:R|ellipse:a,b)");
  }
  FlowConfig cfg;
  cfg.dt_factor = o.dt_factor;
  cfg.checkpoints = o.checkpoints;
  cfg.optimizer.threads = c.threads;
  cfg.optimizer.seed = c.seed;
  const FlowTrace trace = run_flow(curve, o.T, cfg);
  Sink sink(c.output);
  std::ostream& out = sink.stream();
  out.precision(12);
  out << "t,length,entropy,residual\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    out << trace.times[i] << ',' << trace.lengths[i] << ',' << trace.entropy[i].value << ',' << trace.residuals[i]
        << '\n';
  return 0;
}

int run_verify(const std::string& suite, const CommonOptions& c) {
  std::vector<int> ids;
  if (suite == "all") {
    for (int id = 1; id <= criterion_count(); ++id) ids.push_back(id);
  } else {
    ids = parse_index_range(suite);
  }
  OptimizerConfig cfg;
  cfg.threads = c.threads;
  cfg.seed = c.seed;
  Sink sink(c.output);
  std::ostream& out = sink.stream();
  int failures = 0;
  for (int id : ids) {
    const auto r = run_criterion(id, cfg);
    if (!r.passed) ++failures;
    out << format_criterion(r) << std::endl;
  }
  out << (ids.size() - failures) << "/" << ids.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy, conformal volume and heat-flow laboratory for submanifolds"};
  app.require_subcommand(1);

  CommonOptions common;
  SurfaceOptions surface;
  std::string m_text = "0,1,2,5";
  int vt_m = -1;

  auto* entropy = app.add_subcommand("entropy", "Gaussian density supremum (entropy) of a catalog surface");
  add_common(entropy, common);
  add_surface(entropy, surface);

  auto* confvol = app.add_subcommand("confvol", "Normalized conformal volume of a catalog surface");
  add_common(confvol, common);
  add_surface(confvol, surface);

  auto* stable = app.add_subcommand("stable", "Stabilized conformal volumes for a list of m");
  add_common(stable, common);
  add_surface(stable, surface);
  stable->add_option("--m", m_text, "Comma list or range a..b of stabilization indices");

  auto* vtbound = app.add_subcommand("vtbound", "Virtual-entropy lower bound from the modified weight family");
  add_common(vtbound, common);
  add_surface(vtbound, surface);
  vtbound->add_option("--m", vt_m, "Index m (default: codimension, the smallest admissible)");

  int const_n = 2;
  std::string const_m = "0..5";
  std::string const_out;
  auto* constants = app.add_subcommand("constants", "CSV of the stabilization constants");
  constants->add_option("--n", const_n, "Dimension n");
  constants->add_option("--m", const_m, "Comma list or range a..b");
  constants->add_option("-o,--output", const_out, "Output file");

  HeatOptions heat_opts;
  auto* heat = app.add_subcommand("heat", "Heat flow of a grid density; CSV per time");
  heat->set_help_flag("--help", "Print this help message and exit");
  heat->add_option("--N", heat_opts.N, "Grid dimension (1 or 2)");
  heat->add_option("--L", heat_opts.L, "Grid half-extent");
  heat->add_option("--h", heat_opts.h, "Grid spacing");
  heat->add_option("--density", heat_opts.density, "gaussian[:t0] | what:m,rho | bump[:a]");
  heat->add_option("--tail-tolerance", heat_opts.tail_tolerance, "Largest mass a what density may lose outside the grid");
  heat->add_option("--times", heat_opts.times, "Comma list of times")->delimiter(',');
  heat->add_option("-o,--output", heat_opts.output, "Output file");

  FlowOptions flow_opts;
  auto* flow = app.add_subcommand("flow", "Curve-shortening flow with entropy checkpoints; CSV");
  add_common(flow, common, false);
  flow->add_option("--curve", flow_opts.curve, "circle:R | ellipse:a,b");
  flow->add_option("--T", flow_opts.T, "Final time");
  flow->add_option("--dt-factor", flow_opts.dt_factor, "dt = factor * min_spacing^2, at most 0.2");
  flow->add_option("--checkpoints", flow_opts.checkpoints, "Number of checkpoints after t = 0");
  flow->add_option("--points", flow_opts.points, "Polyline points");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "Run acceptance criteria; one PASS/FAIL line each");
  add_common(verify, common, false);
  verify->add_option("--suite", suite, "all, or a list/range of criterion ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*entropy) return run_functional(Functional::entropy, common, surface, {0});
    if (*confvol) return run_functional(Functional::confvol, common, surface, {0});
    if (*stable) return run_functional(Functional::stabilized, common, surface, parse_index_range(m_text));
    if (*vtbound) {
      int m = vt_m;
      if (m < 0) {
        const auto entry = load_surface(surface);
        m = entry.chart.ambient_dim - entry.chart.intrinsic_dim;
      }
      return run_functional(Functional::vt_bound, common, surface, {m});
    }
    if (*constants) return run_constants(const_n, const_m, const_out);
    if (*heat) return run_heat(heat_opts);
    if (*flow) return run_flow_command(flow_opts, common);
    if (*verify) return run_verify(suite, common);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
