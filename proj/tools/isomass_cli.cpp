// isomass: command line front end.
//
// Exit codes: 0 success, 1 a verify check failed, 2 bad input or config,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "isomass/isomass.hpp"

namespace {

using namespace isomass;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

std::string g17(double x) {
  if (x == kMassSentinel) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string g6(double x) {
  if (x == kMassSentinel || std::isinf(x)) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

using Json = nlohmann::ordered_json;

struct Options {
  std::string metric;
  std::string config;
  std::string format;
  std::string output;
  std::optional<double> quad_rel_tol, quad_abs_tol, root_tol, cutoff_radius, report_tol;
  std::optional<int> max_subdivisions, extrap_terms, probe_per_decade;

  // subcommand parameters
  double rho = 0;
  std::optional<double> rho0;
  double p = 2;
  double t_max = 10;
  int samples = 101;
  std::string p_grid;
  std::string r_grid;
  std::vector<std::string> suites;
  std::optional<double> tol;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--metric", o.metric, "metric, e.g. flat, schwarzschild:m=1, cylinder:a=2, expr:geodesic:<expr>");
  sub->add_option("--config", o.config, "config file with [metric], [tolerances], [output] sections");
  sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--output", o.output, "output file (default: standard output)");
  sub->add_option("--quad-rel-tol", o.quad_rel_tol);
  sub->add_option("--quad-abs-tol", o.quad_abs_tol);
  sub->add_option("--root-tol", o.root_tol);
  sub->add_option("--max-subdivisions", o.max_subdivisions);
  sub->add_option("--extrap-terms", o.extrap_terms);
  sub->add_option("--cutoff-radius", o.cutoff_radius);
  sub->add_option("--probe-per-decade", o.probe_per_decade);
  sub->add_option("--report-tol", o.report_tol, "tolerance for CONVERGED mass verdicts");
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(detail::parse_number(item, what));
  if (out.empty()) throw ConfigError(what + " is empty");
  return out;
}

struct Context {
  RunConfig run;
  RadialMetric metric;
  std::ostream* out = &std::cout;
  std::unique_ptr<std::ofstream> file;
};

Context resolve(const Options& o) {
  Context ctx;
  if (!o.config.empty()) ctx.run = load_config_file(o.config);
  if (!o.metric.empty()) ctx.run.metric = parse_metric_spec(o.metric);
  if (!ctx.run.metric) throw ConfigError("no metric given; use --metric or a [metric] section in --config");

  auto& t = ctx.run.tolerances;
  if (o.quad_rel_tol) t.quad_rel_tol = *o.quad_rel_tol;
  if (o.quad_abs_tol) t.quad_abs_tol = *o.quad_abs_tol;
  if (o.root_tol) t.root_tol = *o.root_tol;
  if (o.cutoff_radius) t.cutoff_radius = *o.cutoff_radius;
  if (o.max_subdivisions) t.max_subdivisions = *o.max_subdivisions;
  if (o.extrap_terms) t.extrap_terms = *o.extrap_terms;
  if (o.probe_per_decade) t.probe_per_decade = *o.probe_per_decade;
  if (o.report_tol) ctx.run.report_tol = *o.report_tol;
  t.validate();
  if (!(ctx.run.report_tol > 0)) throw ConfigError("report_tol must be positive");
  if (!o.format.empty()) ctx.run.format = parse_format(o.format);
  if (!o.output.empty()) ctx.run.output_path = o.output;

  ctx.metric = build_metric(*ctx.run.metric);
  const MetricValidation v = validate_metric(ctx.metric, t);
  if (!v.ok()) {
    std::string msg = "metric '" + ctx.metric.label + "' violates its invariants:";
    for (const auto& e : v.errors) msg += "\n  - " + e;
    msg += "\n  check the profile expression and domain start";
    throw ConfigError(msg);
  }
  for (const auto& w : v.warnings)
    std::cerr << "warning: " << w
              << "; capacities and hulls assume the area grows without bound, expect parabolic or divergent results\n";

  if (!ctx.run.output_path.empty()) {
    ctx.file = std::make_unique<std::ofstream>(ctx.run.output_path);
    if (!*ctx.file) throw ConfigError("cannot write output file '" + ctx.run.output_path + "'");
    ctx.out = ctx.file.get();
  }
  return ctx;
}

double default_rho0(const RadialMetric& m) { return m.area_at(m.domain_start) > 0 ? m.domain_start : 1.0; }

bool is_json(const Context& ctx) { return ctx.run.format == OutputFormat::Json; }

// ---------------------------------------------------------------- sphere

int cmd_sphere(const Options& o) {
  Context ctx = resolve(o);
  const SphereData s = sphere_data(ctx.metric, o.rho, ctx.run.tolerances);
  auto& out = *ctx.out;
  if (is_json(ctx)) {
    const Json j = {{"metric", ctx.metric.label}, {"rho", s.rho},
                    {"area", s.area},               {"volume", s.volume},
                    {"H", s.mean_curvature},        {"m_H", s.hawking_mass},
                    {"willmore", s.willmore},       {"R", s.scalar_curvature}};
    out << j.dump() << "\n";
  } else {
    out << "rho,area,volume,H,m_H,willmore,R\n"
        << g17(s.rho) << ',' << g17(s.area) << ',' << g17(s.volume) << ',' << g17(s.mean_curvature) << ','
        << g17(s.hawking_mass) << ',' << g17(s.willmore) << ',' << g17(s.scalar_curvature) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- capacity

int cmd_capacity(const Options& o) {
  Context ctx = resolve(o);
  const double rho0 = o.rho0.value_or(default_rho0(ctx.metric));
  const CapacityResult c = capacity(ctx.metric, rho0, o.p, ctx.run.tolerances);
  auto& out = *ctx.out;
  if (is_json(ctx)) {
    Json j = {{"metric", ctx.metric.label}, {"p", c.p}, {"rho0", c.rho0}, {"ncap", c.ncap}, {"flux", c.flux},
              {"err_estimate", c.err_estimate}, {"parabolic", c.parabolic}};
    if (c.p == 1) j["hull_radius"] = c.hull_radius;
    out << j.dump() << "\n";
  } else {
    out << "p,rho0,ncap,flux,err_estimate,parabolic\n"
        << g17(c.p) << ',' << g17(c.rho0) << ',' << g17(c.ncap) << ',' << g17(c.flux) << ',' << g17(c.err_estimate)
        << ',' << (c.parabolic ? 1 : 0) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- flow

int cmd_flow(const Options& o) {
  Context ctx = resolve(o);
  const double rho0 = o.rho0.value_or(default_rho0(ctx.metric));
  const FlowTrack track = weak_imcf(ctx.metric, rho0, o.t_max, o.samples, ctx.run.tolerances);
  auto& out = *ctx.out;
  if (!is_json(ctx)) {
    write_flow_csv(out, track);
    return 0;
  }
  Json events = Json::array();
  for (const auto& e : track.events) {
    if (const auto* s = std::get_if<SmoothSegment>(&e)) {
      events.push_back({{"type", "smooth"},
                        {"t_start", s->t_start},
                        {"t_end", s->t_end},
                        {"rho_start", s->rho_start},
                        {"rho_end", s->rho_end}});
    } else {
      const auto& j = std::get<Jump>(e);
      events.push_back({{"type", j.initial ? "initial_jump" : "jump"},
                        {"t", j.t},
                        {"rho_before", j.rho_before},
                        {"rho_after", j.rho_after}});
    }
  }
  Json samples = Json::array();
  for (const auto& s : track.samples) {
    const auto& d = s.sphere;
    samples.push_back({{"t", s.t},
                       {"rho", d.rho},
                       {"area", d.area},
                       {"volume", d.volume},
                       {"H", d.mean_curvature},
                       {"m_H", d.hawking_mass},
                       {"willmore", d.willmore},
                       {"R", d.scalar_curvature},
                       {"jump_flag", s.jump ? 1 : 0}});
  }
  const Json j = {{"metric", ctx.metric.label},
                  {"rho0", track.rho0},
                  {"initial_area", track.initial_area},
                  {"events", events},
                  {"samples", samples}};
  out << j.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- mass

const std::vector<double> kDefaultPGrid = {1, 1.25, 1.5, 2, 2.5, 2.9};

int cmd_mass(const Options& o) {
  Context ctx = resolve(o);
  const auto& tol = ctx.run.tolerances;
  const std::vector<double> p_grid = o.p_grid.empty() ? kDefaultPGrid : parse_list(o.p_grid, "--p-grid");
  const std::vector<double> r_grid = o.r_grid.empty() ? default_r_grid(ctx.metric, tol) : parse_list(o.r_grid, "--r-grid");
  std::vector<MassReport> reports;
  for (double p : p_grid) reports.push_back(total_mass(ctx.metric, p, r_grid, tol, ctx.run.report_tol));
  auto& out = *ctx.out;
  if (is_json(ctx)) {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(mass_json(r, ctx.metric.label));
    out << arr.dump() << "\n";
  } else {
    write_mass_csv_header(out);
    for (const auto& r : reports) write_mass_csv_rows(out, r, ctx.metric.label);
  }
  std::cerr << "note: " << kExhaustionCaveat << "\n";
  return 0;
}

// ---------------------------------------------------------------- hypotheses

int cmd_hypotheses(const Options& o) {
  Context ctx = resolve(o);
  const HypothesisReport h = check_hypotheses(ctx.metric, ctx.run.tolerances);
  auto& out = *ctx.out;
  if (is_json(ctx)) {
    const Json j = {{"metric", ctx.metric.label},
                    {"scalar_curvature_nonneg", h.scalar_curvature_nonneg},
                    {"worst_scalar_curvature", h.worst_scalar_curvature},
                    {"worst_location", h.worst_location},
                    {"no_interior_minimal", h.no_interior_minimal},
                    {"interior_minimal_radii", h.interior_minimal_radii},
                    {"minimal_boundary", h.minimal_boundary},
                    {"radial_isoperimetric_constant", h.radial_isoperimetric_constant},
                    {"kappa_note", h.kappa_note},
                    {"probe_points", h.probe_grid.size()},
                    {"probe_min", h.probe_grid.front()},
                    {"probe_max", h.probe_grid.back()}};
    out << j.dump() << "\n";
    return 0;
  }
  std::string radii;
  for (double r : h.interior_minimal_radii) radii += (radii.empty() ? "" : ";") + g17(r);
  out << "key,value\n"
      << "scalar_curvature_nonneg," << (h.scalar_curvature_nonneg ? "true" : "false") << "\n"
      << "worst_scalar_curvature," << g17(h.worst_scalar_curvature) << "\n"
      << "worst_location," << g17(h.worst_location) << "\n"
      << "no_interior_minimal," << (h.no_interior_minimal ? "true" : "false") << "\n"
      << "interior_minimal_radii," << radii << "\n"
      << "minimal_boundary," << (h.minimal_boundary ? "true" : "false") << "\n"
      << "radial_isoperimetric_constant," << g17(h.radial_isoperimetric_constant) << "\n"
      << "kappa_note," << h.kappa_note << "\n"
      << "probe_points," << h.probe_grid.size() << "\n"
      << "probe_min," << g17(h.probe_grid.front()) << "\n"
      << "probe_max," << g17(h.probe_grid.back()) << "\n";
  return 0;
}

// ---------------------------------------------------------------- verify

struct CheckRow {
  std::string suite;
  std::string check;
  double value = 0;
  std::string target;
  bool pass = false;
};

using Suite = std::function<void(const Context&, const Options&, std::vector<CheckRow>&)>;

void suite_equivalence(const Context& ctx, const Options& o, std::vector<CheckRow>& rows) {
  const auto& tol = ctx.run.tolerances;
  const std::vector<double> p_grid = o.p_grid.empty() ? kDefaultPGrid : parse_list(o.p_grid, "--p-grid");
  const std::vector<double> r_grid = o.r_grid.empty() ? default_r_grid(ctx.metric, tol) : parse_list(o.r_grid, "--r-grid");
  const double gap_tol = o.tol.value_or(5e-3);
  const EquivalenceVerdict v = equivalence_report(ctx.metric, p_grid, r_grid, gap_tol, tol);
  for (const auto& r : v.masses) {
    const std::string name = r.kind == "huisken" ? "huisken mass" : "iso-p mass p=" + g6(r.p);
    rows.push_back({"equivalence", name + " [" + to_string(r.verdict) + "]", r.extrapolated_mass,
                    "finite limit", !r.infinite && r.verdict != Verdict::Divergent});
  }
  rows.push_back({"equivalence", "max pairwise gap", v.max_pairwise_gap, "<= " + g6(gap_tol), v.pass});
}

void suite_geroch(const Context& ctx, const Options& o, std::vector<CheckRow>& rows) {
  const double rho0 = o.rho0.value_or(default_rho0(ctx.metric));
  const FlowTrack track = weak_imcf(ctx.metric, rho0, o.t_max, o.samples, ctx.run.tolerances);
  const GerochReport g = geroch_check(track);
  rows.push_back({"geroch", "largest m_H drop along flow", g.worst_drop, "<= 1e-08 max(1,|m_H|)", g.monotone});
}

void suite_bmx(const Context& ctx, const Options& o, std::vector<CheckRow>& rows) {
  const double rho0 = o.rho0.value_or(default_rho0(ctx.metric));
  const std::vector<double> p_grid = o.p_grid.empty() ? std::vector<double>{1.5, 2, 2.5} : parse_list(o.p_grid, "--p-grid");
  for (double f : {1.0, 1.5, 2.5, 5.0, 50.0})
    for (double p : p_grid) {
      const BmxReport b = bmx_bound_check(ctx.metric, rho0 * f, p, ctx.run.tolerances);
      rows.push_back({"bmx", "ncap rho=" + g6(b.rho) + " p=" + g6(p), b.lhs, "<= " + g6(b.rhs), b.pass});
    }
}

void suite_holder(const Context& ctx, const Options& o, std::vector<CheckRow>& rows) {
  const double rho0 = o.rho0.value_or(default_rho0(ctx.metric));
  const std::vector<double> p_grid = o.p_grid.empty() ? std::vector<double>{1.5, 2, 2.5} : parse_list(o.p_grid, "--p-grid");
  for (double base : {rho0, 1.5 * rho0})
    for (double p : p_grid) {
      const CapacityResult c = p_capacity(ctx.metric, base, p, ctx.run.tolerances);
      if (c.parabolic) {
        rows.push_back({"holder", "flux gap rho0=" + g6(base) + " p=" + g6(p) + " (parabolic)", kInf, "<= 1e-08", false});
        continue;
      }
      const HolderReport h = verify_flux_holder(ctx.metric, base, p, 50, ctx.run.tolerances);
      rows.push_back({"holder", "flux gap rho0=" + g6(base) + " p=" + g6(p), h.max_relative_gap, "<= 1e-08",
                      h.pass && h.max_relative_gap <= 1e-8});
    }
}

void suite_willmore(const Context& ctx, const Options& o, std::vector<CheckRow>& rows) {
  const double rho0 = o.rho0.value_or(default_rho0(ctx.metric));
  const double t_max = o.t_max == 10 ? 20 : o.t_max;
  const FlowTrack track = weak_imcf(ctx.metric, rho0, t_max, o.samples, ctx.run.tolerances);
  const WillmoreLimit w = willmore_limit(track, 0.25, ctx.run.tolerances);
  const double rel = std::abs(w.deviation_from_16pi) / (16 * kPi);
  rows.push_back({"willmore", "|W_lim - 16pi| / 16pi", rel, "<= 0.001", rel <= 1e-3});
}

void suite_isoperimetric(const Context& ctx, const Options& o, std::vector<CheckRow>& rows) {
  const auto& tol = ctx.run.tolerances;
  const std::vector<double> r_grid = o.r_grid.empty() ? default_r_grid(ctx.metric, tol) : parse_list(o.r_grid, "--r-grid");
  const MassReport h = huisken_total_mass(ctx.metric, r_grid, tol, ctx.run.report_tol);
  const double m_bound = h.extrapolated_mass + 0.1;
  const auto grid = geometric_grid(r_grid.front() / 5, r_grid.back(), 30);
  const IsoperimetricReport rep = asymptotic_isoperimetric_check(ctx.metric, m_bound, grid, tol);
  rows.push_back({"isoperimetric", "threshold radius (m_bound=" + g6(m_bound) + ")",
                  rep.threshold.value_or(kInf), "finite", rep.threshold.has_value()});
}

int cmd_verify(const Options& o) {
  Context ctx = resolve(o);
  const std::vector<std::pair<std::string, Suite>> all = {
      {"equivalence", suite_equivalence}, {"geroch", suite_geroch}, {"bmx", suite_bmx},
      {"holder", suite_holder},           {"willmore", suite_willmore}, {"isoperimetric", suite_isoperimetric}};
  std::vector<std::string> wanted;
  for (const auto& s : o.suites) {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) wanted.push_back(detail::trim(item));
  }
  if (wanted.size() == 1 && wanted[0] == "all") {
    wanted.clear();
    for (const auto& [name, fn] : all) wanted.push_back(name);
  }
  std::vector<CheckRow> rows;
  for (const auto& name : wanted) {
    bool found = false;
    for (const auto& [n, fn] : all)
      if (n == name) {
        fn(ctx, o, rows);
        found = true;
      }
    if (!found) throw ConfigError("unknown suite '" + name + "'");
  }

  bool ok = !rows.empty();
  std::printf("%-14s %-44s %-14s %-16s %s\n", "suite", "check", "value", "target", "status");
  for (const auto& r : rows) {
    ok = ok && r.pass;
    std::printf("%-14s %-44s %-14s %-16s %s\n", r.suite.c_str(), r.check.c_str(), g6(r.value).c_str(),
                r.target.c_str(), r.pass ? "PASS" : "FAIL");
  }
  std::fflush(stdout);

  if (!ctx.run.output_path.empty()) {
    auto& out = *ctx.out;
    if (is_json(ctx)) {
      Json arr = Json::array();
      for (const auto& r : rows)
        arr.push_back({{"suite", r.suite}, {"check", r.check}, {"value", r.value}, {"target", r.target},
                       {"pass", r.pass}});
      out << arr.dump() << "\n";
    } else {
      out << "suite,check,value,target,pass\n";
      for (const auto& r : rows)
        out << r.suite << ",\"" << r.check << "\"," << g17(r.value) << ",\"" << r.target << "\","
            << (r.pass ? 1 : 0) << "\n";
    }
  }
  return ok ? 0 : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasilocal masses, capacities and weak inverse mean curvature flow on rotationally symmetric 3-metrics"};
  app.require_subcommand(1);
  Options o;

  auto* sphere = app.add_subcommand("sphere", "geometry of the centered sphere at --rho");
  add_common(sphere, o);
  sphere->add_option("--rho", o.rho, "radial coordinate")->required();

  auto* cap = app.add_subcommand("capacity", "normalized p-capacity of the sphere at --rho0 (p = 1 uses the hull)");
  add_common(cap, o);
  cap->add_option("--rho0", o.rho0, "inner sphere (default: domain start, or 1 at a center)");
  cap->add_option("--p", o.p, "exponent in [1, 3)")->required();

  auto* flow = app.add_subcommand("flow", "weak inverse mean curvature flow from --rho0");
  add_common(flow, o);
  flow->add_option("--rho0", o.rho0, "initial sphere");
  flow->add_option("--tmax", o.t_max, "final flow time")->capture_default_str();
  flow->add_option("--samples", o.samples, "number of uniform time samples")->capture_default_str();

  auto* mass = app.add_subcommand("mass", "quasilocal masses along a sphere exhaustion and their limits");
  add_common(mass, o);
  mass->add_option("--p-grid", o.p_grid, "comma separated exponents (default 1,1.25,1.5,2,2.5,2.9)");
  mass->add_option("--r-grid", o.r_grid, "comma separated radii (default 50 capacitary radii times 2^k)");

  auto* verify = app.add_subcommand("verify", "run verification suites; exit 1 if any check fails");
  add_common(verify, o);
  verify->add_option("--suite", o.suites, "equivalence, geroch, bmx, holder, willmore, isoperimetric or all")
      ->required();
  verify->add_option("--p-grid", o.p_grid, "exponents for equivalence, bmx and holder");
  verify->add_option("--r-grid", o.r_grid, "radii for equivalence and isoperimetric");
  verify->add_option("--tol", o.tol, "equivalence gap tolerance (default 5e-3)");
  verify->add_option("--rho0", o.rho0, "base sphere for flow, bmx and holder suites");
  verify->add_option("--tmax", o.t_max, "flow time for geroch (willmore uses 20 unless set)");
  verify->add_option("--samples", o.samples, "flow samples")->capture_default_str();

  auto* hyp = app.add_subcommand("hypotheses", "grid check of curvature, minimal surface and isoperimetric hypotheses");
  add_common(hyp, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*sphere) return cmd_sphere(o);
    if (*cap) return cmd_capacity(o);
    if (*flow) return cmd_flow(o);
    if (*mass) return cmd_mass(o);
    if (*verify) return cmd_verify(o);
    if (*hyp) return cmd_hypotheses(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}
