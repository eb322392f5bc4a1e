// mcfsing: simulate flows, analyse their singular sets, and check the
// synthetic oracle examples.
//
//   mcfsing simulate --kind dumbbell --out runs/dumbbell
//   mcfsing analyze --archive runs/dumbbell --which density
//   mcfsing verify --kind four_points
//
// Any option can also come from a TOML file given with --config; flags on
// the command line win.

#include "mcfsing/cone.hpp"
#include "mcfsing/errors.hpp"
#include "mcfsing/flows.hpp"
#include "mcfsing/gaussian.hpp"
#include "mcfsing/io.hpp"
#include "mcfsing/reifenberg.hpp"
#include "mcfsing/svg.hpp"
#include "mcfsing/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mcfsing;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitUnresolved = 3;
constexpr int kExitVerdict = 4;

struct SimulateOptions {
  std::string kind = "sphere";
  std::string profile;
  fs::path out = "mcfsing_out";
  int n = 2;
  int j = 1;
  double r0 = 1.0;
  double t_end = std::numeric_limits<double>::infinity();
  double snapshot_interval = 0.01;
  // dumbbell / profile runs
  double bulb = 1.5;
  double neck = 0.5;
  double gap = 3.0;
  double h = 0.01;
  double cfl = 0.4;
  double pinch_factor = 1e-3;
  double drop_fraction = 0.1;
  bool periodic = false;
  // torus
  double r_center = 2.0;
  double rho = 0.5;
  std::size_t points = 160;
  double torus_cfl = 0.2;
  double collapse_fraction = 0.05;
};

struct DetectFlags {
  double tau_max = 0.25;
  double tau_min = 1e-4;
  std::size_t tau_count = 12;
  double residual_threshold = 0.02;
  double class_tolerance = 0.05;
  std::size_t circle_samples = 64;

  DetectOptions options() const {
    DetectOptions o;
    o.density.tau_max = tau_max;
    o.density.tau_min = tau_min;
    o.density.count = tau_count;
    o.density.residual_threshold = residual_threshold;
    o.class_tolerance = class_tolerance;
    o.circle_samples = circle_samples;
    return o;
  }
};

struct AnalyzeOptions {
  fs::path archive;
  fs::path out;
  std::string which = "density";
  bool redetect = false;
  // monotonicity
  std::string x;
  double t = std::numeric_limits<double>::quiet_NaN();
  double mono_tau_min = 1e-3;
  double mono_tau_max = 0.5;
  std::size_t mono_count = 50;
  double mono_tolerance = 1e-8;
  // cylindrical fit
  double s_min = 1e-4;
  double s_max = 0.1;
  std::size_t s_count = 16;
  double ball_factor = 2.0;
  // cone
  std::size_t cone_scales = 12;
  // clearing
  double eta = 0.002;
  double lambda0 = std::numeric_limits<double>::quiet_NaN();
  int clearing_j = 1;
  double tau = 0.1;
  std::size_t s_samples = 8;
};

struct SyntheticOptions {
  GeneratorSpec spec;
  fs::path out = "mcfsing_out";
};

Vec parse_vec(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InvalidArgument("not a number: '" + item + "'");
    }
  }
  return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json verdict_json(const VerdictCheck& c) {
  return Json{{"name", c.verdict.name},
              {"statement", c.verdict.statement},
              {"expected", c.verdict.expected},
              {"observed", c.observed},
              {"value", std::isfinite(c.value) ? Json(c.value) : Json(std::to_string(c.value))},
              {"detail", c.detail},
              {"pass", c.pass()}};
}

// Profile files hold "x,u" rows; u is interpolated linearly.
std::function<double(double)> load_profile(const fs::path& path, double& a, double& b) {
  std::vector<std::pair<double, double>> rows;
  std::stringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    const Vec v = parse_vec(line);
    if (v.size() != 2) throw InvalidArgument("profile rows must be 'x,u'");
    if (!(v[1] >= 0.0)) throw InvalidArgument("profile radius must be nonnegative");
    rows.emplace_back(v[0], v[1]);
  }
  if (rows.size() < 3) throw InvalidArgument("profile needs at least three rows");
  std::sort(rows.begin(), rows.end());
  a = rows.front().first;
  b = rows.back().first;
  return [rows](double x) {
    auto it = std::lower_bound(rows.begin(), rows.end(), std::make_pair(x, -1.0));
    if (it == rows.begin()) return rows.front().second;
    if (it == rows.end()) return rows.back().second;
    const auto& [x1, u1] = *it;
    const auto& [x0, u0] = *(it - 1);
    return u0 + (u1 - u0) * (x - x0) / (x1 - x0);
  };
}

Flow run_simulation(const SimulateOptions& o) {
  if (o.kind == "sphere" || o.kind == "cylinder" || o.kind == "plane") {
    AnalyticSpec spec{o.kind, o.n, o.kind == "cylinder" ? o.j : 0, o.r0};
    double t_end = o.t_end;
    if (!std::isfinite(t_end)) {
      const double T = analytic_extinction_time(spec);
      t_end = std::isfinite(T) ? T : 1.0;
    }
    return analytic_flow(spec, t_end, o.snapshot_interval);
  }
  if (o.kind == "dumbbell" || o.kind == "profile") {
    RotsymControls c;
    c.n = o.n;
    c.h = o.h;
    c.cfl = o.cfl;
    c.t_end = o.t_end;
    c.snapshot_interval = o.snapshot_interval;
    c.drop_fraction = o.drop_fraction;
    c.pinch_factor = o.pinch_factor;
    c.periodic = o.periodic;
    if (o.kind == "dumbbell") {
      if (!(o.bulb > 0.0 && o.neck > 0.0 && o.gap > 0.0))
        throw InvalidArgument("dumbbell radii and gap must be positive");
      const double half = o.gap + o.bulb;
      return rotsym_mcf_run(dumbbell_profile(o.bulb, o.neck, o.gap), -half, half, c);
    }
    if (o.profile.empty()) throw InvalidArgument("--profile is required for kind 'profile'");
    double a = 0.0, b = 0.0;
    auto u0 = load_profile(o.profile, a, b);
    return rotsym_mcf_run(u0, a, b, c);
  }
  if (o.kind == "torus") {
    if (!(o.rho > 0.0 && o.r_center > o.rho))
      throw InvalidArgument("torus needs 0 < rho < r-center");
    TorusControls c;
    c.n = o.n;
    c.points = o.points;
    c.cfl = o.torus_cfl;
    c.t_end = o.t_end;
    c.snapshot_interval = o.snapshot_interval;
    c.collapse_fraction = o.collapse_fraction;
    return rotsym_torus_run(torus_profile(o.r_center, o.rho, o.points), c);
  }
  throw InvalidArgument("unknown simulation kind '" + o.kind + "'");
}

int cmd_simulate(const SimulateOptions& o, const DetectFlags& d) {
  Flow flow = run_simulation(o);
  fs::create_directories(o.out);
  std::vector<SingularEvent> events;
  if (flow.status == RunStatus::resolved) events = detect_singularities(flow, d.options());
  write_flow_archive(o.out, flow, &events);
  std::cout << "kind " << o.kind << ": " << flow.snapshots.size() << " snapshots, "
            << flow.pinches.size() << " pinches, " << events.size() << " events";
  if (!flow.note.empty()) std::cout << " (" << flow.note << ")";
  std::cout << "\n";
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (i == 8 && events.size() > 9) {
      std::cout << "  ... " << events.size() - 8 << " more in events.json\n";
      break;
    }
    std::cout << "  t=" << e.location.t << " x=" << e.location.x.transpose()
              << " density=" << e.density.value << " j=" << e.j << "\n";
  }
  return flow.status == RunStatus::resolved ? kExitOk : kExitUnresolved;
}

std::vector<SingularEvent> load_events(const Flow& flow, const AnalyzeOptions& o, const DetectFlags& d) {
  if (!o.redetect && fs::exists(o.archive / "events.json")) return read_events(o.archive);
  return detect_singularities(flow, d.options());
}

int analyze_density(const Flow& flow, const std::vector<SingularEvent>& events, const fs::path& out) {
  CsvTable table{{"event", "tau", "f"}, {}};
  CsvTable summary{{"event", "t", "x1", "density", "residual", "j", "classified", "monotone"}, {}};
  PlotSpec plot{"Gaussian density traces", "tau", "F", true, false, "", {}};
  const auto ladder = cylinder_density_table(flow.n);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    for (std::size_t k = 0; k < e.density.tau.size(); ++k)
      table.rows.push_back({double(i), e.density.tau[k], e.density.f[k]});
    summary.rows.push_back({double(i), e.location.t, e.location.x[0], e.density.value, e.density.residual,
                            double(e.j), double(e.classified), double(e.density.monotone)});
    plot.series.push_back({"event " + std::to_string(i), e.density.tau, e.density.f, false});
  }
  std::ostringstream note;
  note << "Theta_k:";
  for (double v : ladder) note << " " << v;
  plot.annotation = note.str();
  write_csv(out / "density.csv", table);
  write_csv(out / "events.csv", summary);
  write_svg(out / "density.svg", plot);
  return kExitOk;
}

int analyze_monotonicity(const Flow& flow, const std::vector<SingularEvent>& events,
                         const AnalyzeOptions& o) {
  Vec x = o.x.empty() ? Vec(Vec::Zero(flow.ambient_dim())) : parse_vec(o.x);
  double t = o.t;
  if (!std::isfinite(t)) t = events.empty() ? flow.t_end : events.front().location.t;
  std::vector<double> taus;
  for (std::size_t i = 0; i < o.mono_count; ++i) {
    const double f = o.mono_count > 1 ? double(i) / double(o.mono_count - 1) : 0.0;
    taus.push_back(o.mono_tau_min * std::pow(o.mono_tau_max / o.mono_tau_min, f));
  }
  if (!flow.analytic) {
    // Simulated flows only exist at snapshot times.
    std::vector<double> avail = flow.backward_taus(t, o.mono_tau_min, o.mono_tau_max, o.mono_count);
    taus.assign(avail.rbegin(), avail.rend());
  }
  const auto rep = monotonicity_check(flow, x, t, taus, o.mono_tolerance);
  CsvTable table{{"tau", "f"}, {}};
  for (std::size_t i = 0; i < rep.tau.size(); ++i) table.rows.push_back({rep.tau[i], rep.f[i]});
  write_csv(o.out / "monotonicity.csv", table);
  write_svg(o.out / "monotonicity.svg",
            PlotSpec{"F along the flow", "tau", "F", true, false, "", {{"F", rep.tau, rep.f, false}}});
  Json v{{"x", std::vector<double>(x.data(), x.data() + x.size())},
         {"t", t},
         {"tolerance", o.mono_tolerance},
         {"worst_violation", rep.worst_violation},
         {"monotone", rep.monotone}};
  write_text_atomic(o.out / "monotonicity.json", dump(v));
  return rep.monotone ? kExitOk : kExitVerdict;
}

int analyze_cylfit(const Flow& flow, const std::vector<SingularEvent>& events, const AnalyzeOptions& o) {
  CsvTable table{{"event", "j", "s", "eta", "offset", "max_radial", "max_slope", "axis_angle_deg", "graphical"},
                 {}};
  PlotSpec plot{"cylindrical fit", "s", "eta", true, true, "", {}};
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (!e.classified) continue;
    PlotSeries series{"event " + std::to_string(i), {}, {}, false};
    for (double s : flow.backward_taus(e.location.t, o.s_min, o.s_max, o.s_count)) {
      const auto fit = cylindrical_fit(flow, e, s, o.ball_factor);
      table.rows.push_back({double(i), double(e.j), s, fit.eta, fit.offset, fit.max_radial, fit.max_slope,
                            fit.axis_angle * 180.0 / M_PI, double(fit.graphical)});
      series.x.push_back(s);
      series.y.push_back(fit.eta);
    }
    plot.series.push_back(std::move(series));
  }
  write_csv(o.out / "cylfit.csv", table);
  write_svg(o.out / "cylfit.svg", plot);
  return kExitOk;
}

Json strata_json(const Stratification& st) {
  Json strata = Json::array();
  for (const auto& s : st.strata) strata.push_back(s);
  return Json{{"n", st.n},
              {"strata", strata},
              {"thresholds", st.thresholds},
              {"excluded", st.excluded},
              {"isolation_radius", st.isolation_radius},
              {"s0_isolated", st.s0_isolated},
              {"top_compact", st.top_compact},
              {"warnings", st.warnings}};
}

void plot_singular_set(const std::vector<SingularEvent>& events, const fs::path& path) {
  PlotSeries pts{"events", {}, {}, true};
  for (const auto& e : events) {
    pts.x.push_back(e.location.x[0]);
    pts.y.push_back(e.location.t);
  }
  write_svg(path, PlotSpec{"singular set", "x1", "t", false, false,
                           "parabolic aspect: t carries length^2 units", {pts}});
}

int analyze_strata(const Flow& flow, const std::vector<SingularEvent>& events, const fs::path& out) {
  const auto st = stratify(events, flow.n);
  write_text_atomic(out / "strata.json", dump(strata_json(st)));
  plot_singular_set(events, out / "singular_set.svg");
  return kExitOk;
}

int analyze_reifenberg(const Flow& flow, const std::vector<SingularEvent>& events, const fs::path& out) {
  const auto rep = singular_set_report(flow, events);
  Json v{{"events", rep.cloud.size()}, {"notes", rep.notes}};
  if (rep.reifenberg) {
    CsvTable table{{"r", "delta"}, {}};
    for (std::size_t i = 0; i < rep.reifenberg->scales.size(); ++i)
      table.rows.push_back({rep.reifenberg->scales[i], rep.reifenberg->delta[i]});
    write_csv(out / "reifenberg.csv", table);
    write_svg(out / "reifenberg.svg",
              PlotSpec{"strong Reifenberg profile", "r", "delta", true, true, "",
                       {{"delta", rep.reifenberg->scales, rep.reifenberg->delta, false}}});
    v["floor"] = rep.reifenberg->floor;
    v["vanishing"] = rep.reifenberg->vanishing;
  }
  if (rep.time_slice) {
    v["all_time_slices"] = rep.time_slice->all_time_slices;
    v["distinct_times"] = rep.time_slice->distinct_times;
  }
  write_text_atomic(out / "reifenberg.json", dump(v));
  return kExitOk;
}

int analyze_cone(const std::vector<SingularEvent>& events, const AnalyzeOptions& o) {
  std::vector<SpaceTimePoint> pts;
  for (const auto& e : events) pts.push_back(e.location);
  if (pts.size() < 2) throw PreconditionFailed("cone profile needs at least two events");
  const PointCloud cloud(pts);
  const double hi = parabolic_diameter(cloud);
  const double lo = std::max(sampling_floor(cloud), hi * 1e-3);
  std::vector<double> grid;
  for (std::size_t i = 0; i < o.cone_scales; ++i) {
    const double f = o.cone_scales > 1 ? double(i) / double(o.cone_scales - 1) : 0.0;
    grid.push_back(hi * std::pow(lo / hi, f));
  }
  const auto prof = cone_profile(cloud, grid);
  CsvTable table{{"r0", "gamma_star"}, {}};
  for (std::size_t i = 0; i < prof.r0.size(); ++i) table.rows.push_back({prof.r0[i], prof.gamma_star[i]});
  write_csv(o.out / "cone.csv", table);
  write_svg(o.out / "cone.svg", PlotSpec{"cone constant", "r0", "gamma*", true, true, "",
                                         {{"gamma*", prof.r0, prof.gamma_star, false}}});
  write_text_atomic(o.out / "cone.json",
                    dump(Json{{"vanishing", prof.vanishing}, {"monotone", prof.monotone}}));
  return kExitOk;
}

Json window_json(const ClearingWindowReport& w) {
  return Json{{"checked", w.checked},     {"cleared", w.cleared},   {"s", w.s},
              {"ball_radius", w.ball_radius}, {"t_begin", w.t_begin}, {"t_end", w.t_end},
              {"closest", w.closest},     {"first_violation_s", w.first_violation_s},
              {"first_violation_t", w.first_violation_t}};
}

int analyze_clearing(const Flow& flow, std::vector<SingularEvent> events, const AnalyzeOptions& o) {
  const double lambda0 = std::isfinite(o.lambda0) ? o.lambda0 : flow.lambda0;
  const auto c = clearing_constants(o.eta, lambda0, flow.n, o.clearing_j);
  Json v{{"constants",
          Json{{"n", c.n}, {"j", c.j}, {"eta", c.eta}, {"lambda0", c.lambda0}, {"T", c.T},
               {"omega", c.omega}, {"c_n", c.c_n}, {"near_term", c.near_term},
               {"far_term", c.far_term}, {"window_start", c.window_start},
               {"window_end", c.window_end}, {"window_nonempty", c.window_nonempty}}}};
  Json per = Json::array();
  bool all_cleared = true;
  for (auto& e : events) {
    if (e.j != o.clearing_j) continue;
    attach_eta_profile(flow, e, o.s_min, std::min(o.s_max, o.tau), o.s_samples, o.ball_factor);
    Json item{{"location", to_json(e.location)}, {"eta_s", e.eta_s}, {"eta", e.eta}};
    try {
      const auto w = clearing_window_check(flow, e, o.eta, o.tau, c.T, c.omega, o.s_samples);
      item["window"] = window_json(w);
      all_cleared = all_cleared && w.cleared;
    } catch (const PreconditionFailed& err) {
      item["precondition_failed"] = err.what();
      all_cleared = false;
    }
    item["scan"] = window_json(clearing_window_scan(flow, e.location, o.eta, o.tau, c.T, c.omega, o.s_samples));
    per.push_back(item);
  }
  if (per.empty()) all_cleared = false;
  v["events"] = per;
  v["verified"] = all_cleared;
  write_text_atomic(o.out / "clearing.json", dump(v));
  return all_cleared ? kExitOk : kExitVerdict;
}

int cmd_analyze(AnalyzeOptions o, const DetectFlags& d) {
  if (o.out.empty()) o.out = o.archive / "analysis";
  const Flow flow = read_flow_archive(o.archive);
  const auto events = load_events(flow, o, d);
  fs::create_directories(o.out);
  if (o.which == "density") return analyze_density(flow, events, o.out);
  if (o.which == "monotonicity") return analyze_monotonicity(flow, events, o);
  if (o.which == "cylfit") return analyze_cylfit(flow, events, o);
  if (o.which == "strata") return analyze_strata(flow, events, o.out);
  if (o.which == "reifenberg") return analyze_reifenberg(flow, events, o.out);
  if (o.which == "cone") return analyze_cone(events, o);
  if (o.which == "clearing") return analyze_clearing(flow, events, o);
  throw InvalidArgument("unknown analysis '" + o.which + "'");
}

int cmd_synthetic(const SyntheticOptions& o) {
  const PointCloud cloud = generate(o.spec);
  fs::create_directories(o.out);
  write_text_atomic(o.out / "cloud.json", dump(to_json(cloud)));
  CsvTable table{{}, {}};
  for (int i = 0; i < cloud.ambient_dim(); ++i) table.header.push_back("x" + std::to_string(i + 1));
  table.header.push_back("t");
  PlotSeries pts{o.spec.kind, {}, {}, true};
  for (const auto& p : cloud) {
    std::vector<double> row(p.x.data(), p.x.data() + p.x.size());
    row.push_back(p.t);
    table.rows.push_back(row);
    pts.x.push_back(p.x[0]);
    pts.y.push_back(p.t);
  }
  write_csv(o.out / "cloud.csv", table);
  write_svg(o.out / "cloud.svg", PlotSpec{o.spec.kind, "x1", "t", false, false,
                                          "parabolic aspect: t carries length^2 units", {pts}});
  std::cout << o.spec.kind << ": " << cloud.size() << " points\n";
  return kExitOk;
}

int cmd_verify(const SyntheticOptions& o) {
  const auto checks = verify(o.spec);
  Json arr = Json::array();
  bool ok = true;
  for (const auto& c : checks) {
    arr.push_back(verdict_json(c));
    ok = ok && c.pass();
    std::cout << (c.pass() ? "PASS " : "FAIL ") << c.verdict.name << "  expected=" << c.verdict.expected
              << " observed=" << c.observed << "  " << c.detail << "\n";
  }
  fs::create_directories(o.out);
  write_text_atomic(o.out / "verdicts.json",
                    dump(Json{{"kind", o.spec.kind}, {"eps", o.spec.eps}, {"count", o.spec.count},
                              {"level", o.spec.level}, {"slope", o.spec.slope}, {"verdicts", arr}}));
  return ok ? kExitOk : kExitVerdict;
}

int cmd_report(const AnalyzeOptions& o0, const DetectFlags& d) {
  AnalyzeOptions o = o0;
  if (o.out.empty()) o.out = o.archive / "report";
  const Flow flow = read_flow_archive(o.archive);
  const auto events = load_events(flow, o, d);
  fs::create_directories(o.out);
  analyze_density(flow, events, o.out);
  analyze_strata(flow, events, o.out);
  analyze_reifenberg(flow, events, o.out);
  Json summary{{"status", flow.status == RunStatus::resolved ? "resolved" : "unresolved"},
               {"n", flow.n},
               {"lambda0", flow.lambda0},
               {"t_end", flow.t_end},
               {"snapshots", flow.snapshots.size()},
               {"events", Json::array()}};
  for (const auto& e : events) summary["events"].push_back(to_json(e));
  write_text_atomic(o.out / "report.json", dump(summary));
  std::cout << "report written to " << o.out.string() << "\n";
  return flow.status == RunStatus::resolved ? kExitOk : kExitUnresolved;
}

void add_detect_flags(CLI::App* app, DetectFlags& d) {
  app->add_option("--tau-max", d.tau_max, "largest tau of the density grid");
  app->add_option("--tau-min", d.tau_min, "smallest tau of the density grid");
  app->add_option("--tau-count", d.tau_count, "density grid size");
  app->add_option("--residual-threshold", d.residual_threshold, "density extrapolation residual that flags an event");
  app->add_option("--class-tolerance", d.class_tolerance, "relative distance to Theta_k for classification");
  app->add_option("--circle-samples", d.circle_samples, "points per pinched circle");
}

void add_generator_flags(CLI::App* app, SyntheticOptions& o) {
  std::string kinds;
  for (const auto& k : generator_kinds()) kinds += (kinds.empty() ? "" : "|") + k;
  app->add_option("--kind", o.spec.kind, kinds)->required();
  app->add_option("--eps", o.spec.eps);
  app->add_option("--count", o.spec.count);
  app->add_option("--level", o.spec.level, "Koch recursion depth");
  app->add_option("--slope", o.spec.slope, "tilted_line: t = slope * x");
  app->add_option("--dimension", o.spec.dimension);
  app->add_option("--out", o.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singular sets of mean curvature flow: simulation and geometric analysis"};
  app.set_config("--config", "", "TOML file with option values");
  app.require_subcommand(1);

  SimulateOptions sim;
  DetectFlags detect;
  auto* s = app.add_subcommand("simulate", "run a flow and write its archive");
  s->add_option("--kind", sim.kind, "sphere|cylinder|plane|dumbbell|torus|profile");
  s->add_option("--profile", sim.profile, "CSV of x,u rows (kind profile)");
  s->add_option("--out", sim.out);
  s->add_option("--n", sim.n, "hypersurface dimension");
  s->add_option("--j", sim.j, "cylinder axis dimension");
  s->add_option("--r0", sim.r0, "initial radius");
  s->add_option("--t-end", sim.t_end);
  s->add_option("--snapshot-interval", sim.snapshot_interval);
  s->add_option("--bulb", sim.bulb);
  s->add_option("--neck", sim.neck);
  s->add_option("--gap", sim.gap);
  s->add_option("--spacing", sim.h, "grid spacing h");
  s->add_option("--cfl", sim.cfl);
  s->add_option("--pinch-factor", sim.pinch_factor);
  s->add_option("--drop-fraction", sim.drop_fraction);
  s->add_flag("--periodic", sim.periodic);
  s->add_option("--r-center", sim.r_center);
  s->add_option("--rho", sim.rho);
  s->add_option("--points", sim.points);
  s->add_option("--torus-cfl", sim.torus_cfl);
  s->add_option("--collapse-fraction", sim.collapse_fraction);
  add_detect_flags(s, detect);

  AnalyzeOptions an;
  auto* a = app.add_subcommand("analyze", "analyses of a flow archive");
  a->add_option("--archive", an.archive)->required();
  a->add_option("--which", an.which, "density|monotonicity|cylfit|strata|reifenberg|cone|clearing");
  a->add_option("--out", an.out, "defaults to <archive>/analysis");
  a->add_flag("--redetect", an.redetect, "ignore events.json");
  a->add_option("--x", an.x, "monotonicity centre, comma separated");
  a->add_option("--t", an.t, "monotonicity time");
  a->add_option("--mono-tau-min", an.mono_tau_min);
  a->add_option("--mono-tau-max", an.mono_tau_max);
  a->add_option("--mono-count", an.mono_count);
  a->add_option("--mono-tolerance", an.mono_tolerance);
  a->add_option("--s-min", an.s_min);
  a->add_option("--s-max", an.s_max);
  a->add_option("--s-count", an.s_count);
  a->add_option("--ball-factor", an.ball_factor);
  a->add_option("--cone-scales", an.cone_scales);
  a->add_option("--eta", an.eta, "clearing cylindricality level");
  a->add_option("--lambda0", an.lambda0, "entropy bound (default: the archive's)");
  a->add_option("--clearing-j", an.clearing_j);
  a->add_option("--tau", an.tau, "clearing time-scale");
  a->add_option("--s-samples", an.s_samples);
  add_detect_flags(a, detect);

  AnalyzeOptions rep;
  auto* r = app.add_subcommand("report", "density, strata and singular-set report of an archive");
  r->add_option("--archive", rep.archive)->required();
  r->add_option("--out", rep.out, "defaults to <archive>/report");
  r->add_flag("--redetect", rep.redetect);
  add_detect_flags(r, detect);

  SyntheticOptions syn;
  auto* g = app.add_subcommand("synthetic", "write a synthetic point cloud");
  add_generator_flags(g, syn);
  SyntheticOptions ver;
  auto* v = app.add_subcommand("verify", "check the ground-truth verdicts of a synthetic example");
  add_generator_flags(v, ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*s) return cmd_simulate(sim, detect);
    if (*a) return cmd_analyze(an, detect);
    if (*r) return cmd_report(rep, detect);
    if (*g) return cmd_synthetic(syn);
    if (*v) return cmd_verify(ver);
  } catch (const NumericalFailure& e) {
    std::cerr << "unresolved: " << e.what() << "\n";
    return kExitUnresolved;
  } catch (const LemmaViolation& e) {
    std::cerr << "lemma violation: " << e.what() << "\n";
    return kExitVerdict;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
