// Acceptance run: one PASS/FAIL line per criterion. Exit status counts only
// failures that are not listed as known unattainable.

#include "mcfsing/cone.hpp"
#include "mcfsing/errors.hpp"
#include "mcfsing/flows.hpp"
#include "mcfsing/gaussian.hpp"
#include "mcfsing/planes.hpp"
#include "mcfsing/reifenberg.hpp"
#include "mcfsing/spacetime.hpp"
#include "mcfsing/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mcfsing;

namespace {

// Pinned tolerances.
constexpr double kMetricTol = 1e-12;
constexpr double kLadderTol = 1e-6;
constexpr double kLadderOracleRel = 1e-12;
constexpr double kMonotoneTol = 1e-8;
constexpr double kDensityRel = 0.05;
constexpr double kNeckShiftFactor = 2.0;  // in units of h
constexpr double kAxisDegrees = 1.0;
constexpr double kSymmetryTol = 1e-9;
constexpr double kSegmentTol = 0.2;
constexpr double kKochTol = 0.05;
constexpr double kBoxTol = 0.3;
constexpr double kClearingEta = 0.002;
constexpr double kGraphDelta = 1.0 / 20.0;

const double kTheta0 = 4.0 / std::exp(1.0);
const double kTheta1 = std::sqrt(2.0 * M_PI / std::exp(1.0));

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

SpaceTimePoint random_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = u(rng);
  return {x, u(rng)};
}

TimeSlicePlane random_plane(std::mt19937_64& rng, int d, int k) {
  std::normal_distribution<double> g;
  Mat m(d, k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = g(rng);
  return TimeSlicePlane(SpaceTimePoint{Vec::Zero(d), 0.0}, m);
}

double sphere_shrinker_value(int m) {
  const double area = 2.0 * std::pow(M_PI, (m + 1) / 2.0) / std::tgamma((m + 1) / 2.0);
  return area * std::pow(2.0 * m, m / 2.0) * std::pow(4.0 * M_PI, -m / 2.0) * std::exp(-m / 2.0);
}

Flow dumbbell_flow(double h) {
  RotsymControls c;
  c.h = h;
  return rotsym_mcf_run(dumbbell_profile(1.5, 0.5, 3.0), -4.5, 4.5, c);
}

const Flow& dumbbell() {
  static const Flow f = dumbbell_flow(0.01);
  return f;
}

const std::vector<SingularEvent>& dumbbell_events() {
  static const auto ev = detect_singularities(dumbbell());
  return ev;
}

const SingularEvent* find_neck(const std::vector<SingularEvent>& ev) {
  for (const auto& e : ev)
    if (e.j == 1) return &e;
  return nullptr;
}

Outcome metric() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> lam(0.1, 10.0);
  double worst_tri = 0.0, worst_dil = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = 1 + trial % 3;
    const auto p = random_point(rng, d), q = random_point(rng, d), r = random_point(rng, d);
    const double pq = parabolic_distance(p, q);
    worst_tri = std::max(worst_tri, parabolic_distance(p, r) - pq - parabolic_distance(q, r));
    const double l = lam(rng);
    const double got = parabolic_distance(parabolic_dilate(p, r, l), parabolic_dilate(q, r, l));
    worst_dil = std::max(worst_dil, std::abs(got - l * pq) / std::max(1.0, l * pq));
  }
  return {worst_tri <= kMetricTol && worst_dil <= kMetricTol,
          "1e4 triples, triangle excess " + fmt(worst_tri) + ", dilation error " + fmt(worst_dil)};
}

Outcome ladder() {
  double worst = 0.0;
  bool increasing = true;
  for (int n = 1; n <= 7; ++n) {
    const auto t = cylinder_density_table(n);
    for (int k = 0; k < n; ++k) {
      const double oracle = sphere_shrinker_value(n - k);
      worst = std::max(worst, std::abs(t[k] - oracle) / oracle);
      if (k > 0 && !(t[k] > t[k - 1])) increasing = false;
      if (!(t[k] > 1.0)) increasing = false;
    }
  }
  const auto t2 = cylinder_density_table(2);
  const double e0 = std::abs(t2[0] - kTheta0), e1 = std::abs(t2[1] - kTheta1);
  return {worst <= kLadderOracleRel && increasing && e0 <= kLadderTol && e1 <= kLadderTol,
          "n<=7 rel. error " + fmt(worst) + ", Theta_0 " + fmt(t2[0]) + ", Theta_1 " + fmt(t2[1])};
}

Outcome monotonicity() {
  const auto flow = analytic_flow({"sphere", 2, 0, 2.0}, 1.0);
  std::vector<double> taus;
  for (int i = 0; i < 50; ++i) taus.push_back(1e-3 * std::pow(900.0, i / 49.0));
  const auto off = monotonicity_check(flow, v3(0.5, 0.2, 0.0), 1.0, taus, kMonotoneTol);
  const auto centred = monotonicity_check(flow, v3(0.0, 0.0, 0.0), 1.0, taus, kMonotoneTol);
  const auto [lo, hi] = std::minmax_element(centred.f.begin(), centred.f.end());
  const double spread = *hi - *lo;
  return {off.monotone && off.worst_violation <= kMonotoneTol && spread <= kMonotoneTol &&
              std::abs(*lo - kTheta0) <= kMonotoneTol,
          "off-centre violation " + fmt(off.worst_violation) + ", centred spread " + fmt(spread)};
}

Outcome dumbbell_density() {
  const auto& ev = dumbbell_events();
  int necks = 0, spheres = 0;
  double worst = 0.0;
  for (const auto& e : ev) {
    if (e.j == 1) {
      ++necks;
      worst = std::max(worst, std::abs(e.density.value / kTheta1 - 1.0));
    } else if (e.j == 0) {
      ++spheres;
      worst = std::max(worst, std::abs(e.density.value / kTheta0 - 1.0));
    }
  }
  std::string detail = std::to_string(necks) + " neck, " + std::to_string(spheres) +
                       " spheres, worst density error " + fmt(100.0 * worst) + "%";
  bool pass = necks == 1 && spheres == 2 && worst <= kDensityRel;

  const auto fine = dumbbell_flow(0.005);
  const auto fine_ev = detect_singularities(fine);
  const auto* a = find_neck(ev);
  const auto* b = find_neck(fine_ev);
  if (a == nullptr || b == nullptr) return {false, detail + ", neck missing at h/2"};
  const double shift = parabolic_distance(a->location, b->location);
  pass = pass && shift <= kNeckShiftFactor * 0.01;
  return {pass, detail + ", neck shift under halving h " + fmt(shift)};
}

Outcome neck_cylindrical() {
  const auto& f = dumbbell();
  const auto* neck = find_neck(dumbbell_events());
  if (neck == nullptr) return {false, "no neck event"};
  double prev = std::numeric_limits<double>::infinity(), worst_angle = 0.0;
  bool monotone = true, graphical = true;
  std::string trace;
  // Scales run from large to small s.
  const auto scales = f.backward_taus(neck->location.t, 0.01, 0.1, 8);
  std::vector<double> s(scales.begin(), scales.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  for (double si : s) {
    const auto fit = cylindrical_fit(f, *neck, si);
    graphical = graphical && fit.graphical;
    if (!(fit.eta <= prev)) monotone = false;
    worst_angle = std::max(worst_angle, fit.axis_angle * 180.0 / M_PI);
    prev = fit.eta;
  }
  // Decreasing s means the rescaled flow approaches the cylinder: eta must
  // not grow as s shrinks.
  return {monotone && graphical && worst_angle < kAxisDegrees && s.size() == 8,
          "s in [0.01, 0.1], eta " + fmt(cylindrical_fit(f, *neck, s.front()).eta) + " -> " + fmt(prev) +
              ", max axis angle " + fmt(worst_angle) + " deg"};
}

Outcome torus() {
  const auto f = rotsym_torus_run(torus_profile(2.0, 0.5, 160), {});
  DetectOptions opt;
  opt.circle_samples = 256;
  const auto ev = detect_singularities(f, opt);
  if (ev.empty()) return {false, "no events"};
  bool same_time = true, all_j1 = true;
  for (const auto& e : ev) {
    same_time = same_time && e.location.t == ev[0].location.t;
    all_j1 = all_j1 && e.j == 1;
  }
  const auto rep = singular_set_report(f, ev);
  const bool slices = rep.time_slice && rep.time_slice->all_time_slices;
  std::size_t run = 0, best = 0;
  std::string deltas;
  if (rep.reifenberg) {
    const auto& d = rep.reifenberg->delta;
    for (std::size_t i = 0; i < d.size(); ++i) {
      run = (i > 0 && d[i] < d[i - 1]) ? run + 1 : 1;
      best = std::max(best, run);
      deltas += (i ? " " : "") + fmt(d[i]);
    }
  }
  return {same_time && all_j1 && slices && best >= 3,
          std::to_string(ev.size()) + " events at t = " + fmt(ev[0].location.t) + ", delta [" + deltas +
              "], longest decreasing run " + std::to_string(best)};
}

Outcome synthetic_verdicts() {
  std::vector<GeneratorSpec> specs;
  GeneratorSpec s;
  s.kind = "four_points";
  specs.push_back(s);
  s.kind = "figure1";
  s.count = 200;
  specs.push_back(s);
  s = {};
  s.kind = "three_sequences";
  specs.push_back(s);
  for (double slope : {0.0, 1.0}) {
    s = {};
    s.kind = "tilted_line";
    s.count = 101;
    s.slope = slope;
    specs.push_back(s);
  }
  std::size_t total = 0, passed = 0;
  std::string failed;
  for (const auto& spec : specs) {
    for (const auto& c : verify(spec)) {
      ++total;
      if (c.pass()) {
        ++passed;
      } else {
        failed += " " + spec.kind + "/" + c.verdict.name;
      }
    }
  }
  return {total > 0 && passed == total,
          std::to_string(passed) + "/" + std::to_string(total) + " verdicts" +
              (failed.empty() ? "" : ", failed:" + failed)};
}

Outcome symmetry() {
  std::mt19937_64 rng(4242);
  double worst = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + trial % 4;
    const int k = 1 + trial % (d - 1);
    const auto a = random_plane(rng, d, k), b = random_plane(rng, d, k);
    const double delta = one_sided_tube_constant(a, b, 1.0);
    const auto r = plane_symmetry_check(a, b, std::min(delta, 1.0));
    worst = std::max(worst, std::abs(r.forward - r.backward));
    ++checked;
  }
  return {worst <= kSymmetryTol, std::to_string(checked) + " pairs, max |forward - backward| " + fmt(worst)};
}

Outcome half_cone() {
  std::mt19937_64 rng(1357);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> size(2, 40);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + trial % 2;
    std::vector<SpaceTimePoint> pts;
    for (int i = size(rng); i > 0; --i) {
      Vec x(d);
      for (int k = 0; k < d; ++k) x[k] = u(rng);
      pts.push_back({x, u(rng)});
    }
    const PointCloud c(pts);
    for (auto dir : {ConeDirection::forward, ConeDirection::backward}) {
      const auto r = half_cone_check(c, 1.0, 1.5, dir);
      if (r.level != r.full_level) ++mismatches;
    }
  }
  return {mismatches == 0, "1000 clouds, " + std::to_string(mismatches) + " level mismatches"};
}

Outcome dimensions() {
  GeneratorSpec seg;
  seg.kind = "time_segment";
  seg.count = 4001;
  const double d_seg = ph_dimension_estimate(generate(seg)).dimension;
  GeneratorSpec koch;
  koch.kind = "koch";
  koch.level = 5;
  const double d_koch = ph_dimension_estimate(generate(koch)).dimension;
  GeneratorSpec box;
  box.kind = "spacetime_box";
  box.count = 24;
  const double d_box = ph_dimension_estimate(generate(box)).dimension;
  const double koch_target = std::log(4.0) / std::log(3.0);
  return {std::abs(d_seg - 2.0) <= kSegmentTol && std::abs(d_koch - koch_target) <= kKochTol &&
              std::abs(d_box - 4.0) <= kBoxTol,
          "time segment " + fmt(d_seg) + ", koch " + fmt(d_koch) + " (target " + fmt(koch_target) + "), box " +
              fmt(d_box)};
}

Outcome clearing() {
  const auto& f = dumbbell();
  const auto c = clearing_constants(kClearingEta, f.lambda0, f.n, 1);
  const auto cert = certify_clearing(c, perturbed_cylinders(f.n, 1, kClearingEta, 10, 11), 100, 3);
  std::string detail = "T " + fmt(c.T) + ", omega " + fmt(c.omega) + ", certificate max F " + fmt(cert.max_f);
  if (!cert.holds) return {false, detail + ", certificate fails"};
  const auto* neck = find_neck(dumbbell_events());
  if (neck == nullptr) return {false, detail + ", no neck event"};
  auto e = *neck;
  attach_eta_profile(f, e, 1e-4, 0.1);
  try {
    const auto w = clearing_window_check(f, e, kClearingEta, 0.1, c.T, c.omega);
    return {w.checked && w.cleared, detail + (w.cleared ? ", window cleared" : ", window not cleared")};
  } catch (const PreconditionFailed& err) {
    const double best = e.eta.empty() ? std::numeric_limits<double>::infinity()
                                      : *std::min_element(e.eta.begin(), e.eta.end());
    return {false, detail + ", neck window: " + err.what() + " (smallest resolved eta " + fmt(best) + ")"};
  }
}

Outcome graph_extraction() {
  GeneratorSpec curve;
  curve.kind = "slice_curve";
  curve.eps = 0.01;
  curve.count = 32;
  const auto c = generate(curve);
  const auto planes = natural_planes(curve, c);
  const auto g = extract_lipschitz_graph_fregular(c, planes, c.size() / 2, 0.5, kGraphDelta);
  const bool finite = std::isfinite(g.constant);

  const auto four = generate(GeneratorSpec{});
  int rejected = 0;
  for (int drop = 0; drop < 3; ++drop) {
    Mat span = Mat::Zero(3, 2);
    for (int col = 0, row = 0; row < 3; ++row)
      if (row != drop) span(row, col++) = 1.0;
    try {
      extract_bilipschitz_graph(four, PlaneAssignment::uniform(four, TimeSlicePlane(four[0], span)), 0, 2.5,
                                kGraphDelta);
    } catch (const PreconditionFailed&) {
      ++rejected;
    }
  }
  return {finite && rejected == 3,
          "slice curve constant " + fmt(g.constant) + ", four-point single planes rejected " +
              std::to_string(rejected) + "/3"};
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
  bool known_unattainable = false;
};

}  // namespace

int main() {
  std::cout << std::unitbuf;
  const std::vector<Criterion> criteria{
      {1, "parabolic metric and dilation", metric},
      {2, "cylinder density ladder", ladder},
      {3, "monotonicity on the shrinking sphere", monotonicity},
      {4, "dumbbell densities and neck convergence", dumbbell_density},
      {5, "neck approaches the cylinder", neck_cylindrical},
      {6, "torus singular circle", torus},
      {7, "synthetic ground truth", synthetic_verdicts},
      {8, "plane symmetry", symmetry},
      {9, "half-cone equals full cone", half_cone},
      {10, "parabolic dimension", dimensions},
      // See the README: the neck is not eta-cylindrical at any resolved scale.
      {11, "clearing-out window", clearing, true},
      {12, "graph extraction", graph_extraction},
  };
  int unexpected = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << o.detail << " ("
              << fmt(secs) << " s)";
    if (!o.pass && c.known_unattainable) std::cout << " [known unattainable]";
    std::cout << "\n";
    if (!o.pass && !c.known_unattainable) ++unexpected;
  }
  std::cout << (unexpected == 0 ? "acceptance: no unexpected failures\n"
                                : "acceptance: " + std::to_string(unexpected) + " unexpected failures\n");
  return unexpected == 0 ? 0 : 1;
}
