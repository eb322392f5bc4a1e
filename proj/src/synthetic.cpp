#include "mcfsing/synthetic.hpp"

#include "mcfsing/cone.hpp"
#include "mcfsing/errors.hpp"
#include "mcfsing/planes.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mcfsing {

namespace {

const std::vector<std::string> kKinds = {
    "figure1",      "four_points",  "three_sequences", "koch",
    "tilted_line",  "parabolic_cone_boundary",          "slice_disk",
    "time_segment", "spacetime_box", "spatial_segment", "slice_curve"};

SpaceTimePoint pt(std::initializer_list<double> x, double t = 0.0) { return make_point(x, t); }

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<Eigen::Vector2d> koch_vertices(int level) {
  std::vector<Eigen::Vector2d> pts = {{0.0, 0.0}, {1.0, 0.0}};
  const double c = std::cos(M_PI / 3.0);
  const double s = std::sin(M_PI / 3.0);
  for (int l = 0; l < level; ++l) {
    std::vector<Eigen::Vector2d> next;
    next.reserve(4 * pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const Eigen::Vector2d a = pts[i];
      const Eigen::Vector2d d = (pts[i + 1] - a) / 3.0;
      const Eigen::Vector2d peak(c * d.x() - s * d.y(), s * d.x() + c * d.y());
      next.push_back(a);
      next.push_back(a + d);
      next.push_back(a + d + peak);
      next.push_back(a + 2.0 * d);
    }
    next.push_back(pts.back());
    pts.swap(next);
  }
  return pts;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool rejected(const std::function<void()>& f, std::string& why) {
  try {
    f();
  } catch (const PreconditionFailed& e) {
    why = e.what();
    return true;
  } catch (const InjectivityFailure& e) {
    why = e.what();
    return true;
  }
  return false;
}

bool all_same_time(const PointCloud& cloud) {
  for (const auto& p : cloud) {
    if (p.t != cloud[0].t) return false;
  }
  return true;
}

VerdictCheck dimension_check(const Verdict& v, const PointCloud& cloud, double target, double tol) {
  VerdictCheck c{v, false, 0.0, {}};
  const auto est = ph_dimension_estimate(cloud);
  c.value = est.dimension;
  c.observed = std::abs(est.dimension - target) <= tol;
  c.detail = "estimate " + fmt(est.dimension) + " +- " + fmt(est.half_width) + ", target " +
             fmt(target) + " +- " + fmt(tol);
  return c;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
    throw InvalidArgument("unknown generator kind '" + kind + "'");
  }
  if ((kind == "four_points" || kind == "three_sequences") && !(eps > 0.0 && eps < 1.0)) {
    throw InvalidArgument("eps must lie in (0, 1)");
  }
  if (kind == "slice_curve" && !(eps >= 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in [0, 1)");
  if (count < 2) throw InvalidArgument("count must be at least 2");
  if (level < 0 || level > 9) throw InvalidArgument("koch level must lie in [0, 9]");
  if (!std::isfinite(slope)) throw InvalidArgument("slope must be finite");
  if (kind == "parabolic_cone_boundary" && (dimension < 1 || dimension > 2)) {
    throw InvalidArgument("cone boundary dimension must be 1 or 2");
  }
  if (kind == "slice_disk" && (dimension < 1 || dimension > 3)) {
    throw InvalidArgument("disk dimension must lie in [1, 3]");
  }
  if (kind == "three_sequences" && std::pow(eps, 2.0 * count + 2.0) < 1e-280) {
    throw InvalidArgument("three_sequences underflows for this eps and count");
  }
  if (kind == "spacetime_box" && count > 40) throw InvalidArgument("spacetime_box count must be <= 40");
}

std::vector<std::string> generator_kinds() { return kKinds; }

PointCloud generate(const GeneratorSpec& spec) {
  spec.validate();
  const auto& k = spec.kind;
  std::vector<SpaceTimePoint> pts;
  if (k == "figure1") {
    for (std::size_t i = 1; i <= spec.count; ++i) {
      const double x = 1.0 / static_cast<double>(i);
      pts.push_back(pt({x}, std::pow(x, 4)));
    }
    pts.push_back(pt({0.0}, 0.0));
  } else if (k == "four_points") {
    const double e = spec.eps;
    pts = {pt({0, 0, 0}), pt({1, 0, 0}), pt({0, e, 0}), pt({1, 0, e})};
  } else if (k == "three_sequences") {
    const double e = spec.eps;
    for (std::size_t n = 1; n <= spec.count; ++n) {
      const double m = static_cast<double>(n);
      pts.push_back(pt({std::pow(e, m), 0, 0}));
      pts.push_back(pt({std::pow(e, 2 * m), std::pow(e, 2 * m + 1), 0}));
      pts.push_back(pt({std::pow(e, 2 * m + 1), 0, std::pow(e, 2 * m + 2)}));
    }
    pts.push_back(pt({0, 0, 0}));
  } else if (k == "koch") {
    for (const auto& v : koch_vertices(spec.level)) pts.push_back(pt({v.x(), v.y()}));
  } else if (k == "tilted_line") {
    for (double x : linspace(0.0, 1.0, spec.count)) pts.push_back(pt({x}, spec.slope * x));
  } else if (k == "parabolic_cone_boundary") {
    if (spec.dimension == 1) {
      for (double x : linspace(-1.0, 1.0, spec.count)) {
        pts.push_back(pt({x}, x * x));
        if (x != 0.0) pts.push_back(pt({x}, -x * x));
      }
    } else {
      const auto g = linspace(-1.0, 1.0, spec.count);
      for (double x : g) {
        for (double y : g) {
          const double r2 = x * x + y * y;
          if (r2 > 1.0) continue;
          pts.push_back(pt({x, y}, r2));
          if (r2 != 0.0) pts.push_back(pt({x, y}, -r2));
        }
      }
    }
  } else if (k == "slice_disk") {
    const int d = spec.dimension;
    const auto g = linspace(-1.0, 1.0, spec.count);
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      Vec x = Vec::Zero(d + 1);
      for (int i = 0; i < d; ++i) x[i] = g[idx[i]];
      if (x.squaredNorm() <= 1.0) pts.push_back({x, 0.0});
      int i = 0;
      while (i < d && ++idx[i] == g.size()) idx[i++] = 0;
      if (i == d) break;
    }
  } else if (k == "time_segment") {
    for (double t : linspace(0.0, 1.0, spec.count)) pts.push_back(pt({0.0}, t));
  } else if (k == "spacetime_box") {
    // Time spacing is the square of the spatial spacing, so parabolic boxes
    // at every resolved scale see the same sampling density.
    const auto xs = linspace(0.0, 1.0, spec.count);
    const auto ts = linspace(0.0, 1.0, (spec.count - 1) * (spec.count - 1) + 1);
    for (double t : ts) {
      for (double x : xs) {
        for (double y : xs) pts.push_back(pt({x, y}, t));
      }
    }
  } else if (k == "spatial_segment") {
    for (double x : linspace(0.0, 1.0, spec.count)) pts.push_back(pt({x}, 0.0));
  } else if (k == "slice_curve") {
    for (double x : linspace(-1.0, 1.0, spec.count)) pts.push_back(pt({x, spec.eps * x * x}));
  }
  return PointCloud(std::move(pts));
}

PlaneAssignment natural_planes(const GeneratorSpec& spec, const PointCloud& cloud) {
  const auto& k = spec.kind;
  PlaneAssignment a;
  if (k == "four_points") {
    a.k = 2;
    Mat z0(3, 2);
    z0 << 1, 0, 0, 1, 0, 0;
    Mat y0(3, 2);
    y0 << 1, 0, 0, 0, 0, 1;
    const Mat* span[4] = {&z0, &y0, &z0, &y0};
    for (std::size_t i = 0; i < 4; ++i) a.planes.emplace_back(cloud[i], *span[i]);
  } else if (k == "three_sequences" || k == "tilted_line" || k == "figure1" ||
             k == "spatial_segment") {
    a.k = 1;
    for (const auto& p : cloud) a.planes.push_back(TimeSlicePlane::coordinate(p, 1));
  } else if (k == "slice_disk") {
    a.k = spec.dimension;
    for (const auto& p : cloud) a.planes.push_back(TimeSlicePlane::coordinate(p, spec.dimension));
  } else if (k == "slice_curve") {
    a.k = 1;
    for (const auto& p : cloud) a.planes.emplace_back(p, vec({1.0, 2.0 * spec.eps * p.x[0]}));
  } else {
    throw InvalidArgument("no natural plane assignment for '" + k + "'");
  }
  a.validate(cloud);
  return a;
}

std::vector<Verdict> ground_truth(const GeneratorSpec& spec) {
  spec.validate();
  const auto& k = spec.kind;
  if (k == "four_points") {
    return {
        {"strong_2_reifenberg_stated_planes",
         "defect <= eps at every point and every scale below 2 with planes z=0, y=0, z=0, y=0", true},
        {"strong_1_reifenberg_scale_2", "some line per point gives defect <= eps below scale 2", false},
        {"full_2_reifenberg_stated_planes", "two-sided closeness <= eps at scale 2", false},
        {"single_plane_extraction_rejected", "graph extraction over the single plane z=0 is refused", true},
    };
  }
  if (k == "figure1") {
    return {
        {"two_holder_graph", "t is a single-valued function of x with finite 2-Holder constant", true},
        {"holder_constant_vanishing", "the 2-Holder constant vanishes at small scales", true},
        {"non_constant", "the time function is not constant", true},
    };
  }
  if (k == "three_sequences") {
    return {
        {"origin_strong_1_reifenberg", "at the origin the x-axis has defect <= eps at every scale", true},
        {"uniform_scale", "the radius below which the defect stays <= 1/2 is bounded below", false},
    };
  }
  if (k == "tilted_line") {
    const bool flat = spec.slope == 0.0;
    return {
        {"slice_1_reifenberg", "time-slice lines give defect <= 1/2 below scale 1/2", flat},
        {"two_holder_graph", "t is a 2-Holder function of x", flat},
    };
  }
  if (k == "koch") {
    std::vector<Verdict> v = {{"in_slice", "all points share one time", true}};
    if (spec.level >= 5) {
      v.push_back({"dimension_log4_log3", "parabolic dimension within 0.05 of log 4 / log 3", true});
    }
    return v;
  }
  if (k == "parabolic_cone_boundary") {
    return {
        {"vertex_cone_gamma_one", "every point lies in the gamma = 1 cone at the origin", true},
        {"vertex_cone_sharp", "the gamma = 0.9 cone at the origin misses points", true},
        {"two_holder_graph", "t is a single-valued function of x", false},
    };
  }
  if (k == "slice_disk") {
    return {
        {"in_slice_reifenberg", "defect 0 with the disk plane at every point", true},
        {"all_time_slices", "the time-slice test places the set in one slice", true},
    };
  }
  if (k == "time_segment") {
    if (spec.count < 200) return {};
    return {{"dimension_two", "parabolic dimension within 0.2 of 2", true}};
  }
  if (k == "spacetime_box") {
    if (spec.count < 16) return {};
    return {{"dimension_four", "parabolic dimension within 0.3 of 4", true}};
  }
  if (k == "spatial_segment") {
    if (spec.count < 200) return {};
    return {{"dimension_one", "parabolic dimension within 0.1 of 1", true}};
  }
  if (k == "slice_curve") {
    if (spec.eps > 0.02 || spec.count < 16) return {};
    return {{"fregular_lipschitz_graph",
             "f-regular extraction at delta = 1/20, r0 = 1/2 succeeds with a finite constant", true}};
  }
  return {};
}

std::vector<VerdictCheck> verify(const GeneratorSpec& spec) {
  const auto cloud = generate(spec);
  std::vector<VerdictCheck> out;
  for (const auto& v : ground_truth(spec)) {
    VerdictCheck c{v, false, 0.0, {}};
    const auto& n = v.name;
    if (spec.kind == "four_points") {
      const auto planes = natural_planes(spec, cloud);
      if (n == "strong_2_reifenberg_stated_planes") {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
          c.value = std::max(c.value, all_scales_defect(cloud, planes.planes[i], i, 2.0));
        }
        c.observed = c.value <= spec.eps;
        c.detail = "max defect " + fmt(c.value);
      } else if (n == "strong_1_reifenberg_scale_2") {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
          c.value = std::max(c.value, best_strong_plane(cloud, i, 1, 2.0).defect);
        }
        c.observed = c.value <= spec.eps;
        c.detail = "worst best-line defect " + fmt(c.value);
      } else if (n == "full_2_reifenberg_stated_planes") {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
          c.value = std::max(c.value, full_reifenberg_defect(cloud, planes.planes[i], i, 2.0));
        }
        c.observed = c.value <= spec.eps;
        c.detail = "max two-sided defect " + fmt(c.value);
      } else if (n == "single_plane_extraction_rejected") {
        const auto uni = PlaneAssignment::uniform(cloud, planes.planes[0]);
        const double delta = std::min(spec.eps, kLemmaDeltaMax);
        c.observed = rejected(
            [&] { extract_bilipschitz_graph(cloud, uni, 0, planes.planes[0], 2.0, delta); }, c.detail);
        if (!c.observed) c.detail = "extraction accepted";
      }
    } else if (spec.kind == "figure1") {
      const auto fit = two_holder_fit(cloud);
      if (n == "two_holder_graph") {
        c.value = fit.constant;
        c.observed = fit.single_valued && !fit.unbounded && std::isfinite(fit.constant);
        c.detail = "constant " + fmt(fit.constant);
      } else if (n == "holder_constant_vanishing") {
        c.value = fit.gamma.empty() ? 0.0 : fit.gamma.back();
        c.observed = fit.vanishing;
        c.detail = "gamma " + fmt(fit.gamma.empty() ? 0.0 : fit.gamma.front()) + " -> " + fmt(c.value);
      } else if (n == "non_constant") {
        std::set<double> times;
        for (const auto& p : cloud) times.insert(p.t);
        c.value = static_cast<double>(times.size());
        c.observed = times.size() > 1;
        c.detail = std::to_string(times.size()) + " distinct times";
      }
    } else if (spec.kind == "three_sequences") {
      const auto planes = natural_planes(spec, cloud);
      const std::size_t origin = cloud.size() - 1;
      if (n == "origin_strong_1_reifenberg") {
        c.value = all_scales_defect(cloud, planes.planes[origin], origin, 10.0);
        c.observed = c.value <= spec.eps;
        c.detail = "defect at origin " + fmt(c.value);
      } else if (n == "uniform_scale") {
        // Second-sequence points: indices 1, 4, 7, ...
        const double first = local_reifenberg_radius(cloud, planes.planes[1], 1, spec.eps);
        const std::size_t deep = 3 * (spec.count - 1) + 1;
        const double last = local_reifenberg_radius(cloud, planes.planes[deep], deep, spec.eps);
        c.value = last / first;
        c.observed = c.value >= 0.01;
        c.detail = "radius ratio deepest/first " + fmt(c.value);
      }
    } else if (spec.kind == "tilted_line") {
      if (n == "slice_1_reifenberg") {
        const auto planes = natural_planes(spec, cloud);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
          c.value = std::max(c.value, all_scales_defect(cloud, planes.planes[i], i, 0.5));
        }
        c.observed = c.value <= 0.5;
        c.detail = "max defect " + fmt(c.value);
      } else if (n == "two_holder_graph") {
        const auto fit = two_holder_fit(cloud);
        c.value = fit.constant;
        c.observed = fit.single_valued && !fit.unbounded;
        c.detail = "constant " + fmt(fit.constant) + ", blow-up exponent " + fmt(fit.blowup_exponent);
      }
    } else if (spec.kind == "koch") {
      if (n == "in_slice") {
        c.observed = all_same_time(cloud);
      } else {
        c = dimension_check(v, cloud, std::log(4.0) / std::log(3.0), 0.05);
      }
    } else if (spec.kind == "parabolic_cone_boundary") {
      const SpaceTimePoint origin{Vec::Zero(cloud.ambient_dim()), 0.0};
      if (n == "vertex_cone_gamma_one" || n == "vertex_cone_sharp") {
        const double gamma = n == "vertex_cone_gamma_one" ? 1.0 : 0.9;
        const ParabolicCone cone{origin, gamma};
        std::size_t outside = 0;
        for (const auto& p : cloud) outside += cone.contains(p) ? 0 : 1;
        c.value = static_cast<double>(outside);
        c.observed = n == "vertex_cone_gamma_one" ? outside == 0 : outside > 0;
        c.detail = std::to_string(outside) + " point(s) outside the cone";
      } else if (n == "two_holder_graph") {
        const auto fit = two_holder_fit(cloud);
        c.observed = fit.single_valued && !fit.unbounded;
        c.detail = fit.single_valued ? "single valued" : std::to_string(fit.sheets.size()) + " sheets";
      }
    } else if (spec.kind == "slice_disk") {
      if (n == "in_slice_reifenberg") {
        const auto planes = natural_planes(spec, cloud);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
          c.value = std::max(c.value, all_scales_defect(cloud, planes.planes[i], i, 4.0));
        }
        c.observed = c.value <= 1e-12;
        c.detail = "max defect " + fmt(c.value);
      } else {
        try {
          const auto rep = time_slice_test(cloud);
          c.observed = rep.all_time_slices;
          c.value = static_cast<double>(rep.distinct_times);
          c.detail = std::to_string(rep.distinct_times) + " distinct time(s)";
        } catch (const PreconditionFailed& e) {
          c.detail = e.what();
        }
      }
    } else if (spec.kind == "time_segment") {
      c = dimension_check(v, cloud, 2.0, 0.2);
    } else if (spec.kind == "spacetime_box") {
      c = dimension_check(v, cloud, 4.0, 0.3);
    } else if (spec.kind == "spatial_segment") {
      c = dimension_check(v, cloud, 1.0, 0.1);
    } else if (spec.kind == "slice_curve") {
      const auto planes = natural_planes(spec, cloud);
      std::string why;
      LipschitzGraph g;
      const bool refused = rejected(
          [&] { g = extract_lipschitz_graph_fregular(cloud, planes, cloud.size() / 2, 0.5, kLemmaDeltaMax); },
          why);
      c.observed = !refused && std::isfinite(g.constant);
      c.value = refused ? std::numeric_limits<double>::infinity() : g.constant;
      c.detail = refused ? why : "constant " + fmt(g.constant) + " on " + std::to_string(g.samples.size()) + " samples";
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace mcfsing
