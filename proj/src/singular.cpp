#include "mcfsing/errors.hpp"
#include "mcfsing/flows.hpp"
#include "mcfsing/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mcfsing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TimeSlicePlane neck_axis(const SpaceTimePoint& at, int j) {
  if (j <= 0) return TimeSlicePlane::point(at);
  return TimeSlicePlane::coordinate(at, j);
}

// Unit tangent of the circle {x_1 = const, |x_perp| = r} at `x`.
Vec circle_tangent(const Vec& x) {
  Vec t = Vec::Zero(x.size());
  if (x.size() < 3) return t;
  const double r = std::hypot(x[1], x[2]);
  t[1] = -x[2] / r;
  t[2] = x[1] / r;
  return t;
}

void classify(SingularEvent& ev, int n, const DetectOptions& opt) {
  const double theta = ev.density.value;
  const int k = nearest_cylinder_index(n, theta);
  ev.classified = false;
  ev.j = -1;
  if (k >= n || ev.density.flagged) return;
  const double ref = cylinder_density(n, k);
  if (std::abs(theta - ref) / ref <= opt.class_tolerance) {
    ev.classified = true;
    ev.j = k;
  }
}

enum class Model { line_pair, sphere, circle };

struct ProfileSample {
  Eigen::Vector2d q;
  std::size_t chain = 0;
};

}  // namespace

std::vector<SingularEvent> detect_singularities(const Flow& flow, const DetectOptions& options) {
  std::vector<SingularEvent> out;
  const int amb = flow.ambient_dim();
  // Below a few grid spacings F measures the discretisation, not the flow.
  DetectOptions opt = options;
  if (!flow.analytic) {
    double spacing = 0.0;
    for (const auto& s : flow.snapshots) spacing = std::max(spacing, s.spacing);
    opt.density.tau_min = std::max(opt.density.tau_min, std::pow(3.0 * spacing, 2));
  }
  for (const auto& p : flow.pinches) {
    if (p.kind != PinchKind::circle) {
      SingularEvent ev;
      ev.location = p.location;
      ev.source = p.kind;
      ev.density = gaussian_density(flow, p.location.x, p.location.t, opt.density);
      classify(ev, flow.n, opt);
      ev.axis = neck_axis(ev.location, ev.classified ? ev.j : 0);
      out.push_back(std::move(ev));
      continue;
    }
    if (amb < 3) throw InvalidArgument("circle events need ambient dimension >= 3");
    // Rotational symmetry: one density serves the whole circle.
    Vec x = Vec::Zero(amb);
    x[0] = p.location.x[0];
    x[1] = p.circle_radius;
    const auto density = gaussian_density(flow, x, p.location.t, opt.density);
    for (std::size_t i = 0; i < opt.circle_samples; ++i) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(opt.circle_samples);
      SingularEvent ev;
      Vec y = Vec::Zero(amb);
      y[0] = x[0];
      y[1] = p.circle_radius * std::cos(phi);
      y[2] = p.circle_radius * std::sin(phi);
      ev.location = {y, p.location.t};
      ev.source = PinchKind::circle;
      ev.density = density;
      classify(ev, flow.n, opt);
      ev.axis = ev.classified && ev.j == 1 ? TimeSlicePlane(ev.location, circle_tangent(y))
                                           : TimeSlicePlane::point(ev.location);
      out.push_back(std::move(ev));
    }
  }
  return out;
}

CylindricalFit cylindrical_fit(const Flow& flow, const SingularEvent& event, double s,
                               double ball_factor) {
  if (!event.classified || event.j < 0) throw PreconditionFailed("event is unclassified");
  if (!(s > 0.0) || !(ball_factor > 0.0)) throw InvalidArgument("s and ball factor must be positive");
  const int n = flow.n;
  const int j = event.j;
  if (j >= n) throw InvalidArgument("axis dimension must be below n");
  const double rho = std::sqrt(2.0 * (n - j));
  const double root = std::sqrt(s);
  const Vec& x0 = event.location.x;
  CylindricalFit fit;
  fit.j = j;
  fit.s = s;
  fit.axis = event.axis;
  const auto m = flow.surface_at(event.location.t - s, 1e-9 * std::max(1.0, std::abs(event.location.t)));
  if (!m || m->empty()) return fit;

  if (const auto* sph = std::get_if<SphereShape>(&m->shape())) {
    if (j != 0) return fit;
    fit.offset = (sph->center - x0).norm() / root / rho;
    fit.max_radial = std::abs(sph->radius / root - rho) / rho + fit.offset;
    fit.max_slope = fit.offset;
    fit.eta = std::max({fit.offset, fit.max_radial, fit.max_slope});
    fit.graphical = fit.max_radial < 0.5;
    if (!fit.graphical) fit.eta = kInf;
    return fit;
  }
  if (const auto* cyl = std::get_if<CylinderShape>(&m->shape())) {
    if (cyl->axis.cols() != j) return fit;
    const Vec v = x0 - cyl->base;
    const Vec perp = v - cyl->axis * (cyl->axis.transpose() * v);
    fit.offset = perp.norm() / root / rho;
    fit.max_radial = std::abs(cyl->radius / root - rho) / rho + fit.offset;
    if (event.axis.k() == j && j > 0) {
      const auto ang = principal_angles(event.axis, TimeSlicePlane(event.location, cyl->axis));
      fit.axis_angle = ang.empty() ? 0.0 : ang.back();
    }
    fit.max_slope = std::tan(fit.axis_angle) + fit.offset;
    fit.eta = std::max({fit.offset, fit.max_radial, fit.max_slope});
    fit.graphical = fit.max_radial < 0.5;
    if (!fit.graphical) fit.eta = kInf;
    return fit;
  }
  const auto* rev = std::get_if<RevolutionShape>(&m->shape());
  if (!rev) return fit;

  const double d0 = x0.size() > 1 ? x0.tail(x0.size() - 1).norm() : 0.0;
  const bool on_axis = d0 <= 1e-9 * std::max(1.0, std::abs(x0[0]));
  Model model;
  if (on_axis && j == 1) {
    model = Model::line_pair;
  } else if (on_axis && j == 0) {
    model = Model::sphere;
  } else if (!on_axis && j == n - 1) {
    model = Model::circle;
  } else {
    return fit;
  }
  // The sphere of radius rho must fit inside the fitting ball.
  const double ball = model == Model::line_pair ? ball_factor : std::max(ball_factor, rho + 1.0);

  std::vector<ProfileSample> pts;
  const double step = 0.05 * root;
  std::size_t chain = 0;
  for (const auto& c : rev->curves) {
    const std::size_t cnt = c.points.size();
    const std::size_t segs = c.closed ? cnt : (cnt == 0 ? 0 : cnt - 1);
    bool inside_prev = false;
    for (std::size_t i = 0; i < segs; ++i) {
      const Eigen::Vector2d a = c.points[i];
      const Eigen::Vector2d b = c.points[(i + 1) % cnt];
      const int sub = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
      for (int k = 0; k < sub; ++k) {
        const Eigen::Vector2d p = a + (static_cast<double>(k) / sub) * (b - a);
        const Eigen::Vector2d q((p.x() - x0[0]) / root, (p.y() - d0) / root);
        const bool inside = q.norm() < ball;
        if (inside && !inside_prev) ++chain;
        if (inside) pts.push_back({q, chain});
        inside_prev = inside;
      }
    }
    ++chain;
  }
  if (pts.size() < 8) return fit;

  auto residual = [&](const Vec& par, const Eigen::Vector2d& q, double* along) {
    switch (model) {
      case Model::line_pair: {
        const Eigen::Vector2d dir(std::cos(par[0]), std::sin(par[0]));
        const Eigen::Vector2d rel = q - Eigen::Vector2d(0.0, par[1]);
        if (along) *along = rel.dot(dir);
        return std::abs(rel.x() * dir.y() - rel.y() * dir.x()) - rho;
      }
      case Model::sphere: {
        const Eigen::Vector2d rel = q - Eigen::Vector2d(par[0], 0.0);
        if (along) *along = rho * std::atan2(rel.y(), rel.x());
        return rel.norm() - rho;
      }
      case Model::circle: {
        const Eigen::Vector2d rel = q - Eigen::Vector2d(par[0], par[1]);
        if (along) *along = rho * std::atan2(rel.y(), rel.x());
        return rel.norm() - rho;
      }
    }
    return 0.0;
  };
  auto cost = [&](const Vec& par) {
    double sum = 0.0;
    for (const auto& p : pts) {
      const double e = residual(par, p.q, nullptr);
      sum += e * e;
      if (model == Model::line_pair) {
        const double f = residual(par, Eigen::Vector2d(p.q.x(), -p.q.y()), nullptr);
        sum += f * f;
      }
    }
    return sum;
  };
  const Vec start = model == Model::sphere ? Vec::Zero(1) : Vec::Zero(2);
  const Vec par = nelder_mead(cost, start, 0.1, 2000, 1e-12).x;

  std::vector<double> along(pts.size());
  std::vector<double> err(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    err[i] = residual(par, pts[i].q, &along[i]);
    fit.max_radial = std::max(fit.max_radial, std::abs(err[i]) / rho);
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].chain != pts[i - 1].chain) continue;
    double da = along[i] - along[i - 1];
    if (model != Model::line_pair) {
      const double period = 2.0 * std::numbers::pi * rho;
      da = std::remainder(da, period);
    }
    if (std::abs(da) < 1e-9) continue;
    fit.max_slope = std::max(fit.max_slope, std::abs(err[i] - err[i - 1]) / std::abs(da));
  }
  if (model == Model::line_pair) {
    fit.offset = std::abs(par[1]) / rho;
    fit.axis_angle = std::abs(std::remainder(par[0], std::numbers::pi));
  } else if (model == Model::sphere) {
    fit.offset = std::abs(par[0]) / rho;
  } else {
    fit.offset = std::hypot(par[0], par[1]) / rho;
  }

  // Coverage of the model inside the ball.
  bool covered = true;
  if (model == Model::line_pair) {
    const double half = ball > rho ? std::sqrt(ball * ball - rho * rho) : 0.0;
    double lo = kInf, hi = -kInf;
    for (double a : along) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    covered = half == 0.0 || (lo <= -0.8 * half && hi >= 0.8 * half);
  } else {
    std::vector<double> ang;
    for (double a : along) ang.push_back(a / rho);
    std::sort(ang.begin(), ang.end());
    double gap = 0.0;
    for (std::size_t i = 1; i < ang.size(); ++i) gap = std::max(gap, ang[i] - ang[i - 1]);
    if (model == Model::circle) {
      gap = std::max(gap, 2.0 * std::numbers::pi - (ang.back() - ang.front()));
    } else {
      gap = std::max({gap, ang.front(), std::numbers::pi - ang.back()});
    }
    covered = gap < 0.5;
  }
  fit.graphical = covered && fit.max_radial < 0.5 && fit.max_slope < 1.0;
  fit.eta = fit.graphical ? std::max({fit.offset, fit.max_radial, fit.max_slope, std::tan(fit.axis_angle)})
                          : kInf;
  if (model == Model::line_pair) {
    Vec dir = Vec::Zero(x0.size());
    dir[0] = std::cos(par[0]);
    if (dir.size() > 1) dir[1] = std::sin(par[0]);
    fit.axis = TimeSlicePlane(event.location, dir);
  } else if (model == Model::circle) {
    fit.axis = TimeSlicePlane(event.location, circle_tangent(x0));
  } else {
    fit.axis = TimeSlicePlane::point(event.location);
  }
  return fit;
}

void attach_eta_profile(const Flow& flow, SingularEvent& event, double s_min, double s_max,
                        std::size_t count, double ball_factor) {
  event.eta_s.clear();
  event.eta.clear();
  auto s_values = flow.backward_taus(event.location.t, s_min, s_max, count);
  std::sort(s_values.begin(), s_values.end());
  for (double s : s_values) {
    event.eta_s.push_back(s);
    event.eta.push_back(cylindrical_fit(flow, event, s, ball_factor).eta);
  }
}

Stratification stratify(const std::vector<SingularEvent>& events, int n) {
  const auto ladder = cylinder_density_table(n);
  Stratification st;
  st.n = n;
  st.strata.assign(n, {});
  for (std::size_t k = 0; k + 1 < ladder.size(); ++k) st.thresholds.push_back(0.5 * (ladder[k] + ladder[k + 1]));
  st.thresholds.push_back(0.5 * (ladder.back() + 1.0));
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    if (!ev.classified || ev.j < 0 || ev.j >= n) {
      st.excluded.push_back(i);
      continue;
    }
    for (int k = ev.j; k < n; ++k) st.strata[k].push_back(i);
    if (ev.density.flagged) st.warnings.push_back("event " + std::to_string(i) + ": density residual flagged");
  }
  if (!st.excluded.empty()) {
    st.warnings.push_back(std::to_string(st.excluded.size()) + " unclassified event(s) excluded");
  }
  for (std::size_t i : st.strata.empty() ? std::vector<std::size_t>{} : st.strata[0]) {
    double r = kInf;
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (k == i) continue;
      r = std::min(r, parabolic_distance(events[i].location, events[k].location));
    }
    st.isolation_radius.push_back(r);
    if (!(r > 0.0)) st.s0_isolated = false;
  }
  for (const auto& ev : events) {
    if (!ev.location.x.allFinite() || !std::isfinite(ev.location.t)) st.top_compact = false;
  }
  return st;
}

SingularSetReport singular_set_report(const Flow& flow, const std::vector<SingularEvent>& events) {
  (void)flow;
  SingularSetReport rep;
  std::vector<SpaceTimePoint> pts;
  std::vector<const SingularEvent*> used;
  for (const auto& ev : events) {
    pts.push_back(ev.location);
    used.push_back(&ev);
  }
  if (pts.empty()) {
    rep.notes.push_back("no singular events");
    return rep;
  }
  rep.cloud = PointCloud(pts);
  if (pts.size() < 3) {
    rep.notes.push_back("fewer than three events: set analyses skipped");
    return rep;
  }
  try {
    PlaneAssignment a;
    a.k = used.front()->axis.k();
    for (const auto* ev : used) {
      if (ev->axis.k() != a.k) throw PreconditionFailed("events carry axes of different dimensions");
      a.planes.push_back(ev->axis.translated_to(ev->location));
    }
    const double hi = parabolic_diameter(rep.cloud);
    const double lo = sampling_floor(rep.cloud);
    std::vector<double> scales;
    for (double r = hi; r >= lo && scales.size() < 8; r *= 0.5) scales.push_back(r);
    if (scales.empty()) throw PreconditionFailed("event set is finer than its own sampling floor");
    rep.reifenberg = strong_reifenberg_profile(rep.cloud, a, scales);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("reifenberg: ") + e.what());
  }
  try {
    rep.holder = two_holder_fit(rep.cloud);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("holder: ") + e.what());
  }
  try {
    rep.cone = cone_constant(rep.cloud, 1.01 * parabolic_diameter(rep.cloud) + 1e-12);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("cone: ") + e.what());
  }
  try {
    rep.time_slice = time_slice_test(rep.cloud);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("time slice: ") + e.what());
  }
  return rep;
}

}  // namespace mcfsing
