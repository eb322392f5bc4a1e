#include "mcfsing/flows.hpp"

#include "mcfsing/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mcfsing {

double analytic_extinction_time(const AnalyticSpec& spec) {
  if (spec.kind == "sphere") return spec.r0 * spec.r0 / (2.0 * spec.n);
  if (spec.kind == "cylinder") return spec.r0 * spec.r0 / (2.0 * (spec.n - spec.j));
  if (spec.kind == "plane") return std::numeric_limits<double>::infinity();
  throw InvalidArgument("unknown analytic flow kind '" + spec.kind + "'");
}

namespace {

void validate(const AnalyticSpec& spec) {
  if (spec.n < 1) throw InvalidArgument("n must be at least 1");
  if (spec.kind != "plane" && !(spec.r0 > 0.0)) throw InvalidArgument("initial radius must be positive");
  if (spec.kind == "cylinder" && (spec.j < 1 || spec.j >= spec.n)) {
    throw InvalidArgument("cylinder axis dimension must lie in [1, n-1]");
  }
  analytic_extinction_time(spec);
}

std::optional<WeightedHypersurface> analytic_surface(const AnalyticSpec& spec, double t) {
  const int amb = spec.n + 1;
  if (spec.kind == "plane") return WeightedHypersurface::plane(Vec::Zero(amb), Vec::Unit(amb, amb - 1));
  const int m = spec.kind == "sphere" ? spec.n : spec.n - spec.j;
  const double r2 = spec.r0 * spec.r0 - 2.0 * m * t;
  if (!(r2 > 0.0)) return std::nullopt;
  if (spec.kind == "sphere") return WeightedHypersurface::sphere(Vec::Zero(amb), std::sqrt(r2));
  Mat axis = Mat::Zero(amb, spec.j);
  for (int c = 0; c < spec.j; ++c) axis(c, c) = 1.0;
  return WeightedHypersurface::cylinder(Vec::Zero(amb), axis, std::sqrt(r2));
}

}  // namespace

std::optional<WeightedHypersurface> Flow::surface_at(double t, double tolerance) const {
  if (analytic) return analytic_surface(*analytic, t);
  const double tol = std::max(tolerance, 1e-12 * std::max(1.0, std::abs(t)));
  if (t > t_end + tol) {
    if (!snapshots.empty() && snapshots.back().surface.empty()) return std::nullopt;
    throw PreconditionFailed("time lies beyond the simulated range");
  }
  auto it = std::lower_bound(snapshots.begin(), snapshots.end(), t,
                             [](const FlowSnapshot& s, double v) { return s.time < v; });
  const FlowSnapshot* best = nullptr;
  if (it != snapshots.end()) best = &*it;
  if (it != snapshots.begin() && (!best || t - std::prev(it)->time < best->time - t)) best = &*std::prev(it);
  if (!best || std::abs(best->time - t) > tol) {
    throw PreconditionFailed("no snapshot at the requested time");
  }
  if (best->surface.empty()) return std::nullopt;
  return best->surface;
}

std::vector<double> Flow::backward_taus(double t, double tau_min, double tau_max,
                                        std::size_t count) const {
  if (!(tau_min > 0.0) || !(tau_max > tau_min) || count < 2) {
    throw InvalidArgument("need 0 < tau_min < tau_max and count >= 2");
  }
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = tau_max * std::pow(tau_min / tau_max, static_cast<double>(i) / (count - 1));
  }
  if (analytic) return grid;
  std::vector<double> avail;
  for (const auto& s : snapshots) {
    const double tau = t - s.time;
    if (tau >= tau_min * (1 - 1e-9) && tau <= tau_max * (1 + 1e-9) && !s.surface.empty()) {
      avail.push_back(tau);
    }
  }
  std::vector<double> out;
  if (avail.empty()) return out;
  for (double g : grid) {
    double best = avail.front();
    for (double a : avail) {
      if (std::abs(std::log(a / g)) < std::abs(std::log(best / g))) best = a;
    }
    if (std::find(out.begin(), out.end(), best) == out.end()) out.push_back(best);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

Flow analytic_flow(const AnalyticSpec& spec, double t_end, double snapshot_interval) {
  validate(spec);
  if (!(snapshot_interval > 0.0)) throw InvalidArgument("snapshot interval must be positive");
  if (!(t_end >= 0.0)) throw InvalidArgument("end time must be nonnegative");
  Flow f;
  f.n = spec.n;
  f.kind = FlowKind::analytic;
  f.analytic = spec;
  const double T = analytic_extinction_time(spec);
  f.t_end = std::min(t_end, T);
  if (spec.kind == "sphere") {
    f.lambda0 = cylinder_density(spec.n, 0);
  } else if (spec.kind == "cylinder") {
    f.lambda0 = cylinder_density(spec.n, spec.j);
  }
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * snapshot_interval;
    if (t > f.t_end || t >= T) break;
    f.snapshots.push_back({t, *analytic_surface(spec, t), 0.0, 0.0, std::nullopt});
  }
  if (std::isfinite(T) && t_end >= T * (1.0 - 1e-12)) {
    if (spec.kind == "sphere") {
      f.pinches.push_back({PinchKind::extinction, SpaceTimePoint{Vec::Zero(spec.n + 1), T}, 0.0});
    } else {
      // The whole axis becomes singular; sample it on a grid of spacing
      // 0.25 (j = 1) or 0.5 (j = 2) over [-2, 2]^j.
      const int per = spec.j == 1 ? 17 : spec.j == 2 ? 9 : 1;
      const double step = per > 1 ? 4.0 / (per - 1) : 0.0;
      std::vector<int> idx(spec.j, 0);
      for (;;) {
        Vec x = Vec::Zero(spec.n + 1);
        for (int c = 0; c < spec.j; ++c) x[c] = per > 1 ? -2.0 + step * idx[c] : 0.0;
        f.pinches.push_back({PinchKind::neck, SpaceTimePoint{x, T}, 0.0});
        int c = 0;
        while (c < spec.j && ++idx[c] == per) idx[c++] = 0;
        if (c == spec.j) break;
      }
    }
  }
  return f;
}

}  // namespace mcfsing
