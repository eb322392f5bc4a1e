#include "mcfsing/cone.hpp"

#include "mcfsing/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcfsing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pair_ratio(const SpaceTimePoint& p, const SpaceTimePoint& q) {
  const double dt = std::abs(p.t - q.t);
  const double dx2 = (p.x - q.x).squaredNorm();
  if (dt == 0.0) return 0.0;
  return dx2 == 0.0 ? kInf : dt / dx2;
}

std::vector<double> default_grid(const PointCloud& cloud) {
  const double hi = parabolic_diameter(cloud);
  double lo = sampling_floor(cloud);
  if (!(lo > 0.0) || lo >= hi) lo = hi / 64.0;
  std::vector<double> out(12);
  const double ratio = std::pow(lo / hi, 1.0 / 11.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = hi * std::pow(ratio, static_cast<double>(i));
  return out;
}

}  // namespace

bool ParabolicCone::contains(const SpaceTimePoint& p) const {
  return gamma * (p.x - vertex.x).squaredNorm() >= std::abs(p.t - vertex.t);
}

ConeConstant cone_constant(const PointCloud& cloud, double r0) {
  if (!(r0 > 0.0)) throw InvalidArgument("cone scale must be positive");
  if (cloud.size() < 2) throw InvalidArgument("cone constant needs at least two points");
  ConeConstant out;
  std::vector<std::pair<double, double>> dx_ratio;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      if (!(parabolic_distance(cloud[i], cloud[j]) < r0)) continue;
      ++out.pairs;
      const double ratio = pair_ratio(cloud[i], cloud[j]);
      if (ratio > out.raw) {
        out.raw = ratio;
        out.witness = {i, j};
      }
      const double dx = (cloud[i].x - cloud[j].x).norm();
      if (dx > 0.0) dx_ratio.emplace_back(dx, ratio);
    }
  }
  if (out.pairs == 0) throw PreconditionFailed("no point pairs within the cone scale");
  std::sort(dx_ratio.begin(), dx_ratio.end());
  const auto blow = ratio_blowup_test(dx_ratio);
  out.blowup_exponent = blow.exponent;
  out.infinite = std::isinf(out.raw) || blow.unbounded;
  out.gamma_star = out.infinite ? kInf : out.raw;
  return out;
}

ConeProfile cone_profile(const PointCloud& cloud, std::span<const double> r0_grid) {
  ConeProfile prof;
  prof.r0.assign(r0_grid.begin(), r0_grid.end());
  if (prof.r0.empty()) prof.r0 = default_grid(cloud);
  std::sort(prof.r0.begin(), prof.r0.end(), std::greater<>());
  for (double r : prof.r0) {
    double g = 0.0;
    try {
      g = cone_constant(cloud, r).gamma_star;
    } catch (const PreconditionFailed&) {
      g = 0.0;  // no pairs at this scale: vacuous
    }
    prof.gamma_star.push_back(g);
  }
  for (std::size_t i = 1; i < prof.gamma_star.size(); ++i) {
    if (prof.gamma_star[i] > prof.gamma_star[i - 1]) prof.monotone = false;
  }
  const double first = prof.gamma_star.front();
  const double last = prof.gamma_star.back();
  prof.vanishing = std::isfinite(first) && (first == 0.0 || last <= 0.5 * first);
  return prof;
}

HalfConeResult half_cone_check(const PointCloud& cloud, double gamma, double r0,
                               ConeDirection direction) {
  if (!(gamma >= 0.0)) throw InvalidArgument("cone aperture must be nonnegative");
  if (!(r0 > 0.0)) throw InvalidArgument("cone scale must be positive");
  HalfConeResult out;
  for (std::size_t z = 0; z < cloud.size(); ++z) {
    for (std::size_t y = 0; y < cloud.size(); ++y) {
      if (y == z || !(parabolic_distance(cloud[y], cloud[z]) < r0)) continue;
      const double ratio = pair_ratio(cloud[y], cloud[z]);
      out.full_level = std::max(out.full_level, ratio);
      const bool later = cloud[y].t > cloud[z].t;
      const bool earlier = cloud[y].t < cloud[z].t;
      if ((direction == ConeDirection::forward && later) ||
          (direction == ConeDirection::backward && earlier)) {
        out.level = std::max(out.level, ratio);
        const ParabolicCone cone{cloud[z], gamma};
        if (!cone.contains(cloud[y])) out.violations.emplace_back(z, y);
      }
    }
  }
  if (out.level != out.full_level) {
    throw LemmaViolation("half-cone level differs from the full-cone level");
  }
  out.holds = out.violations.empty();
  return out;
}

ConeGraph cone_graph_extract(const PointCloud& cloud, double gamma, double r0) {
  const auto cc = cone_constant(cloud, r0);
  if (cc.infinite || cc.gamma_star > gamma) {
    throw PreconditionFailed("local cone property fails at the requested aperture");
  }
  ConeGraph g;
  g.gamma = gamma;
  std::vector<bool> dup(cloud.size(), false);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      if (!(parabolic_distance(cloud[i], cloud[j]) < r0)) continue;
      const double dx2 = (cloud[i].x - cloud[j].x).squaredNorm();
      if (dx2 == 0.0) {
        if (cloud[i].t != cloud[j].t) {
          throw InjectivityFailure("spatial projection not injective under a verified cone property",
                                   i, j);
        }
        dup[j] = true;
        continue;
      }
      g.certified = std::max(g.certified, std::abs(cloud[i].t - cloud[j].t) / dx2);
    }
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (dup[i]) continue;
    g.domain.push_back(i);
    g.x.push_back(cloud[i].x);
    g.u.push_back(cloud[i].t);
  }
  return g;
}

std::pair<std::vector<double>, std::vector<double>> ph2_proxy(const PointCloud& cloud) {
  auto grid = default_grid(cloud);
  std::vector<double> scales(grid.end() - 3, grid.end());
  std::vector<double> sums;
  for (const auto& row : ph_measure_estimate(cloud, 2, scales)) sums.push_back(row.sum);
  return {scales, sums};
}

ConeTimeSliceReport cone_time_slice_test(const PointCloud& cloud,
                                         std::optional<std::vector<int>> labels,
                                         double spread_tolerance) {
  ConeTimeSliceReport rep;
  rep.profile = cone_profile(cloud);
  if (!rep.profile.vanishing) throw PreconditionFailed("cone profile does not vanish");
  auto [scales, sums] = ph2_proxy(cloud);
  rep.ph2_scales = scales;
  rep.ph2_sums = sums;
  if (std::max(sums[1], sums[2]) > 2.0 * sums[0]) {
    throw PreconditionFailed("parabolic 2-dimensional covering sums are not bounded");
  }
  rep.slice = time_slice_test(cloud, std::move(labels), spread_tolerance);
  return rep;
}

}  // namespace mcfsing
