#include "mcfsing/spacetime.hpp"

#include "mcfsing/errors.hpp"
#include "neighbor_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

namespace mcfsing {

namespace {

void require_same_dim(const SpaceTimePoint& p, const SpaceTimePoint& q) {
  if (p.x.size() != q.x.size()) {
    throw DimensionMismatch("space-time points have different spatial dimensions");
  }
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

SpaceTimePoint make_point(std::initializer_list<double> x, double t) {
  Vec v(static_cast<Eigen::Index>(x.size()));
  Eigen::Index i = 0;
  for (double c : x) v[i++] = c;
  return {v, t};
}

PointCloud::PointCloud(std::vector<SpaceTimePoint> points, std::optional<std::vector<int>> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (points_.empty()) throw InvalidArgument("point cloud must be nonempty");
  ambient_dim_ = points_.front().dim();
  for (const auto& p : points_) {
    if (p.dim() != ambient_dim_) throw DimensionMismatch("point cloud mixes spatial dimensions");
    if (!p.x.allFinite() || !std::isfinite(p.t)) {
      throw InvalidArgument("point cloud contains non-finite coordinates");
    }
  }
  if (labels_ && labels_->size() != points_.size()) {
    throw InvalidArgument("component labels must have one entry per point");
  }
}

double parabolic_distance(const SpaceTimePoint& p, const SpaceTimePoint& q) {
  require_same_dim(p, q);
  return std::max((p.x - q.x).norm(), std::sqrt(std::abs(p.t - q.t)));
}

bool in_parabolic_ball(const SpaceTimePoint& p, const SpaceTimePoint& center, double r) {
  if (!(r > 0.0)) throw InvalidArgument("parabolic ball radius must be positive");
  require_same_dim(p, center);
  return (p.x - center.x).norm() < r && std::abs(p.t - center.t) < r * r;
}

double parabolic_distance(const SpaceTimePoint& p, const PointCloud& target) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : target) best = std::min(best, parabolic_distance(p, q));
  return best;
}

bool in_parabolic_tube(const SpaceTimePoint& p, const PointCloud& target, double r) {
  if (!(r > 0.0)) throw InvalidArgument("tube radius must be positive");
  return parabolic_distance(p, target) < r;
}

SpaceTimePoint parabolic_dilate(const SpaceTimePoint& p, const SpaceTimePoint& about,
                                double lambda) {
  require_same_dim(p, about);
  return {about.x + lambda * (p.x - about.x), about.t + lambda * lambda * (p.t - about.t)};
}

PointCloud parabolic_dilate(const PointCloud& cloud, const SpaceTimePoint& about, double lambda) {
  std::vector<SpaceTimePoint> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(parabolic_dilate(p, about, lambda));
  return PointCloud(std::move(out), cloud.labels());
}

double parabolic_ball_volume(int spatial_dim, double r) {
  const double d = spatial_dim;
  const double unit_ball = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  return unit_ball * std::pow(r, d) * 2.0 * r * r;
}

double parabolic_diameter(const PointCloud& cloud) {
  const int d = cloud.ambient_dim();
  Vec lo = Vec::Constant(d, std::numeric_limits<double>::infinity());
  Vec hi = Vec::Constant(d, -std::numeric_limits<double>::infinity());
  double tlo = std::numeric_limits<double>::infinity();
  double thi = -tlo;
  for (const auto& p : cloud) {
    lo = lo.cwiseMin(p.x);
    hi = hi.cwiseMax(p.x);
    tlo = std::min(tlo, p.t);
    thi = std::max(thi, p.t);
  }
  const double spatial = d > 0 ? (hi - lo).norm() : 0.0;
  return std::max(spatial, std::sqrt(thi - tlo));
}

std::vector<double> nearest_neighbor_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  if (n < 2) return best;
  const double diam = parabolic_diameter(cloud);
  if (diam == 0.0) {
    std::fill(best.begin(), best.end(), 0.0);
    return best;
  }
  const double effective_dim = cloud.ambient_dim() + 2.0;
  double r = diam / std::pow(static_cast<double>(n), 1.0 / effective_dim);
  std::vector<std::size_t> pending(n);
  for (std::size_t i = 0; i < n; ++i) pending[i] = i;
  while (!pending.empty()) {
    detail::ParabolicGrid grid(cloud.ambient_dim(), r);
    for (std::size_t i = 0; i < n; ++i) grid.insert(cloud[i], i);
    std::vector<std::size_t> unresolved;
    for (auto i : pending) {
      double b = std::numeric_limits<double>::infinity();
      grid.for_each_candidate(cloud[i], [&](std::size_t j) {
        if (j != i) b = std::min(b, parabolic_distance(cloud[i], cloud[j]));
      });
      if (b < r) {
        best[i] = b;
      } else {
        unresolved.push_back(i);
      }
    }
    pending = std::move(unresolved);
    if (r > 4.0 * diam) {
      for (auto i : pending) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) best[i] = std::min(best[i], parabolic_distance(cloud[i], cloud[j]));
        }
      }
      break;
    }
    r *= 2.0;
  }
  return best;
}

double sampling_floor(const PointCloud& cloud) {
  auto nn = nearest_neighbor_distances(cloud);
  nn.erase(std::remove_if(nn.begin(), nn.end(), [](double v) { return !std::isfinite(v); }),
           nn.end());
  return 3.0 * quantile(nn, 0.9);
}

std::vector<std::size_t> greedy_cover_centers(const PointCloud& cloud, double r) {
  if (!(r > 0.0)) throw InvalidArgument("cover radius must be positive");
  detail::ParabolicGrid centers(cloud.ambient_dim(), r);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    bool covered = false;
    centers.for_each_candidate(cloud[i], [&](std::size_t c) {
      if (!covered && parabolic_distance(cloud[i], cloud[c]) < r) covered = true;
    });
    if (!covered) {
      centers.insert(cloud[i], i);
      out.push_back(i);
    }
  }
  return out;
}

std::vector<CoveringRow> ph_measure_estimate(const PointCloud& cloud, int k,
                                             std::span<const double> scales) {
  if (k < 0) throw InvalidArgument("measure dimension must be nonnegative");
  if (scales.empty()) throw InvalidArgument("scale list is empty");
  std::vector<CoveringRow> rows;
  rows.reserve(scales.size());
  for (double r : scales) {
    if (!(r > 0.0)) throw InvalidArgument("covering scales must be positive");
    const auto count = greedy_cover_centers(cloud, r).size();
    rows.push_back({r, count, static_cast<double>(count) * std::pow(r, k)});
  }
  return rows;
}

std::size_t parabolic_box_count(const PointCloud& cloud, double r) {
  if (!(r > 0.0)) throw InvalidArgument("box size must be positive");
  const int d = cloud.ambient_dim();
  Vec lo = cloud[0].x;
  double tlo = cloud[0].t;
  for (const auto& p : cloud) {
    lo = lo.cwiseMin(p.x);
    tlo = std::min(tlo, p.t);
  }
  std::unordered_set<std::vector<std::int64_t>, detail::CellKeyHash> boxes;
  std::vector<std::int64_t> key(d + 1);
  for (const auto& p : cloud) {
    for (int i = 0; i < d; ++i) key[i] = static_cast<std::int64_t>(std::floor((p.x[i] - lo[i]) / r));
    key[d] = static_cast<std::int64_t>(std::floor((p.t - tlo) / (r * r)));
    boxes.insert(key);
  }
  return boxes.size();
}

std::vector<double> default_dimension_scales(const PointCloud& cloud, std::size_t count) {
  auto nn = nearest_neighbor_distances(cloud);
  nn.erase(std::remove_if(nn.begin(), nn.end(), [](double v) { return !std::isfinite(v); }),
           nn.end());
  const double lo = 2.0 * quantile(nn, 0.9);
  const double hi = parabolic_diameter(cloud) / 4.0;
  if (!(lo > 0.0) || !(hi > lo) || count < 2) return {};
  std::vector<double> out(count);
  const double ratio = std::pow(lo / hi, 1.0 / static_cast<double>(count - 1));
  for (std::size_t i = 0; i < count; ++i) out[i] = hi * std::pow(ratio, static_cast<double>(i));
  return out;
}

DimensionEstimate ph_dimension_estimate(const PointCloud& cloud, std::span<const double> scales) {
  std::vector<double> grid(scales.begin(), scales.end());
  if (grid.empty()) grid = default_dimension_scales(cloud);
  std::sort(grid.begin(), grid.end(), std::greater<>());
  DimensionEstimate est;
  est.scales = grid;
  const std::size_t n = grid.size();
  const auto trim = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(n) + 0.5));
  est.used.assign(n, false);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = static_cast<double>(parabolic_box_count(cloud, grid[i]));
    est.counts.push_back(c);
    if (i < trim || i + trim >= n || c < 2.0) continue;
    est.used[i] = true;
    xs.push_back(std::log(1.0 / grid[i]));
    ys.push_back(std::log(c));
  }
  if (xs.size() < 3) throw PreconditionFailed("dimension fit needs at least 3 usable scales");
  const double m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionFailed("degenerate scale grid for dimension fit");
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - (my + slope * (xs[i] - mx));
    ss += res * res;
  }
  const double se = xs.size() > 2 ? std::sqrt(ss / (m - 2.0) / sxx) : 0.0;
  est.dimension = slope;
  est.half_width = 2.0 * se;
  return est;
}

}  // namespace mcfsing
