#pragma once

// Parabolic geometry of space-time R^{n+1} x R.
//
// A space-time point carries a spatial position x (length units) and a time t
// (length^2 units). The parabolic distance max(|dx|, |dt|^{1/2}) makes the
// dilation (x, t) -> (lambda x, lambda^2 t) a similarity, so time behaves as a
// two-dimensional direction.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace mcfsing {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct SpaceTimePoint {
  Vec x;
  double t = 0.0;

  SpaceTimePoint() = default;
  SpaceTimePoint(Vec x_, double t_) : x(std::move(x_)), t(t_) {}

  int dim() const { return static_cast<int>(x.size()); }
  /// Projection to space.
  const Vec& space() const { return x; }
  /// Projection to the time axis.
  double time() const { return t; }
};

SpaceTimePoint make_point(std::initializer_list<double> x, double t);

/// Finite sample of space-time with optional component labels.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<SpaceTimePoint> points,
                      std::optional<std::vector<int>> labels = std::nullopt);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  int ambient_dim() const { return ambient_dim_; }
  const SpaceTimePoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<SpaceTimePoint>& points() const { return points_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

 private:
  std::vector<SpaceTimePoint> points_;
  std::optional<std::vector<int>> labels_;
  int ambient_dim_ = 0;
};

double parabolic_distance(const SpaceTimePoint& p, const SpaceTimePoint& q);

/// Open parabolic ball B_r(x_c) x (t_c - r^2, t_c + r^2).
bool in_parabolic_ball(const SpaceTimePoint& p, const SpaceTimePoint& center, double r);

/// Distance to a sampled set: minimum over its points.
double parabolic_distance(const SpaceTimePoint& p, const PointCloud& target);
bool in_parabolic_tube(const SpaceTimePoint& p, const PointCloud& target, double r);

/// Parabolic dilation about `about`: x -> about.x + lambda (x - about.x),
/// t -> about.t + lambda^2 (t - about.t).
SpaceTimePoint parabolic_dilate(const SpaceTimePoint& p, const SpaceTimePoint& about,
                                double lambda);
PointCloud parabolic_dilate(const PointCloud& cloud, const SpaceTimePoint& about, double lambda);

/// Lebesgue measure of a parabolic ball of radius r in R^{spatial_dim} x R.
double parabolic_ball_volume(int spatial_dim, double r);

/// Parabolic nearest-neighbour distance of every point (infinity for a single point).
std::vector<double> nearest_neighbor_distances(const PointCloud& cloud);

/// Scale below which containment defects measure sampling rather than
/// geometry: 3 x the 90th percentile of nearest-neighbour spacing.
double sampling_floor(const PointCloud& cloud);

double parabolic_diameter(const PointCloud& cloud);

/// Indices of a greedy cover by open parabolic balls of radius r. Points are
/// visited in input order; a point not yet covered becomes a new center.
std::vector<std::size_t> greedy_cover_centers(const PointCloud& cloud, double r);

struct CoveringRow {
  double scale = 0.0;
  std::size_t count = 0;
  double sum = 0.0;  // count * scale^k
};

/// Covering sums sum_i r^k of a greedy parabolic cover at each scale.
std::vector<CoveringRow> ph_measure_estimate(const PointCloud& cloud, int k,
                                             std::span<const double> scales);

struct DimensionEstimate {
  double dimension = 0.0;
  double half_width = 0.0;  // two standard errors of the fitted slope
  std::vector<double> scales;
  std::vector<double> counts;
  std::vector<bool> used;
};

/// Number of occupied parabolic boxes (side r in space, r^2 in time).
std::size_t parabolic_box_count(const PointCloud& cloud, double r);

/// Geometric scale grid between twice the sampling spacing and a quarter of
/// the parabolic diameter.
std::vector<double> default_dimension_scales(const PointCloud& cloud, std::size_t count = 16);

/// Log-log slope of parabolic box counts. The largest and smallest 10% of
/// scales are discarded before fitting.
DimensionEstimate ph_dimension_estimate(const PointCloud& cloud,
                                        std::span<const double> scales = {});

}  // namespace mcfsing
