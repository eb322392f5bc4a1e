#pragma once

// Affine k-planes contained in a single time-slice, and comparisons between
// them. Two planes at different times are compared by identifying each with
// its parallel copy in R^{n+1}; the time gap then enters through the
// parabolic distance as an additive sqrt(|dt|) term.

#include "mcfsing/spacetime.hpp"

#include <vector>

namespace mcfsing {

class TimeSlicePlane {
 public:
  TimeSlicePlane() = default;
  /// Columns of `spanning` are orthonormalised (Gram-Schmidt, applied twice).
  /// Throws InvalidArgument if they are linearly dependent.
  TimeSlicePlane(SpaceTimePoint base, const Mat& spanning);

  /// The k = 0 plane {base}.
  static TimeSlicePlane point(SpaceTimePoint base);
  /// Plane through base spanned by the first k coordinate axes.
  static TimeSlicePlane coordinate(SpaceTimePoint base, int k);

  const SpaceTimePoint& base() const { return base_; }
  const Mat& directions() const { return directions_; }
  int k() const { return static_cast<int>(directions_.cols()); }
  int ambient_dim() const { return base_.dim(); }
  double time() const { return base_.t; }

  TimeSlicePlane translated_to(const SpaceTimePoint& new_base) const;

  /// Closest point of the (spatial) plane to x.
  Vec closest_spatial_point(const Vec& x) const;
  double spatial_distance(const Vec& x) const;

 private:
  SpaceTimePoint base_;
  Mat directions_;  // ambient_dim x k, orthonormal columns
};

struct Projection {
  Vec tangential;   // k coordinates in the plane's basis
  Vec normal;       // spatial component orthogonal to the plane
  double time_offset = 0.0;
};

Projection project(const SpaceTimePoint& p, const TimeSlicePlane& plane);
SpaceTimePoint reconstruct(const Projection& parts, const TimeSlicePlane& plane);

/// Exact parabolic distance from p to the plane: max(spatial distance, sqrt|dt|).
double parabolic_distance(const SpaceTimePoint& p, const TimeSlicePlane& plane);
bool in_parabolic_tube(const SpaceTimePoint& p, const TimeSlicePlane& plane, double r);

/// Principal angles (radians, ascending) between the direction spans.
std::vector<double> principal_angles(const TimeSlicePlane& v, const TimeSlicePlane& w);

/// sup |c + M a| over |a| <= rho (maximisation trust-region problem).
double max_affine_norm_on_ball(const Vec& c, const Mat& m, double rho);

/// Largest spatial distance to `w` from the disk of radius rho about `center`
/// inside plane `v` (center must lie in v).
double max_distance_from_disk(const TimeSlicePlane& v, const Vec& center, double rho,
                              const TimeSlicePlane& w);

/// Smallest delta with B_r(base_v) n V inside the spatial tube T_{delta r}(W).
double one_sided_tube_constant(const TimeSlicePlane& v, const TimeSlicePlane& w, double r);

struct SymmetryCheck {
  double forward = 0.0;   // tube constant of V in W at unit scale
  double backward = 0.0;  // tube constant of W in V at unit scale
  bool hypothesis_holds = false;  // forward <= delta < 1
};

/// For equal-dimension planes through a common point: if B_1 n V lies in
/// T_delta(W) with delta < 1 then B_1 n W lies in T_delta(V). Throws
/// DimensionMismatch when dimensions differ and LemmaViolation if the
/// conclusion fails while the hypothesis holds.
SymmetryCheck plane_symmetry_check(const TimeSlicePlane& v, const TimeSlicePlane& w,
                                   double delta);

/// Two-sided parabolic Hausdorff-type distance between the restrictions of
/// the planes to the closed parabolic ball of radius r about center, each
/// side measured against the other full plane.
double plane_hausdorff_distance(const TimeSlicePlane& v, const TimeSlicePlane& w, double r,
                                const SpaceTimePoint& center);

struct CloudPlaneDistance {
  double distance = 0.0;
  double cloud_to_plane = 0.0;
  double plane_to_cloud = 0.0;
  double sampling_gap = 0.0;  // spacing of the grid used on the plane side
};

/// Full two-sided parabolic Hausdorff distance between S n PB_r(center) and
/// V n PB_r(center), with the plane side sampled on a grid of
/// `samples_per_axis` points per direction.
CloudPlaneDistance plane_hausdorff_distance(const PointCloud& cloud, const TimeSlicePlane& plane,
                                            double r, const SpaceTimePoint& center,
                                            int samples_per_axis = 41);

}  // namespace mcfsing
