#pragma once

// Strong parabolic (half) Reifenberg profiling of space-time point sets,
// f-regularity of plane distributions, Lipschitz graph extraction and the
// 2-Hölder / time-slice analysis of singular sets.

#include "mcfsing/planes.hpp"
#include "mcfsing/spacetime.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mcfsing {

/// Largest delta accepted by the graph extraction routines. The bi-Lipschitz
/// argument needs delta < 1/9 and a few factors of slack beyond that.
inline constexpr double kLemmaDeltaMax = 1.0 / 20.0;

/// One time-slice k-plane per point of a cloud, each based at its point.
struct PlaneAssignment {
  std::vector<TimeSlicePlane> planes;
  int k = 0;

  /// Every point receives a translate of `prototype`.
  static PlaneAssignment uniform(const PointCloud& cloud, const TimeSlicePlane& prototype);
  /// Throws if a plane is not based at its point or the dimensions disagree.
  void validate(const PointCloud& cloud) const;
};

/// Weighted least-squares k-plane through each point, using neighbours in the
/// parabolic ball of radius `fit_scale` with weights 1 - (d/fit_scale)^2.
PlaneAssignment fit_plane_assignment(const PointCloud& cloud, int k, double fit_scale);

struct ReifenbergProfile {
  std::vector<double> scales;  // decreasing
  std::vector<double> delta;
  std::vector<std::size_t> witness_base;   // point realising the sup
  std::vector<std::size_t> witness_point;  // farthest point from the base plane
  double floor = 0.0;
  bool vanishing = false;
};

/// sup over points q of S n PB_r(p_i) of dist_P(q, V_i) / r.
double point_defect(const PointCloud& cloud, const TimeSlicePlane& plane, std::size_t base,
                    double r);

/// Per-scale supremum of the half-Reifenberg defect. Scales below the
/// sampling floor are rejected unless `enforce_floor` is false.
ReifenbergProfile strong_reifenberg_profile(const PointCloud& cloud, const PlaneAssignment& planes,
                                            std::span<const double> scales,
                                            bool enforce_floor = true);

/// sup over all scales r <= r_max of the defect at point `base` for `plane`
/// (equal to max_j dist_P(q_j, V) / dist_P(q_j, p) over q_j with
/// 0 < dist_P < r_max).
double all_scales_defect(const PointCloud& cloud, const TimeSlicePlane& plane, std::size_t base,
                         double r_max);

/// Largest r0 such that the defect at `base` stays <= delta for all r <= r0
/// (infinity when it never exceeds delta).
double local_reifenberg_radius(const PointCloud& cloud, const TimeSlicePlane& plane,
                               std::size_t base, double delta);

struct BestPlane {
  TimeSlicePlane plane;
  double defect = 0.0;
};

/// Minimax search over time-slice k-planes through point `base` for the
/// smallest all-scales defect up to r_max.
BestPlane best_strong_plane(const PointCloud& cloud, std::size_t base, int k, double r_max);

/// Two-sided (full) Reifenberg defect at a point and scale.
double full_reifenberg_defect(const PointCloud& cloud, const TimeSlicePlane& plane,
                              std::size_t base, double r);

struct RegularityFunction {
  std::vector<double> bin_lower;
  std::vector<double> bin_upper;
  std::vector<double> raw;       // per-bin sup of the normalised plane distance
  std::vector<double> envelope;  // running max (non-decreasing in r)
  std::vector<std::size_t> pair_counts;

  /// Envelope value for pair distance r (0 below the first bin).
  double value_at(double r) const;
};

/// Bins point pairs by parabolic distance and records the sup over each bin
/// of d_PH(PB_r(p_i) n V_i, PB_r(p_i) n V_j) / r with r = dist_P(p_i, p_j).
RegularityFunction f_regularity_profile(const PointCloud& cloud, const PlaneAssignment& planes,
                                        std::size_t bins = 12);

/// Normalised plane distance for a single pair (i, j).
double pair_regularity(const PointCloud& cloud, const PlaneAssignment& planes, std::size_t i,
                       std::size_t j);

struct GraphSample {
  std::size_t index = 0;
  Vec tangential;
  Vec normal;
  double time = 0.0;
};

struct LipschitzGraph {
  TimeSlicePlane plane;
  std::vector<GraphSample> samples;
  double constant = 1.0;         // Lipschitz constant of the inverse projection
  double time_constant = 0.0;    // sup |dt|^{1/2} / |d pi|
  double normal_constant = 0.0;  // sup |d normal| / |d pi|
  double working_radius = 0.0;
  double reifenberg_defect = 0.0;
  double hypothesis_distance = 0.0;  // two-sided distance / r0, or f sup
};

/// Projects PB_{r0/2}(p_base) n S onto `plane` after checking the strong
/// Reifenberg property at level delta on PB_{r0}(p_base) and the two-sided
/// closeness d_PH(PB_{r0} n S, PB_{r0} n V) < delta r0.
LipschitzGraph extract_bilipschitz_graph(const PointCloud& cloud, const PlaneAssignment& planes,
                                         std::size_t base, const TimeSlicePlane& plane, double r0,
                                         double delta);
LipschitzGraph extract_bilipschitz_graph(const PointCloud& cloud, const PlaneAssignment& planes,
                                         std::size_t base, double r0, double delta);

/// Same contract, with f-regularity of the assignment (f < delta on pairs in
/// PB_{r0}(p_base)) in place of the two-sided closeness check.
LipschitzGraph extract_lipschitz_graph_fregular(const PointCloud& cloud,
                                                const PlaneAssignment& planes, std::size_t base,
                                                double r0, double delta);

struct HolderFit {
  bool single_valued = true;
  std::vector<std::size_t> domain;  // point indices forming the graph (one per spatial position)
  double constant = 0.0;            // sup |dt| / |dx|^2 (infinity when unbounded)
  bool unbounded = false;
  std::pair<std::size_t, std::size_t> witness{0, 0};
  double raw_constant = 0.0;        // finite-sample sup before the blow-up test
  double blowup_exponent = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> eps;          // decreasing
  std::vector<double> gamma;        // sup over |dx| <= eps
  bool vanishing = false;
  std::vector<std::vector<std::size_t>> sheets;  // finite-to-one partition
};

struct BlowupTest {
  double exponent = std::numeric_limits<double>::quiet_NaN();
  std::size_t bins_used = 0;
  bool unbounded = false;
};

/// Given (|dx|, |dt|/|dx|^2) pairs sorted by |dx|, fits the log-log slope of
/// the per-bin maximum ratio. Slopes below -1/2 over at least 3 bins are read
/// as a ratio that grows without bound as the spacing shrinks.
BlowupTest ratio_blowup_test(std::span<const std::pair<double, double>> dx_ratio,
                             std::size_t bins = 12);

/// Fits t = u(x) over the spatial projection. Colliding spatial positions
/// yield a multi-valued partition into sheets instead of a single graph.
HolderFit two_holder_fit(const PointCloud& cloud);

/// Parabolic Lipschitz constant of x -> (x, u(x)) measured on all pairs.
double graph_parabolic_lipschitz(const PointCloud& cloud, const HolderFit& fit);

struct ComponentVerdict {
  int label = 0;
  std::size_t size = 0;
  double time_spread = 0.0;
  bool time_slice = false;
};

struct TimeSliceReport {
  HolderFit fit;
  std::vector<double> eps;
  std::vector<double> h1_bound;  // gamma(eps) * sum of r_i^2 over a spatial eps-cover
  bool h1_vanishing = false;
  std::vector<double> spatial_cover_sums;  // 2-dim spatial covering sums, smallest scales
  std::vector<ComponentVerdict> components;
  std::size_t distinct_times = 0;
  bool all_time_slices = false;
};

/// Single-linkage components of a cloud at parabolic distance threshold.
std::vector<int> linkage_components(const PointCloud& cloud, double threshold);

/// Covering estimate of H_1(t(S)) and per-component time-slice verdicts.
/// Throws PreconditionFailed if S is not a single-valued 2-Hölder graph with
/// vanishing constant and bounded 2-dimensional spatial covering sums.
TimeSliceReport time_slice_test(const PointCloud& cloud,
                                std::optional<std::vector<int>> labels = std::nullopt,
                                double spread_tolerance = 1e-9);

}  // namespace mcfsing
