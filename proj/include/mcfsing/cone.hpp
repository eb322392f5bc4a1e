#pragma once

// Parabolic cones C_gamma(z) = {y : gamma |x(y) - x(z)|^2 >= |t(y) - t(z)|}
// and the local cone property of sampled sets.

#include "mcfsing/reifenberg.hpp"
#include "mcfsing/spacetime.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mcfsing {

struct ParabolicCone {
  SpaceTimePoint vertex;
  double gamma = 0.0;

  bool contains(const SpaceTimePoint& p) const;
};

struct ConeConstant {
  double gamma_star = 0.0;       // infinity when unbounded
  bool infinite = false;
  double raw = 0.0;              // finite-sample sup (infinity for dx = 0, dt != 0)
  double blowup_exponent = 0.0;  // see ratio_blowup_test
  std::pair<std::size_t, std::size_t> witness{0, 0};
  std::size_t pairs = 0;
};

/// sup of |dt| / |dx|^2 over pairs at parabolic distance < r0.
ConeConstant cone_constant(const PointCloud& cloud, double r0);

struct ConeProfile {
  std::vector<double> r0;  // decreasing
  std::vector<double> gamma_star;
  bool vanishing = false;
  bool monotone = true;  // gamma_star non-decreasing in r0
};

/// gamma*(r0) over a decreasing grid (default: 12 values from the diameter
/// down to the sampling floor).
ConeProfile cone_profile(const PointCloud& cloud, std::span<const double> r0_grid = {});

enum class ConeDirection { forward, backward };

struct HalfConeResult {
  bool holds = false;
  double level = 0.0;       // smallest gamma for this half cone
  double full_level = 0.0;  // smallest gamma for the full cone
  std::vector<std::pair<std::size_t, std::size_t>> violations;  // (vertex, point)
};

/// Checks S n PB_r0(z) n {t > t(z)} (forward) or {t < t(z)} (backward) inside
/// C_gamma(z) at every z. Throws LemmaViolation if the half level and the
/// full level ever disagree.
HalfConeResult half_cone_check(const PointCloud& cloud, double gamma, double r0,
                               ConeDirection direction);

struct ConeGraph {
  std::vector<std::size_t> domain;
  std::vector<Vec> x;
  std::vector<double> u;
  double gamma = 0.0;
  double certified = 0.0;  // max |du| / |dx|^2 over pairs within r0
};

/// u(x(z)) = t(z) on S. Throws PreconditionFailed when the cone property at
/// gamma is not verified and InjectivityFailure if two points share a spatial
/// position within r0.
ConeGraph cone_graph_extract(const PointCloud& cloud, double gamma, double r0);

struct ConeTimeSliceReport {
  ConeProfile profile;
  std::vector<double> ph2_scales;
  std::vector<double> ph2_sums;
  TimeSliceReport slice;
};

/// Parabolic 2-dimensional covering sums at the three smallest scales above
/// the sampling floor.
std::pair<std::vector<double>, std::vector<double>> ph2_proxy(const PointCloud& cloud);

/// Requires a vanishing cone profile and bounded PH_2 covering sums, then
/// runs time_slice_test.
ConeTimeSliceReport cone_time_slice_test(const PointCloud& cloud,
                                         std::optional<std::vector<int>> labels = std::nullopt,
                                         double spread_tolerance = 1e-9);

}  // namespace mcfsing
