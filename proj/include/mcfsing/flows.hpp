#pragma once

// Flow data model, exact self-similar flows, the rotationally symmetric
// solvers and the analysis of detected singularities.

#include "mcfsing/cone.hpp"
#include "mcfsing/gaussian.hpp"
#include "mcfsing/planes.hpp"
#include "mcfsing/reifenberg.hpp"
#include "mcfsing/spacetime.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mcfsing {

/// w = u^2 on a uniform grid x_i = x0 + i h; `alive` marks nodes inside the surface.
struct GraphProfile {
  double x0 = 0.0;
  double h = 0.0;
  std::vector<double> w;
  std::vector<char> alive;
  bool periodic = false;

  double x(std::size_t i) const { return x0 + h * static_cast<double>(i); }
};

struct FlowSnapshot {
  double time = 0.0;
  WeightedHypersurface surface;
  double spacing = 0.0;
  double dt = 0.0;
  std::optional<GraphProfile> graph;
};

enum class FlowKind { analytic, rotational, torus };
enum class PinchKind { neck, extinction, circle };
enum class RunStatus { resolved, unresolved };

/// Recorded singular candidate. For a circle, `location` is one point of
/// the circle {x_1 = location.x[0], |x_perp| = circle_radius}.
struct PinchRecord {
  PinchKind kind = PinchKind::neck;
  SpaceTimePoint location;
  double circle_radius = 0.0;
};

struct AnalyticSpec {
  std::string kind = "sphere";  // sphere | cylinder | plane
  int n = 2;
  int j = 0;
  double r0 = 1.0;
};

class Flow {
 public:
  int n = 2;
  FlowKind kind = FlowKind::analytic;
  RunStatus status = RunStatus::resolved;
  std::string note;
  double lambda0 = 1.0;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<FlowSnapshot> snapshots;
  std::vector<PinchRecord> pinches;
  std::optional<AnalyticSpec> analytic;

  int ambient_dim() const { return n + 1; }

  /// M_t, or nullopt once the flow has become extinct. Simulated flows need
  /// a snapshot within `tolerance` of t (PreconditionFailed otherwise).
  std::optional<WeightedHypersurface> surface_at(double t, double tolerance = 1e-12) const;

  /// Times t - tau at which M is available, aiming at a geometric tau grid
  /// between tau_min and tau_max (at most `count`, tau decreasing).
  std::vector<double> backward_taus(double t, double tau_min, double tau_max,
                                    std::size_t count) const;
};

/// Exact flows: sphere radius sqrt(r0^2 - 2 n t), cylinder R^j x S^{n-j}
/// radius sqrt(r0^2 - 2 (n-j) t), static plane; snapshots every
/// `snapshot_interval` up to t_end. Reaching T records the sphere's
/// extinction point, or neck pinches sampled along the cylinder axis.
Flow analytic_flow(const AnalyticSpec& spec, double t_end, double snapshot_interval = 0.05);

double analytic_extinction_time(const AnalyticSpec& spec);

struct RotsymControls {
  int n = 2;
  double h = 0.01;
  double cfl = 0.4;
  double t_end = std::numeric_limits<double>::infinity();
  double snapshot_interval = 0.01;
  double drop_fraction = 0.1;  // extra snapshot whenever a neck or bulb w drops by this
  double pinch_factor = 1e-3;  // pinch when u < pinch_factor * reference u
  bool periodic = false;
  std::size_t max_steps = 20'000'000;
};

/// Evolves u_t = u_xx / (1 + u_x^2) - (n-1)/u through w = u^2. Closed mode
/// needs u0(a) = u0(b) = 0 (caps); periodic mode needs u0 > 0 everywhere.
Flow rotsym_mcf_run(const std::function<double(double)>& u0, double a, double b,
                    const RotsymControls& controls);

/// Symmetric two-bulb profile on [-(gap + bulb), gap + bulb]: spheres of
/// radius `bulb` centred at +-gap joined by a neck of radius `neck` at 0.
std::function<double(double)> dumbbell_profile(double bulb, double neck, double gap);

struct TorusControls {
  int n = 2;
  std::size_t points = 160;
  double cfl = 0.2;
  double t_end = std::numeric_limits<double>::infinity();
  double snapshot_interval = 0.01;
  double collapse_fraction = 0.05;  // stop when the profile diameter drops below this fraction
  std::size_t max_steps = 20'000'000;
};

/// Circle of radius rho about (x_center, r_center) in the (x_1, r) half-plane.
ProfileCurve torus_profile(double r_center, double rho, std::size_t points, double x_center = 0.0);

/// Closed profile curve moved by the mean curvature of the revolved surface.
Flow rotsym_torus_run(const ProfileCurve& initial, const TorusControls& controls);

struct SingularEvent {
  SpaceTimePoint location;
  DensityEstimate density;
  int j = -1;  // -1 when unclassified
  bool classified = false;
  TimeSlicePlane axis;
  PinchKind source = PinchKind::neck;
  std::vector<double> eta_s;
  std::vector<double> eta;
};

struct DetectOptions {
  DensityOptions density;
  double class_tolerance = 0.05;  // relative distance to the nearest Theta_k
  std::size_t circle_samples = 64;
};

/// Density and ladder classification of every recorded pinch.
std::vector<SingularEvent> detect_singularities(const Flow& flow, const DetectOptions& options = {});

struct CylindricalFit {
  int j = 0;
  double s = 0.0;
  TimeSlicePlane axis;
  double eta = std::numeric_limits<double>::infinity();
  bool graphical = false;
  double offset = 0.0;       // axis offset / cylinder radius (rescaled)
  double max_slope = 0.0;    // tan of the largest normal angle
  double max_radial = 0.0;   // largest |radial offset| / cylinder radius
  double axis_angle = 0.0;   // angle between fitted axis and the event axis (radians)
};

/// Rescales M_{t0 - s} by 1/sqrt(s) about x0 and fits the cylinder of
/// radius sqrt(2(n-j)) on the ball of radius `ball_factor`.
CylindricalFit cylindrical_fit(const Flow& flow, const SingularEvent& event, double s,
                               double ball_factor = 2.0);

/// Fills event.eta_s / event.eta from cylindrical_fit on the available s in [s_min, s_max].
void attach_eta_profile(const Flow& flow, SingularEvent& event, double s_min, double s_max,
                        std::size_t count = 8, double ball_factor = 2.0);

struct Stratification {
  int n = 2;
  std::vector<std::vector<std::size_t>> strata;  // strata[k] = events with j <= k
  std::vector<double> thresholds;                // Theta_k midpoints used for banding
  std::vector<std::size_t> excluded;             // unclassified events
  std::vector<double> isolation_radius;          // per S_0 event
  bool s0_isolated = true;
  bool top_compact = true;
  std::vector<std::string> warnings;
};

Stratification stratify(const std::vector<SingularEvent>& events, int n);

struct SingularSetReport {
  PointCloud cloud;
  std::optional<ReifenbergProfile> reifenberg;
  std::optional<HolderFit> holder;
  std::optional<ConeConstant> cone;
  std::optional<TimeSliceReport> time_slice;
  std::vector<std::string> notes;
};

/// Event cloud plus Reifenberg (axis planes), 2-Hölder, cone and time-slice
/// analyses. Sub-analyses whose hypotheses fail are recorded in `notes`.
SingularSetReport singular_set_report(const Flow& flow, const std::vector<SingularEvent>& events);

}  // namespace mcfsing
