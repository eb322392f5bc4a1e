#pragma once

// Gaussian surface area F_{x,tau}, entropy, densities and the cylinder
// density ladder, plus the clearing-out constants (T, omega).

#include "mcfsing/spacetime.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <span>
#include <variant>
#include <vector>

namespace mcfsing {

class Flow;
struct SingularEvent;

struct SphereShape {
  Vec center;
  double radius = 1.0;
};

/// R^j x S^{n-j}_radius; `axis` holds j orthonormal columns. Each axis
/// coordinate is truncated to [-half_length, half_length] when finite.
struct CylinderShape {
  Vec base;
  Mat axis;
  double radius = 1.0;
  double half_length = std::numeric_limits<double>::infinity();
};

struct PlaneShape {
  Vec base;
  Vec normal;
};

/// Polyline in the (x_1, r) half-plane, r >= 0.
struct ProfileCurve {
  std::vector<Eigen::Vector2d> points;
  bool closed = false;
};

/// Hypersurface obtained by rotating profile curves about the x_1-axis.
struct RevolutionShape {
  std::vector<ProfileCurve> curves;
};

struct SampledShape {
  std::vector<Vec> points;
  std::vector<double> weights;  // area weights
};

class WeightedHypersurface {
 public:
  using Shape = std::variant<SampledShape, SphereShape, CylinderShape, PlaneShape, RevolutionShape>;

  WeightedHypersurface() = default;
  /// `n` is the hypersurface dimension (ambient n + 1).
  WeightedHypersurface(int n, Shape shape);

  static WeightedHypersurface sphere(Vec center, double radius);
  static WeightedHypersurface cylinder(Vec base, Mat axis, double radius,
                                       double half_length = std::numeric_limits<double>::infinity());
  static WeightedHypersurface plane(Vec base, Vec normal);
  static WeightedHypersurface revolution(int n, std::vector<ProfileCurve> curves);
  static WeightedHypersurface sampled(std::vector<Vec> points, std::vector<double> weights);

  int n() const { return n_; }
  int ambient_dim() const { return n_ + 1; }
  const Shape& shape() const { return shape_; }
  bool bounded() const;
  bool empty() const;

  /// Point samples with area weights at roughly the given spacing (ambient
  /// dimension 2 or 3; unbounded shapes must be truncated first).
  SampledShape discretize(double spacing) const;

 private:
  int n_ = 0;
  Shape shape_;
};

/// |S^m|, the area of the unit m-sphere in R^{m+1}.
double unit_sphere_area(int m);
/// Volume of the unit ball in R^m.
double unit_ball_volume(int m);
/// e^{-z} times the integral over the unit S^m of exp(z * theta_1).
double sphere_exp_integral_scaled(int m, double z);

/// (4 pi tau)^{-n/2} int_Sigma exp(-|y - x|^2 / (4 tau)) dy.
double f_functional(const WeightedHypersurface& surface, const Vec& x, double tau);

/// Direct quadrature on discretize(spacing); used to cross-check closed forms.
double f_functional_quadrature(const WeightedHypersurface& surface, const Vec& x, double tau,
                               double spacing);

struct EntropyResult {
  double value = 0.0;
  Vec center;
  double tau = 0.0;
  double spread = 0.0;  // max - min over the local refinements
};

/// sup over (x, tau) of F_{x,tau}: coarse log-grid, then Nelder-Mead from the
/// five best cells.
EntropyResult entropy(const WeightedHypersurface& surface);

/// Theta_k = F_{0,1}(R^k x S^{n-k}_{sqrt(2(n-k))}).
double cylinder_density(int n, int k);
/// Theta_0 < Theta_1 < ... < Theta_{n-1}. Throws LemmaViolation if the
/// ladder is not strictly increasing and above one.
std::vector<double> cylinder_density_table(int n);
/// Index k of the ladder entry closest to theta.
int nearest_cylinder_index(int n, double theta);

/// F_{0,t} of the exact cylinder R^j x S^{n-j}_{sqrt(2(n-j))} at a point of
/// its axis crosses 1/2 at this t.
double cylinder_axis_crossing_time(int n, int j);

struct ClearingConstants {
  int n = 2;
  int j = 1;
  double eta = 0.0;
  double lambda0 = 1.0;
  double T = 0.0;
  double omega = 0.0;
  double c_n = 0.0;
  double near_term = 0.0;  // bound on the F contribution from B_{omega sqrt t}
  double far_term = 0.0;   // bound on the contribution from outside it
  double window_start = 0.0;  // T - 1
  double window_end = 0.0;    // (eta^{-2} - 4 omega^2) / (4 omega^2)
  bool window_nonempty = false;
};

/// Smallest grid omega with far term <= 1/4, then the smallest grid T with
/// near term <= 1/4. Throws PreconditionFailed when the certificate region
/// {t >= T, |x| + omega sqrt t <= 1/eta} is empty (eta too large).
ClearingConstants clearing_constants(double eta, double lambda0, int n, int j = -1);

struct ClearingSample {
  std::size_t surface = 0;
  Vec x;
  double t = 0.0;
  double f = 0.0;
};

struct ClearingCertificate {
  std::vector<ClearingSample> samples;
  double max_f = 0.0;
  bool holds = false;
};

/// Cylinders R^j x S^{n-j}_{sqrt(2(n-j))} with radius, axis direction and
/// base perturbed by at most eta.
std::vector<WeightedHypersurface> perturbed_cylinders(int n, int j, double eta, std::size_t count,
                                                      std::uint64_t seed);

/// Evaluates F_{x,t} on `count` sampled (x, t) with t >= T and
/// |x| + omega sqrt t <= 1/eta, spread over the surfaces.
ClearingCertificate certify_clearing(const ClearingConstants& constants,
                                     const std::vector<WeightedHypersurface>& surfaces,
                                     std::size_t count, std::uint64_t seed);

struct MonotonicityReport {
  std::vector<double> tau;  // increasing
  std::vector<double> f;
  double worst_violation = 0.0;  // max over tau1 < tau2 of F(tau1) - F(tau2)
  bool monotone = false;
};

/// F_{x,tau}(M_{t - tau}) for each tau, checked for monotonicity in tau.
MonotonicityReport monotonicity_check(const Flow& flow, const Vec& x, double t,
                                      std::span<const double> taus, double tolerance);

struct DensityEstimate {
  double value = 0.0;
  std::vector<double> tau;  // decreasing
  std::vector<double> f;
  double residual = 0.0;
  bool monotone = false;  // F non-increasing as tau decreases
  bool flagged = false;   // residual above the threshold
};

struct DensityOptions {
  double tau_max = 0.25;
  double tau_min = 1e-4;
  std::size_t count = 12;
  double residual_threshold = 0.02;
};

/// lim_{tau -> 0} F_{x,tau}(M_{t - tau}) on a geometric tau grid with linear
/// extrapolation in tau over the three smallest values.
DensityEstimate gaussian_density(const Flow& flow, const Vec& x, double t,
                                 const DensityOptions& options = {});

struct ClearingWindowReport {
  bool checked = false;
  bool cleared = false;
  std::vector<double> s;
  std::vector<double> ball_radius;
  std::vector<double> t_begin;
  std::vector<double> t_end;
  std::vector<double> closest;  // distance from x0 to M_t over the window, per s
  double first_violation_s = 0.0;
  double first_violation_t = 0.0;
};

/// For s in (0, tau) checks B_{sqrt(s)/(2 eta)}(x0) n M_t = empty for
/// t0 + (T-1) s < t < t0 + window_end * s. Throws PreconditionFailed when the
/// event is not (j, eta)-cylindrical on time-scale tau or the flow is not
/// continued past t0.
ClearingWindowReport clearing_window_check(const Flow& flow, const SingularEvent& event, double eta,
                                           double tau, double T, double omega,
                                           std::size_t s_samples = 8);

/// Same window test without the cylindricality precondition.
ClearingWindowReport clearing_window_scan(const Flow& flow, const SpaceTimePoint& x0, double eta,
                                          double tau, double T, double omega,
                                          std::size_t s_samples = 8);

}  // namespace mcfsing
