#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcfsing/errors.hpp"
#include "mcfsing/flows.hpp"
#include "mcfsing/gaussian.hpp"

#include <cmath>

using namespace mcfsing;

namespace {

const double kTheta0 = 4.0 / std::exp(1.0);
const double kTheta1 = std::sqrt(2.0 * M_PI / std::exp(1.0));

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Mat e1() {
  Mat m = Mat::Zero(3, 1);
  m(0, 0) = 1.0;
  return m;
}

// F_{0,1} of S^m with radius sqrt(2m), from the sphere area formula.
double shrinker_sphere_value(int m) {
  const double area = 2.0 * std::pow(M_PI, (m + 1) / 2.0) / std::tgamma((m + 1) / 2.0);
  return area * std::pow(2.0 * m, m / 2.0) * std::pow(4.0 * M_PI, -m / 2.0) * std::exp(-m / 2.0);
}

}  // namespace

TEST_CASE("F on closed-form surfaces") {
  CHECK(f_functional(WeightedHypersurface::plane(v3(0, 0, 0), v3(0, 0, 1)), v3(0.3, 1, 0), 0.7) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const auto s2 = WeightedHypersurface::sphere(v3(0, 0, 0), 2.0);
  CHECK(f_functional(s2, v3(0, 0, 0), 1.0) == doctest::Approx(kTheta0).epsilon(1e-12));
  const auto cyl = WeightedHypersurface::cylinder(v3(0, 0, 0), e1(), std::sqrt(2.0), 8.0);
  CHECK(std::abs(f_functional(cyl, v3(0, 0, 0), 1.0) - kTheta1) < 1e-4);
}

TEST_CASE("closed forms agree with direct quadrature") {
  const auto s2 = WeightedHypersurface::sphere(v3(0.2, 0, 0), 1.5);
  const Vec x = v3(0.5, 0.3, -0.2);
  for (double tau : {0.3, 1.0, 2.0}) {
    const double closed = f_functional(s2, x, tau);
    CHECK(f_functional_quadrature(s2, x, tau, 0.02) == doctest::Approx(closed).epsilon(1e-2));
  }
  // Sphere of radius 2 written as a revolved half circle.
  ProfileCurve half;
  for (int i = 0; i <= 400; ++i) {
    const double a = M_PI * i / 400.0;
    half.points.emplace_back(2.0 * std::cos(a), 2.0 * std::sin(a));
  }
  const auto rev = WeightedHypersurface::revolution(2, {half});
  CHECK(f_functional(rev, v3(0, 0, 0), 1.0) == doctest::Approx(kTheta0).epsilon(1e-4));
  CHECK(f_functional(rev, v3(0.4, 0, 0), 0.5) ==
        doctest::Approx(f_functional(WeightedHypersurface::sphere(v3(0, 0, 0), 2.0), v3(0.4, 0, 0), 0.5))
            .epsilon(1e-4));
}

TEST_CASE("entropy") {
  const auto s = entropy(WeightedHypersurface::sphere(v3(1, 2, 3), 2.0));
  CHECK(s.value == doctest::Approx(kTheta0).epsilon(1e-4));
  CHECK((s.center - v3(1, 2, 3)).norm() < 1e-2);
  CHECK(s.tau == doctest::Approx(1.0).epsilon(1e-2));
  const auto c = entropy(WeightedHypersurface::cylinder(v3(0, 0, 0), e1(), 3.0));
  CHECK(c.value == doctest::Approx(kTheta1).epsilon(1e-4));
  const auto p = entropy(WeightedHypersurface::plane(v3(0, 0, 0), v3(0, 1, 0)));
  CHECK(p.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("density ladder") {
  const auto t2 = cylinder_density_table(2);
  REQUIRE(t2.size() == 2);
  CHECK(std::abs(t2[0] - kTheta0) < 1e-6);
  CHECK(std::abs(t2[1] - kTheta1) < 1e-6);
  const auto t1 = cylinder_density_table(1);
  REQUIRE(t1.size() == 1);
  CHECK(std::abs(t1[0] - kTheta1) < 1e-6);
  for (int n = 1; n <= 7; ++n) {
    const auto t = cylinder_density_table(n);
    for (int k = 0; k < n; ++k) {
      CHECK(t[k] > 1.0);
      CHECK(t[k] == doctest::Approx(shrinker_sphere_value(n - k)).epsilon(1e-12));
      if (k > 0) CHECK(t[k] > t[k - 1]);
    }
  }
  CHECK(nearest_cylinder_index(2, 1.47) == 0);
  CHECK(nearest_cylinder_index(2, 1.52) == 1);
  CHECK(nearest_cylinder_index(2, 1.0) == 2);
}

TEST_CASE("monotonicity along the analytic sphere") {
  const auto flow = analytic_flow({"sphere", 2, 0, 2.0}, 1.0);
  std::vector<double> taus;
  for (int i = 0; i < 50; ++i) taus.push_back(1e-3 * std::pow(900.0, i / 49.0));
  const auto centred = monotonicity_check(flow, v3(0, 0, 0), 1.0, taus, 1e-8);
  CHECK(centred.monotone);
  const auto [lo, hi] = std::minmax_element(centred.f.begin(), centred.f.end());
  CHECK(*hi - *lo <= 1e-8);
  CHECK(*lo == doctest::Approx(kTheta0).epsilon(1e-10));

  const auto off = monotonicity_check(flow, v3(0.5, 0.2, 0), 1.0, taus, 1e-8);
  CHECK(off.monotone);
  CHECK(off.worst_violation <= 1e-8);
  for (double f : off.f) CHECK(f < kTheta0);
}

TEST_CASE("Gaussian density of the analytic sphere") {
  const auto flow = analytic_flow({"sphere", 2, 0, 2.0}, 1.0);
  const auto smooth = gaussian_density(flow, v3(std::sqrt(2.0), 0, 0), 0.5);
  CHECK(smooth.value == doctest::Approx(1.0).epsilon(1e-2));
  const auto sing = gaussian_density(flow, v3(0, 0, 0), 1.0);
  CHECK(sing.value == doctest::Approx(kTheta0).epsilon(1e-6));
  CHECK(sing.monotone);
}

TEST_CASE("clearing-out constants") {
  // The certificate region is empty for eta = 0.01 at lambda0 = 2.
  CHECK_THROWS_AS(clearing_constants(0.01, 2.0, 2, 1), PreconditionFailed);

  const auto c = clearing_constants(0.002, 2.0, 2, 1);
  CHECK(c.omega > 0.0);
  CHECK(c.T >= 1.0);
  CHECK(c.far_term <= 0.25);
  CHECK(c.near_term <= 0.25);
  CHECK(c.window_nonempty);
  CHECK(c.omega * std::sqrt(c.T) < 1.0 / c.eta);

  const auto surfaces = perturbed_cylinders(2, 1, 0.002, 10, 11);
  const auto cert = certify_clearing(c, surfaces, 100, 3);
  CHECK(cert.samples.size() == 100);
  CHECK(cert.holds);
  CHECK(cert.max_f <= 0.5);

  std::vector<WeightedHypersurface> planes{WeightedHypersurface::plane(v3(0, 0, 0), v3(0, 0, 1))};
  CHECK_FALSE(certify_clearing(c, planes, 20, 3).holds);
}

TEST_CASE("exact cylinder axis crossing time") {
  const double T = cylinder_axis_crossing_time(2, 1);
  const auto cyl = WeightedHypersurface::cylinder(v3(0, 0, 0), e1(), std::sqrt(2.0));
  CHECK(f_functional(cyl, v3(0, 0, 0), T) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(f_functional(cyl, v3(0, 0, 0), 4.0 * T) < 0.5);
}

TEST_CASE("clearing window on exact flows") {
  const auto c = clearing_constants(0.002, 2.0, 2, 1);
  SUBCASE("shrinking sphere: nothing left after extinction") {
    const auto flow = analytic_flow({"sphere", 2, 0, 2.0}, 1.0);
    const auto w = clearing_window_scan(flow, make_point({0, 0, 0}, 1.0), 0.002, 0.1, c.T, c.omega);
    CHECK(w.checked);
    CHECK(w.cleared);
  }
  SUBCASE("exact cylinder passes the cylindricality precondition") {
    const auto flow = analytic_flow({"cylinder", 2, 1, std::sqrt(2.0)}, 2.0);
    auto events = detect_singularities(flow);
    REQUIRE_FALSE(events.empty());
    attach_eta_profile(flow, events[0], 1e-3, 0.1);
    const auto w = clearing_window_check(flow, events[0], 0.002, 0.1, c.T, c.omega);
    CHECK(w.checked);
    CHECK(w.cleared);
  }
  SUBCASE("eta above the level is refused") {
    const auto flow = analytic_flow({"cylinder", 2, 1, std::sqrt(2.0)}, 2.0);
    auto ev = detect_singularities(flow).front();
    ev.eta_s = {0.05};
    ev.eta = {0.5};
    CHECK_THROWS_AS(clearing_window_check(flow, ev, 0.002, 0.1, c.T, c.omega), PreconditionFailed);
  }
}
