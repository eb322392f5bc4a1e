#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcfsing/errors.hpp"
#include "mcfsing/flows.hpp"

#include <cmath>

using namespace mcfsing;

namespace {

const double kTheta0 = 4.0 / std::exp(1.0);
const double kTheta1 = std::sqrt(2.0 * M_PI / std::exp(1.0));

const Flow& dumbbell() {
  static const Flow f = [] {
    RotsymControls c;
    c.h = 0.01;
    return rotsym_mcf_run(dumbbell_profile(1.5, 0.5, 3.0), -4.5, 4.5, c);
  }();
  return f;
}

const std::vector<SingularEvent>& dumbbell_events() {
  static const auto ev = detect_singularities(dumbbell());
  return ev;
}

const Flow& torus() {
  static const Flow f = rotsym_torus_run(torus_profile(2.0, 0.5, 160), {});
  return f;
}

}  // namespace

TEST_CASE("analytic extinction times") {
  CHECK(analytic_extinction_time({"sphere", 2, 0, 2.0}) == doctest::Approx(1.0));
  CHECK(analytic_extinction_time({"cylinder", 2, 1, std::sqrt(2.0)}) == doctest::Approx(1.0));
  CHECK(std::isinf(analytic_extinction_time({"plane", 2, 0, 1.0})));
  CHECK_THROWS_AS(analytic_flow({"sphere", 2, 0, -1.0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(analytic_flow({"cylinder", 2, 2, 1.0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(analytic_flow({"torus", 2, 0, 1.0}, 1.0), InvalidArgument);
}

TEST_CASE("analytic flows") {
  const auto sphere = analytic_flow({"sphere", 2, 0, 2.0}, 5.0);
  REQUIRE(sphere.pinches.size() == 1);
  CHECK(sphere.pinches[0].kind == PinchKind::extinction);
  CHECK(sphere.pinches[0].location.t == doctest::Approx(1.0));
  CHECK_FALSE(sphere.surface_at(1.5).has_value());
  const auto half = sphere.surface_at(0.5);
  REQUIRE(half);
  CHECK(std::get<SphereShape>(half->shape()).radius == doctest::Approx(std::sqrt(2.0)));

  const auto plane = analytic_flow({"plane", 2, 0, 1.0}, 0.2);
  CHECK(plane.pinches.empty());
  for (const auto& s : plane.snapshots) {
    const auto& p = std::get<PlaneShape>(s.surface.shape());
    CHECK(p.normal.isApprox(std::get<PlaneShape>(plane.snapshots[0].surface.shape()).normal));
    CHECK(p.base.isApprox(std::get<PlaneShape>(plane.snapshots[0].surface.shape()).base));
  }
}

TEST_CASE("periodic cylinder matches sqrt(2 - 2t)") {
  RotsymControls c;
  c.periodic = true;
  c.h = 0.02;
  c.t_end = 0.5;
  const auto f = rotsym_mcf_run([](double) { return std::sqrt(2.0); }, 0.0, 2.0, c);
  CHECK(f.status == RunStatus::resolved);
  for (const auto& s : f.snapshots) {
    REQUIRE(s.graph);
    for (std::size_t i = 0; i < s.graph->w.size(); i += 10)
      CHECK(std::abs(std::sqrt(s.graph->w[i]) - std::sqrt(2.0 - 2.0 * s.time)) < 1e-3);
  }
}

TEST_CASE("spherical cap profile reaches round extinction at t = 1") {
  RotsymControls c;
  c.h = 0.01;
  const auto f = rotsym_mcf_run([](double x) { return std::sqrt(std::max(0.0, 4.0 - x * x)); }, -2.0, 2.0, c);
  REQUIRE(f.pinches.size() == 1);
  CHECK(f.pinches[0].kind == PinchKind::extinction);
  CHECK(std::abs(f.pinches[0].location.t - 1.0) < 1e-2);
  CHECK(std::abs(f.pinches[0].location.x[0]) < 1e-2);
}

TEST_CASE("invalid solver input") {
  RotsymControls c;
  c.h = -1.0;
  CHECK_THROWS_AS(rotsym_mcf_run(dumbbell_profile(1.5, 0.5, 3.0), -4.5, 4.5, c), InvalidArgument);
  RotsymControls p;
  p.periodic = true;
  CHECK_THROWS_AS(rotsym_mcf_run([](double x) { return x; }, 0.0, 1.0, p), InvalidArgument);
}

TEST_CASE("dumbbell neckpinch") {
  const auto& f = dumbbell();
  CHECK(f.status == RunStatus::resolved);
  const auto& ev = dumbbell_events();
  REQUIRE(ev.size() == 3);
  const auto& neck = ev[0];
  CHECK(neck.source == PinchKind::neck);
  CHECK(neck.j == 1);
  CHECK(std::abs(neck.location.x[0]) < 1e-6);
  CHECK(std::abs(neck.density.value / kTheta1 - 1.0) < 0.05);
  for (int i = 1; i < 3; ++i) {
    CHECK(ev[i].source == PinchKind::extinction);
    CHECK(ev[i].j == 0);
    CHECK(ev[i].location.t > neck.location.t);
    CHECK(std::abs(ev[i].density.value / kTheta0 - 1.0) < 0.05);
  }
  // Mirror symmetry of the two bulbs.
  CHECK(ev[1].location.x[0] == doctest::Approx(-ev[2].location.x[0]).epsilon(1e-6));
}

TEST_CASE("cylindrical fit") {
  SUBCASE("exact cylinder has eta = 0") {
    const auto f = analytic_flow({"cylinder", 2, 1, std::sqrt(2.0)}, 2.0);
    const auto ev = detect_singularities(f);
    REQUIRE(ev.size() == 17);
    for (double s : {0.5, 0.1, 0.01}) {
      const auto fit = cylindrical_fit(f, ev[8], s);
      CHECK(fit.eta < 1e-12);
      CHECK(fit.axis_angle < 1e-12);
    }
  }
  SUBCASE("a spherical event is not cylindrical") {
    const auto f = analytic_flow({"sphere", 2, 0, 2.0}, 1.0);
    auto ev = detect_singularities(f).front();
    ev.j = 1;
    CHECK(std::isinf(cylindrical_fit(f, ev, 0.1).eta));
  }
  SUBCASE("dumbbell neck approaches the cylinder over the resolved decade") {
    const auto& f = dumbbell();
    const auto& neck = dumbbell_events()[0];
    double prev = std::numeric_limits<double>::infinity();
    for (double s : f.backward_taus(neck.location.t, 0.01, 0.1, 8)) {
      const auto fit = cylindrical_fit(f, neck, s);
      CHECK(fit.graphical);
      CHECK(fit.eta <= prev);
      CHECK(fit.axis_angle * 180.0 / M_PI < 1.0);
      prev = fit.eta;
    }
  }
}

TEST_CASE("stratification") {
  SUBCASE("dumbbell") {
    const auto st = stratify(dumbbell_events(), 2);
    CHECK(st.strata[0].size() == 2);
    CHECK(st.strata[1].size() == 3);
    CHECK(st.s0_isolated);
  }
  SUBCASE("sphere") {
    const auto f = analytic_flow({"sphere", 2, 0, 2.0}, 1.0);
    const auto ev = detect_singularities(f);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].j == 0);
    CHECK(ev[0].density.value == doctest::Approx(kTheta0).epsilon(1e-6));
    CHECK(stratify(ev, 2).strata[0].size() == 1);
  }
}

TEST_CASE("torus collapses onto a circle at one time") {
  const auto& f = torus();
  CHECK(f.status == RunStatus::resolved);
  REQUIRE(f.pinches.size() == 1);
  CHECK(f.pinches[0].kind == PinchKind::circle);
  // Thin-tube estimate: rho^2 / 2 for the cross-section, corrected by the 1/r term.
  CHECK(f.pinches[0].location.t == doctest::Approx(0.125).epsilon(0.05));
  const auto ev = detect_singularities(f);
  REQUIRE(ev.size() == 64);
  for (const auto& e : ev) {
    CHECK(e.j == 1);
    CHECK(e.location.t == ev[0].location.t);
  }
  const auto st = stratify(ev, 2);
  CHECK(st.strata[0].empty());
  CHECK(st.strata[1].size() == 64);
  const auto rep = singular_set_report(f, ev);
  REQUIRE(rep.time_slice);
  CHECK(rep.time_slice->all_time_slices);
  REQUIRE(rep.reifenberg);
  CHECK(rep.reifenberg->delta.back() < rep.reifenberg->delta.front());
}

TEST_CASE("fat torus is reported unresolved") {
  const auto f = rotsym_torus_run(torus_profile(1.0, 0.9, 160), {});
  CHECK(f.status == RunStatus::unresolved);
  CHECK(f.pinches.empty());
}

TEST_CASE("singular axis of the exact cylinder is flat") {
  const auto f = analytic_flow({"cylinder", 2, 1, std::sqrt(2.0)}, 2.0);
  const auto rep = singular_set_report(f, detect_singularities(f));
  REQUIRE(rep.reifenberg);
  for (double d : rep.reifenberg->delta) CHECK(d == doctest::Approx(0.0));
  REQUIRE(rep.time_slice);
  CHECK(rep.time_slice->all_time_slices);
}

TEST_CASE("snapshot lookup of simulated flows") {
  const auto& f = dumbbell();
  CHECK(f.surface_at(f.snapshots[3].time).has_value());
  CHECK_THROWS_AS(f.surface_at(0.5 * (f.snapshots[3].time + f.snapshots[4].time)), PreconditionFailed);
  CHECK_FALSE(f.surface_at(f.t_end + 1.0).has_value());
}
