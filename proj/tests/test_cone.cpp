#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcfsing/cone.hpp"
#include "mcfsing/errors.hpp"
#include "mcfsing/synthetic.hpp"

#include <cmath>
#include <random>

using namespace mcfsing;

namespace {

PointCloud figure1(std::size_t k_max) {
  GeneratorSpec g;
  g.kind = "figure1";
  g.count = k_max;
  return generate(g);
}

// max over pairs k < m <= K (and the origin) of (k^-4 - m^-4) / (k^-1 - m^-1)^2.
double figure1_gamma(std::size_t K) {
  double best = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double xk = 1.0 / double(k);
    best = std::max(best, std::pow(xk, 4) / (xk * xk));
    for (std::size_t m = k + 1; m <= K; ++m) {
      const double xm = 1.0 / double(m);
      best = std::max(best, (std::pow(xk, 4) - std::pow(xm, 4)) / ((xk - xm) * (xk - xm)));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("cone membership") {
  const ParabolicCone c{make_point({0.0}, 0.0), 1.0};
  CHECK(c.contains(make_point({1.0}, 1.0)));
  CHECK(c.contains(make_point({1.0}, -0.5)));
  CHECK_FALSE(c.contains(make_point({0.5}, 1.0)));
}

TEST_CASE("cone constant") {
  SUBCASE("slice set") {
    PointCloud c({make_point({0.0}, 2.0), make_point({1.0}, 2.0), make_point({0.3}, 2.0)});
    CHECK(cone_constant(c, 5.0).gamma_star == 0.0);
  }
  SUBCASE("figure-1 set matches the pairwise oracle") {
    const std::size_t K = 200;
    const auto cc = cone_constant(figure1(K), 10.0);
    CHECK_FALSE(cc.infinite);
    CHECK(cc.gamma_star == doctest::Approx(figure1_gamma(K)).epsilon(1e-12));
  }
  SUBCASE("tilted line: unbounded") {
    std::vector<SpaceTimePoint> pts;
    for (int i = 0; i <= 400; ++i) pts.push_back(make_point({i / 400.0}, 0.5 * i / 400.0));
    CHECK(cone_constant(PointCloud(pts), 0.5).infinite);
  }
}

TEST_CASE("cone profile of figure-1 vanishes") {
  const auto prof = cone_profile(figure1(200));
  CHECK(prof.monotone);
  CHECK(prof.vanishing);
}

TEST_CASE("half cones at the cone constant") {
  const auto c = figure1(60);
  const double g = cone_constant(c, 10.0).gamma_star;
  for (auto dir : {ConeDirection::forward, ConeDirection::backward}) {
    const auto r = half_cone_check(c, g, 10.0, dir);
    CHECK(r.holds);
    CHECK(r.level == r.full_level);
  }
}

TEST_CASE("half-cone level equals the full level on random clouds") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> size(2, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + trial % 2;
    std::vector<SpaceTimePoint> pts;
    for (int i = size(rng); i > 0; --i) {
      Vec x(d);
      for (int k = 0; k < d; ++k) x[k] = u(rng);
      pts.push_back({x, u(rng)});
    }
    const PointCloud c(pts);
    const auto f = half_cone_check(c, 1.0, 1.5, ConeDirection::forward);
    const auto b = half_cone_check(c, 1.0, 1.5, ConeDirection::backward);
    REQUIRE(f.level == f.full_level);
    REQUIRE(b.level == b.full_level);
    REQUIRE(f.holds == b.holds);
  }
}

TEST_CASE("graph over space from the cone property") {
  SUBCASE("slice set gives a constant function") {
    PointCloud c({make_point({0.0}, 0.7), make_point({1.0}, 0.7), make_point({0.5}, 0.7)});
    const auto g = cone_graph_extract(c, 0.0, 5.0);
    for (double v : g.u) CHECK(v == 0.7);
  }
  SUBCASE("figure-1 set: u(1/k) = 1/k^4") {
    const std::size_t K = 50;
    const auto c = figure1(K);
    const double gamma = figure1_gamma(K);
    const auto g = cone_graph_extract(c, gamma, 10.0);
    for (std::size_t i = 0; i < g.domain.size(); ++i)
      CHECK(g.u[i] == doctest::Approx(std::pow(g.x[i][0], 4)).epsilon(1e-12));
    CHECK(g.certified == doctest::Approx(gamma).epsilon(1e-12));
  }
  SUBCASE("insufficient gamma is refused") {
    CHECK_THROWS_AS(cone_graph_extract(figure1(20), 1.0, 10.0), PreconditionFailed);
  }
  SUBCASE("repeated samples collapse to one graph point") {
    PointCloud c({make_point({0.0}, 0.0), make_point({0.0}, 0.0), make_point({1.0}, 0.0)});
    CHECK(cone_graph_extract(c, 1.0, 5.0).domain.size() == 2);
  }
  SUBCASE("a vertical pair breaks the cone property before injectivity") {
    PointCloud c({make_point({0.0}, 0.0), make_point({0.0}, 0.1)});
    CHECK(cone_constant(c, 5.0).infinite);
    CHECK_THROWS_AS(cone_graph_extract(c, 1e6, 5.0), PreconditionFailed);
  }
}
