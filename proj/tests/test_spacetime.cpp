#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcfsing/errors.hpp"
#include "mcfsing/planes.hpp"
#include "mcfsing/spacetime.hpp"

#include <cmath>
#include <random>

using namespace mcfsing;

namespace {

PointCloud segment_in_time(std::size_t count) {
  std::vector<SpaceTimePoint> pts;
  for (std::size_t i = 0; i < count; ++i) pts.push_back(make_point({0.0}, double(i) / double(count - 1)));
  return PointCloud(pts);
}

PointCloud segment_in_space(std::size_t count) {
  std::vector<SpaceTimePoint> pts;
  for (std::size_t i = 0; i < count; ++i) pts.push_back(make_point({double(i) / double(count - 1), 0.0}, 0.0));
  return PointCloud(pts);
}

SpaceTimePoint random_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = u(rng);
  return {x, u(rng)};
}

}  // namespace

TEST_CASE("parabolic distance on small examples") {
  const auto o = make_point({0.0, 0.0}, 0.0);
  CHECK(parabolic_distance(o, make_point({1.0, 0.0}, 0.0)) == 1.0);
  CHECK(parabolic_distance(o, make_point({0.0, 0.0}, 4.0)) == 2.0);
  CHECK(parabolic_distance(o, make_point({3.0, 0.0}, 4.0)) == 3.0);
  CHECK_THROWS_AS(parabolic_distance(o, make_point({1.0}, 0.0)), DimensionMismatch);
}

TEST_CASE("parabolic balls are open") {
  const auto o = make_point({0.0}, 0.0);
  CHECK(in_parabolic_ball(make_point({0.5}, 0.5), o, 1.0));
  CHECK_FALSE(in_parabolic_ball(make_point({0.0}, 1.0), o, 1.0));
  CHECK_FALSE(in_parabolic_ball(make_point({1.0}, 0.0), o, 1.0));
}

TEST_CASE("tube around a time-slice line") {
  const auto line = TimeSlicePlane::coordinate(make_point({0.0, 0.0}, 0.0), 1);
  const auto p = make_point({0.0, 0.0}, 0.25);
  CHECK(parabolic_distance(p, line) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(in_parabolic_tube(p, line, 0.6));
  CHECK_FALSE(in_parabolic_tube(p, line, 0.5));
}

TEST_CASE("metric axioms and dilation covariance on random triples") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> lam(0.1, 10.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = 1 + trial % 3;
    const auto p = random_point(rng, d), q = random_point(rng, d), r = random_point(rng, d);
    const double pq = parabolic_distance(p, q), qr = parabolic_distance(q, r), pr = parabolic_distance(p, r);
    REQUIRE(pr <= pq + qr + 1e-12);
    REQUIRE(pq == parabolic_distance(q, p));
    REQUIRE(parabolic_distance(p, p) == 0.0);
    const double l = lam(rng);
    const auto dp = parabolic_dilate(p, r, l), dq = parabolic_dilate(q, r, l);
    REQUIRE(std::abs(parabolic_distance(dp, dq) - l * pq) <= 1e-12 * std::max(1.0, l * pq));
  }
}

TEST_CASE("dilation of a cloud keeps labels and size") {
  PointCloud c({make_point({1.0}, 1.0), make_point({2.0}, 4.0)}, std::vector<int>{3, 4});
  const auto d = parabolic_dilate(c, make_point({0.0}, 0.0), 2.0);
  CHECK(d.size() == 2);
  CHECK(d[1].x[0] == 4.0);
  CHECK(d[1].t == 16.0);
  REQUIRE(d.labels());
  CHECK((*d.labels())[1] == 4);
}

TEST_CASE("mixed dimensions are rejected") {
  CHECK_THROWS_AS(PointCloud({make_point({0.0}, 0.0), make_point({0.0, 1.0}, 0.0)}), DimensionMismatch);
}

TEST_CASE("greedy cover is an r-net") {
  std::mt19937_64 rng(7);
  std::vector<SpaceTimePoint> pts;
  for (int i = 0; i < 400; ++i) pts.push_back(random_point(rng, 2));
  const PointCloud cloud(pts);
  const double r = 0.7;
  const auto centers = greedy_cover_centers(cloud, r);
  for (std::size_t a = 0; a < centers.size(); ++a)
    for (std::size_t b = a + 1; b < centers.size(); ++b)
      CHECK(parabolic_distance(cloud[centers[a]], cloud[centers[b]]) >= r);
  for (const auto& p : cloud) {
    bool covered = false;
    for (auto c : centers) covered = covered || in_parabolic_ball(p, cloud[c], r);
    CHECK(covered);
  }
}

TEST_CASE("covering sums of a unit spatial segment approach its length") {
  const auto seg = segment_in_space(4001);
  const std::vector<double> scales{0.05, 0.02, 0.01};
  for (const auto& row : ph_measure_estimate(seg, 1, scales)) {
    // A greedy net of open r-balls uses about 1/r centres of weight r.
    CHECK(row.sum == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("PH_2 covering sums of a time segment stay bounded") {
  // Each open ball covers a time interval of length 2 r^2, so N r^2 -> 1/2.
  const auto seg = segment_in_time(20001);
  const std::vector<double> scales{0.2, 0.1, 0.05, 0.03, 0.02};
  for (const auto& row : ph_measure_estimate(seg, 2, scales)) {
    CHECK(row.sum >= 0.4);
    CHECK(row.sum <= 1.5);
  }
}

TEST_CASE("a single point has vanishing covering sums") {
  const PointCloud one({make_point({0.0}, 0.0)});
  const std::vector<double> scales{1e-1, 1e-3, 1e-6};
  const auto rows = ph_measure_estimate(one, 1, scales);
  CHECK(rows.back().sum == doctest::Approx(1e-6));
  CHECK(rows.back().count == 1);
}

TEST_CASE("parabolic box-count dimension") {
  SUBCASE("time segment has dimension two") {
    const auto est = ph_dimension_estimate(segment_in_time(4001));
    CHECK(est.dimension == doctest::Approx(2.0).epsilon(0.1));
  }
  SUBCASE("spatial disk in a slice has dimension two") {
    std::vector<SpaceTimePoint> pts;
    for (double x = -1.0; x <= 1.0; x += 0.01)
      for (double y = -1.0; y <= 1.0; y += 0.01)
        if (x * x + y * y <= 1.0) pts.push_back(make_point({x, y}, 0.0));
    const auto est = ph_dimension_estimate(PointCloud(pts));
    CHECK(std::abs(est.dimension - 2.0) <= 0.2);
  }
  SUBCASE("space-time box in R^2 x R has dimension four") {
    std::vector<SpaceTimePoint> pts;
    const int m = 24;
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j)
        for (int k = 0; k <= m * m; ++k)
          pts.push_back(make_point({double(i) / m, double(j) / m}, double(k) / (m * m)));
    const auto est = ph_dimension_estimate(PointCloud(pts));
    CHECK(std::abs(est.dimension - 4.0) <= 0.3);
  }
}

TEST_CASE("sampling floor and nearest neighbours") {
  const auto seg = segment_in_space(101);
  const auto nn = nearest_neighbor_distances(seg);
  CHECK(nn.front() == doctest::Approx(0.01));
  CHECK(sampling_floor(seg) == doctest::Approx(0.03));
  CHECK(parabolic_diameter(seg) == doctest::Approx(1.0));
}

TEST_CASE("parabolic ball volume scales like r^(n+2)") {
  const double v1 = parabolic_ball_volume(2, 1.0);
  CHECK(v1 == doctest::Approx(2.0 * M_PI));
  CHECK(parabolic_ball_volume(2, 2.0) == doctest::Approx(16.0 * v1));
}
