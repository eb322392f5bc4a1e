#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcfsing/errors.hpp"
#include "mcfsing/io.hpp"
#include "mcfsing/svg.hpp"

#include <cmath>
#include <filesystem>

using namespace mcfsing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mcfsing_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("point, cloud and plane round trips") {
  const auto p = make_point({1.5, -2.0}, 0.25);
  const auto q = point_from_json(Json::parse(dump(to_json(p))));
  CHECK(q.x == p.x);
  CHECK(q.t == p.t);

  const PointCloud c({p, make_point({0.0, 1.0}, 3.0)}, std::vector<int>{2, 5});
  const auto c2 = cloud_from_json(Json::parse(dump(to_json(c))));
  REQUIRE(c2.size() == 2);
  CHECK(c2[1].t == 3.0);
  REQUIRE(c2.labels());
  CHECK((*c2.labels())[1] == 5);

  Mat d(3, 1);
  d << 1, 1, 0;
  const TimeSlicePlane v(make_point({0, 0, 1}, 2.0), d);
  const auto w = plane_from_json(Json::parse(dump(to_json(v))));
  CHECK(w.directions().isApprox(v.directions()));
  CHECK(w.time() == 2.0);
}

TEST_CASE("surface round trips") {
  Mat axis = Mat::Zero(3, 1);
  axis(0, 0) = 1.0;
  ProfileCurve curve{{{-1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}}, false};
  const std::vector<WeightedHypersurface> surfaces{
      WeightedHypersurface::sphere(v3(1, 2, 3), 0.5),
      WeightedHypersurface::cylinder(v3(0, 0, 0), axis, 1.2),
      WeightedHypersurface::plane(v3(0, 0, 0), v3(0, 0, 1)),
      WeightedHypersurface::revolution(2, {curve}),
      WeightedHypersurface::sampled({v3(0, 0, 0), v3(1, 0, 0)}, {0.5, 0.5}),
  };
  const Vec x = v3(0.1, 0.2, 0.3);
  for (const auto& s : surfaces) {
    const auto back = surface_from_json(Json::parse(dump(to_json(s))));
    CHECK(back.shape().index() == s.shape().index());
    CHECK(f_functional(back, x, 0.7) == doctest::Approx(f_functional(s, x, 0.7)).epsilon(1e-14));
  }
  // Infinite half-length survives as a string.
  const auto cyl = surface_from_json(Json::parse(dump(to_json(surfaces[1]))));
  CHECK(std::isinf(std::get<CylinderShape>(cyl.shape()).half_length));
}

TEST_CASE("flow archive round trip") {
  const auto dir = scratch("archive");
  const auto flow = analytic_flow({"sphere", 2, 0, 2.0}, 1.0, 0.25);
  const auto events = detect_singularities(flow);
  write_flow_archive(dir, flow, &events);
  CHECK(fs::exists(dir / "flow.json"));
  CHECK(fs::exists(dir / "snapshots.json"));
  CHECK(fs::exists(dir / "events.json"));
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");

  const auto back = read_flow_archive(dir);
  CHECK(back.n == 2);
  CHECK(back.snapshots.size() == flow.snapshots.size());
  REQUIRE(back.analytic);
  CHECK(back.analytic->r0 == 2.0);
  REQUIRE(back.pinches.size() == 1);
  CHECK(back.pinches[0].location.t == doctest::Approx(1.0));

  const auto ev = read_events(dir);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].j == 0);
  CHECK(ev[0].density.value == events[0].density.value);
  CHECK(ev[0].density.tau == events[0].density.tau);

  // Byte-stable output.
  const auto first = read_text(dir / "events.json");
  write_flow_archive(dir, back, &ev);
  CHECK(read_text(dir / "events.json") == first);
  fs::remove_all(dir);
}

TEST_CASE("missing archive pieces are errors") {
  const auto dir = scratch("missing");
  CHECK_THROWS_AS(read_flow_archive(dir), Error);
  fs::remove_all(dir);
}

TEST_CASE("csv tables") {
  CsvTable t{{"a", "b"}, {{1.0, 0.5}, {2.0, std::nan("")}}};
  const auto s = to_csv(t);
  CHECK(s.rfind("a,b\n1,0.5\n", 0) == 0);
  CHECK(s.find("nan") != std::string::npos);
  t.rows.push_back({1.0});
  CHECK_THROWS_AS(to_csv(t), InvalidArgument);
}

TEST_CASE("svg plots") {
  PlotSpec spec{"trace", "tau", "F", true, false, "note", {{"F", {0.1, 1.0, -1.0}, {1.0, 2.0, 3.0}, false}}};
  const auto svg = render_svg(spec);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("trace") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  const auto dir = scratch("svg");
  write_svg(dir / "p.svg", spec);
  CHECK(read_text(dir / "p.svg") == svg);
  fs::remove_all(dir);
}
