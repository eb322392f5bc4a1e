#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcfsing/errors.hpp"
#include "mcfsing/synthetic.hpp"

#include <cmath>

using namespace mcfsing;

namespace {

GeneratorSpec spec(const std::string& kind) {
  GeneratorSpec s;
  s.kind = kind;
  return s;
}

void check_all_pass(const GeneratorSpec& s) {
  const auto checks = verify(s);
  CHECK_FALSE(checks.empty());
  for (const auto& c : checks) {
    INFO(s.kind << " / " << c.verdict.name << ": " << c.detail);
    CHECK(c.pass());
  }
}

}  // namespace

TEST_CASE("figure-1 points") {
  auto s = spec("figure1");
  s.count = 5;
  const auto c = generate(s);
  REQUIRE(c.size() == 6);
  for (int k = 1; k <= 5; ++k) {
    CHECK(c[k - 1].x[0] == doctest::Approx(1.0 / k));
    CHECK(c[k - 1].t == doctest::Approx(std::pow(k, -4.0)));
  }
  CHECK(c[5].x[0] == 0.0);
  CHECK(c[5].t == 0.0);
}

TEST_CASE("four points in one slice") {
  const auto c = generate(spec("four_points"));
  REQUIRE(c.size() == 4);
  CHECK(c.ambient_dim() == 3);
  for (const auto& p : c) CHECK(p.t == 0.0);
  CHECK(c[2].x[1] == doctest::Approx(0.1));
  CHECK(c[3].x[2] == doctest::Approx(0.1));
}

TEST_CASE("koch level zero is a segment") {
  auto s = spec("koch");
  s.level = 0;
  CHECK(generate(s).size() == 2);
  s.level = 2;
  CHECK(generate(s).size() == 17);
}

TEST_CASE("invalid generator parameters") {
  CHECK_THROWS_AS(generate(spec("no_such_kind")), InvalidArgument);
  auto s = spec("four_points");
  s.eps = 1.5;
  CHECK_THROWS_AS(generate(s), InvalidArgument);
  CHECK_THROWS_AS(natural_planes(spec("koch"), generate(spec("koch"))), InvalidArgument);
}

TEST_CASE("ground-truth verdicts hold") {
  check_all_pass(spec("four_points"));
  auto f1 = spec("figure1");
  f1.count = 200;
  check_all_pass(f1);
  for (double eps : {0.05, 0.1, 0.2}) {
    auto t = spec("three_sequences");
    t.eps = eps;
    check_all_pass(t);
  }
  for (double slope : {0.0, 0.5, 2.0}) {
    auto t = spec("tilted_line");
    t.count = 101;
    t.slope = slope;
    check_all_pass(t);
  }
  auto koch = spec("koch");
  koch.level = 5;
  check_all_pass(koch);
  auto cone = spec("parabolic_cone_boundary");
  cone.count = 41;
  check_all_pass(cone);
  auto disk = spec("slice_disk");
  disk.count = 16;
  check_all_pass(disk);
  auto ts = spec("time_segment");
  ts.count = 400;
  check_all_pass(ts);
  auto box = spec("spacetime_box");
  box.count = 24;
  check_all_pass(box);
  auto seg = spec("spatial_segment");
  seg.count = 400;
  check_all_pass(seg);
  auto curve = spec("slice_curve");
  curve.eps = 0.01;
  curve.count = 32;
  check_all_pass(curve);
}

TEST_CASE("the tilted line verdicts flip with the slope") {
  auto flat = spec("tilted_line");
  flat.slope = 0.0;
  auto tilted = spec("tilted_line");
  tilted.slope = 1.0;
  const auto a = ground_truth(flat), b = ground_truth(tilted);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].expected != b[i].expected);
}
