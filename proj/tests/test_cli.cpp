#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcfsing/io.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace mcfsing;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const auto p = fs::temp_directory_path() / "mcfsing_test_cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string("cd '") + workdir().string() + "' && '" + MCFSING_CLI + "' " + args +
                          " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json read_json(const fs::path& p) { return Json::parse(read_text(workdir() / p)); }

}  // namespace

TEST_CASE("simulate sphere records extinction at t = 1") {
  REQUIRE(run("simulate --kind sphere --r0 2 --out sphere") == 0);
  const auto meta = read_json("sphere/flow.json");
  REQUIRE(meta["pinches"].size() == 1);
  CHECK(meta["pinches"][0]["location"]["t"].get<double>() == doctest::Approx(1.0));
  CHECK(read_json("sphere/events.json").size() == 1);
}

TEST_CASE("invalid input exits with 2") {
  CHECK(run("simulate --kind sphere --r0 -1 --out bad") == 2);
  CHECK(run("simulate --kind teapot") == 2);
  CHECK(run("simulate --r0 notanumber") == 2);
  CHECK(run("verify --kind no_such_kind") == 2);
  CHECK(run("analyze --archive does_not_exist --which density") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("monotonicity analysis on the sphere archive") {
  REQUIRE(run("simulate --kind sphere --r0 2 --out sphere_m") == 0);
  REQUIRE(run("analyze --archive sphere_m --which monotonicity") == 0);
  const auto v = read_json("sphere_m/analysis/monotonicity.json");
  CHECK(v["monotone"].get<bool>());
  const auto csv = read_text(workdir() / "sphere_m/analysis/monotonicity.csv");
  CHECK(csv.rfind("tau,f\n", 0) == 0);
  CHECK(fs::exists(workdir() / "sphere_m/analysis/monotonicity.svg"));
}

TEST_CASE("verify verdicts and byte-stable reports") {
  CHECK(run("verify --kind four_points --out v1") == 0);
  CHECK(run("verify --kind four_points --out v2") == 0);
  const auto a = read_text(workdir() / "v1/verdicts.json");
  CHECK(a == read_text(workdir() / "v2/verdicts.json"));
  const auto v = Json::parse(a);
  CHECK(v["verdicts"].size() == 4);
  for (const auto& item : v["verdicts"]) CHECK(item["pass"].get<bool>());
  CHECK(run("verify --kind figure1 --count 100 --out v3") == 0);
}

TEST_CASE("config file supplies options, flags override") {
  {
    std::ofstream cfg(workdir() / "cfg.toml");
    cfg << "[verify]\nkind = \"tilted_line\"\ncount = 101\nslope = 0.0\nout = \"from_config\"\n";
  }
  CHECK(run("--config cfg.toml verify") == 0);
  CHECK(read_json("from_config/verdicts.json")["slope"].get<double>() == 0.0);
  CHECK(run("--config cfg.toml verify --slope 2 --out from_flag") == 0);
  CHECK(read_json("from_flag/verdicts.json")["slope"].get<double>() == 2.0);
}

TEST_CASE("synthetic writes cloud files") {
  CHECK(run("synthetic --kind koch --level 2 --out koch") == 0);
  const auto cloud = cloud_from_json(read_json("koch/cloud.json"));
  CHECK(cloud.size() == 17);
  CHECK(read_text(workdir() / "koch/cloud.csv").rfind("x1,x2,t\n", 0) == 0);
}

TEST_CASE("torus archive: reifenberg analysis and report") {
  REQUIRE(run("simulate --kind torus --out torus") == 0);
  CHECK(run("analyze --archive torus --which reifenberg") == 0);
  const auto v = read_json("torus/analysis/reifenberg.json");
  CHECK(v["all_time_slices"].get<bool>());
  CHECK(fs::exists(workdir() / "torus/analysis/reifenberg.csv"));
  CHECK(run("analyze --archive torus --which cone") == 0);
  CHECK(run("analyze --archive torus --which strata") == 0);
  CHECK(read_json("torus/analysis/strata.json")["strata"][1].size() == 64);
  CHECK(run("report --archive torus") == 0);
  CHECK(fs::exists(workdir() / "torus/report/report.json"));
}

TEST_CASE("fat torus is an unresolved run") {
  CHECK(run("simulate --kind torus --r-center 1 --rho 0.9 --out fat") == 3);
  CHECK(read_json("fat/flow.json")["status"] == "unresolved");
}

TEST_CASE("dumbbell archive: three events and a clearing verdict") {
  REQUIRE(run("simulate --kind dumbbell --out dumbbell") == 0);
  CHECK(read_json("dumbbell/events.json").size() == 3);
  CHECK(run("analyze --archive dumbbell --which cylfit") == 0);
  // The neck is not (1, 0.002)-cylindrical, so the window check cannot run.
  CHECK(run("analyze --archive dumbbell --which clearing") == 4);
  const auto v = read_json("dumbbell/analysis/clearing.json");
  CHECK(v["constants"]["window_nonempty"].get<bool>());
  REQUIRE(v["events"].size() == 1);
  CHECK(v["events"][0].contains("precondition_failed"));
  CHECK_FALSE(v["verified"].get<bool>());
}
