#include "doctest.h"

#include "wedgescope/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace wedge;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wedgescope_exp_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

ExperimentContext ctx_for(const fs::path& out) {
  ExperimentContext c;
  c.output_dir = out;
  return c;
}

}  // namespace

TEST_CASE("toy-optimize writes its files and reruns identically") {
  const Json cfg = Json::parse(R"({"landscape": {"D": 8, "n": 6}, "optimizer": {"max_steps": 500}})");
  const fs::path a = fresh_dir("opt_a");
  const fs::path b = fresh_dir("opt_b");
  const ExperimentResult ra = run_experiment("toy-optimize", cfg, ctx_for(a));
  run_experiment("toy-optimize", cfg, ctx_for(b));
  for (const char* f : {"trajectory.csv", "final_point.json", "resolved_config.json", "summary.json"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(ra.summary["subcommand"] == "toy-optimize");
  CHECK(ra.resolved_config["optimizer"]["max_steps"] == 500);
  CHECK(ra.resolved_config["landscape"]["D"] == 8);

  const Json resolved = Json::parse(slurp(a / "resolved_config.json"));
  const fs::path c = fresh_dir("opt_c");
  run_experiment("toy-optimize", resolved, ctx_for(c));
  CHECK(slurp(a / "trajectory.csv") == slurp(c / "trajectory.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("config errors name the key") {
  const fs::path out = fresh_dir("err");
  auto message = [&](const std::string& name, const char* text) -> std::string {
    try {
      run_experiment(name, Json::parse(text), ctx_for(out));
    } catch (const InvalidArgument& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message("toy-optimize", R"({"landscape": {"D": 8}})").find("'landscape.n'") != std::string::npos);
  CHECK(message("toy-optimize", R"({"landscape": {"D": 8, "n": 6}, "steps": 3})").find("'steps'") !=
        std::string::npos);
  CHECK(message("toy-optimize", R"({})").find("landscape") != std::string::npos);
  CHECK(message("train-net", R"({"landscape": {"D": 8, "n": 6}})").find("network") != std::string::npos);
  CHECK(message("toy-optimize", R"({"landscape": {"D": 8, "n": 6}, "init_scale": "big"})")
            .find("init_scale") != std::string::npos);
  CHECK(message("nonsense", R"({})").find("unknown subcommand") != std::string::npos);
  CHECK_THROWS_AS(run_experiment("toy-optimize", Json::parse(R"({"landscape": {"D": 8, "n": 6}})"),
                                 ExperimentContext{}),
                  InvalidArgument);
  fs::remove_all(out);
}

TEST_CASE("a sweep over one key and five seeds has fifteen rows") {
  const Json cfg = Json::parse(R"({
    "subcommand": "toy-optimize",
    "base": {"landscape": {"D": 6, "n": 4}, "optimizer": {"max_steps": 200}},
    "grid": {"optimizer.learning_rate": [0.001, 0.01, 0.1]},
    "seeds": 5
  })");
  const fs::path out = fresh_dir("sweep");
  ExperimentContext ctx = ctx_for(out);
  ctx.jobs = 2;
  const ExperimentResult r = run_experiment("sweep", cfg, ctx);
  CHECK(r.summary["runs"] == 15);
  CHECK(r.summary["failed"] == 0);
  CHECK(line_count(out / "sweep.csv") == 16);
  CHECK(slurp(out / "sweep.csv").rfind("run,optimizer.learning_rate,seed,status,", 0) == 0);
  CHECK(fs::exists(out / "run_14" / "trajectory.csv"));

  const fs::path again = fresh_dir("sweep2");
  ctx.output_dir = again;
  ctx.jobs = 1;
  run_experiment("sweep", cfg, ctx);
  CHECK(slurp(out / "sweep.csv") == slurp(again / "sweep.csv"));
  fs::remove_all(out);
  fs::remove_all(again);
}

TEST_CASE("a failing sweep run is recorded and the sweep continues") {
  const Json cfg = Json::parse(R"({
    "subcommand": "toy-optimize",
    "base": {"landscape": {"D": 6, "n": 4}, "optimizer": {"max_steps": 50}},
    "grid": {"landscape.n": [4, 9]}
  })");
  const fs::path out = fresh_dir("sweep_fail");
  const ExperimentResult r = run_experiment("sweep", cfg, ctx_for(out));
  CHECK(r.summary["succeeded"] == 1);
  CHECK(r.summary["failed"] == 1);
  CHECK(slurp(out / "sweep.csv").find("error:") != std::string::npos);
  fs::remove_all(out);
}
