// End-to-end tests of the command-line tool: spawns the built binary.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(FRACPOT_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_config(const std::string& name, const std::string& body) {
  const fs::path dir = fs::temp_directory_path() / "fracpot_cli_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << body;
  return p.string();
}

// Splits "#{meta}\nheader\nrows..." into the metadata object and the CSV body.
std::pair<Json, std::string> split_csv(const std::string& out) {
  REQUIRE(out.size() > 1);
  REQUIRE(out[0] == '#');
  const auto nl = out.find('\n');
  return {Json::parse(out.substr(1, nl - 1)), out.substr(nl + 1)};
}

const char* kBall = R"("domain": {"kind": "ball", "center": [0, 0], "radius": 1})";

}  // namespace

TEST_CASE("solve: constant payoff from the center is exactly one") {
  const std::string cfg = write_config(
      "solve_const.json",
      std::string(R"({"d": 2, "alpha": 1, )") + kBall + R"(, "points": [[0, 0]], "payoff": {"kind": "constant"}})");
  const Run r = run("solve --config " + cfg + " --walks 500");
  REQUIRE(r.code == 0);
  const auto [meta, body] = split_csv(r.out);
  CHECK(meta["tool"] == "fracpot");
  CHECK(meta["seed"] == 0);
  CHECK(meta["d"] == 2);
  CHECK(meta["walks"] == 500);
  CHECK(meta.contains("domain_hash"));
  CHECK(meta.contains("version"));
  CHECK(body == "x0,x1,mean,stderr,n,censored_fraction\n0,0,1,0,500,0\n");
}

TEST_CASE("solve: exterior of B_2 from the center has mass 1/3") {
  const std::string cfg = write_config(
      "solve_ind.json", std::string(R"({"d": 2, "alpha": 1, )") + kBall +
                            R"(, "points": [[0, 0]], "payoff": {"kind": "indicator", "region": {"kind": "difference",
                               "left": {"kind": "space"}, "right": {"kind": "ball", "center": [0, 0], "radius": 2}}}})");
  const Run r = run("solve --json --walks 20000 --config " + cfg);
  REQUIRE(r.code == 0);
  const Json doc = Json::parse(r.out);
  const Json& e = doc["result"]["results"][0];
  CHECK(std::abs(e["mean"].get<double>() - 1.0 / 3.0) < 3.0 * e["stderr"].get<double>());
}

TEST_CASE("output is byte-identical across worker counts") {
  const std::string cfg = write_config(
      "exit_time.json",
      R"({"d": 2, "alpha": 1, "domain": {"kind": "intersection", "children": [
          {"kind": "ball", "center": [0, 0], "radius": 1}, {"kind": "halfspace", "normal": [0, 1], "offset": 0}]},
          "points": [[0.1, 0.5], [0.3, 0.2]], "walks": 3000})");
  const Run a = run("exit-time --seed 9 --workers 1 --config " + cfg);
  const Run b = run("exit-time --seed 9 --workers 4 --config " + cfg);
  const Run c = run("exit-time --seed 10 --workers 1 --config " + cfg);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
}

TEST_CASE("malformed documents exit 1 and name the node path") {
  const std::string cfg = write_config(
      "bad.json", R"({"d": 2, "alpha": 1, "domain": {"kind": "union", "children": [
                      {"kind": "ball", "center": [0, 0], "radius": 1}, {"kind": "ball", "center": [0, 0], "radius": -2}]},
                      "points": [[0, 0]], "payoff": {"kind": "constant"}})");
  const Run r = run("solve --config " + cfg);
  CHECK(r.code == 1);
  CHECK(r.out.find("domain.children[1].radius") != std::string::npos);

  const std::string outside = write_config(
      "outside.json", std::string(R"({"d": 2, "alpha": 1, )") + kBall + R"(, "points": [[3, 0]]})");
  const Run o = run("exit-time --config " + outside);
  CHECK(o.code == 1);
  CHECK(o.out.find("points[0]") != std::string::npos);

  CHECK(run("solve").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("solve --config /nonexistent/file.json").code == 1);
  const std::string junk = write_config("junk.json", "{not json");
  CHECK(run("solve --config " + junk).code == 1);
}

TEST_CASE("classify: thorn apex is inaccessible with I_f = 1/2") {
  const std::string cfg = write_config(
      "thorn.json", R"({"d": 2, "alpha": 1, "domain": {"kind": "thorn", "gamma": 2}, "point": [0, 0]})");
  const Run r = run("classify --json --config " + cfg);
  REQUIRE(r.code == 0);
  const Json doc = Json::parse(r.out);
  CHECK(doc["result"]["verdict"] == "Inaccessible");
  CHECK(doc["result"]["I_f"].get<double>() == doctest::Approx(0.5).epsilon(1e-14));
  const Run csv = run("classify --config " + cfg);
  CHECK(csv.out.find("Inaccessible") != std::string::npos);
}

TEST_CASE("audit kelvin-green on B((3,0),1)") {
  const std::string cfg = write_config(
      "kelvin.json", R"({"d": 2, "alpha": 1, "domain": {"kind": "ball", "center": [3, 0], "radius": 1}})");
  const Run r = run("audit kelvin-green --json --config " + cfg);
  REQUIRE(r.code == 0);
  const Json doc = Json::parse(r.out);
  CHECK(doc["result"]["passed"] == true);
  CHECK(doc["result"]["worst_ratio"].get<double>() < 1e-9);
  CHECK(doc["meta"]["command"] == "audit kelvin-green");
  CHECK(run("audit nonsense --config " + cfg).code == 1);
}

TEST_CASE("martin with x0 = x gives ratio 1 at every level") {
  const std::string cfg = write_config(
      "martin.json", std::string(R"({"d": 2, "alpha": 1, )") + kBall +
                         R"(, "x": [0.2, 0.1], "x0": [0.2, 0.1], "y": [1, 0], "walks": 200})");
  const Run r = run("martin --json --config " + cfg);
  REQUIRE(r.code == 0);
  const Json doc = Json::parse(r.out);
  for (const auto& lv : doc["result"]["levels"]) CHECK(lv["ratio"] == 1.0);
}

TEST_CASE("pkernel and green commands") {
  const std::string cfg = write_config(
      "pk.json", std::string(R"({"d": 2, "alpha": 1, )") + kBall +
                     R"(, "points": [[0.3, 0]], "targets": [[2, 0]], "poles": [[-0.2, 0.4]], "walks": 2000})");
  const Run p = run("pkernel --config " + cfg);
  CHECK(p.code == 0);
  CHECK(p.out.find("x0,x1,y0,y1,mean,stderr,n,censored_fraction") != std::string::npos);
  const Run g = run("green --config " + cfg);
  CHECK(g.code == 0);
  const std::string bad = write_config(
      "pk_bad.json", std::string(R"({"d": 2, "alpha": 1, )") + kBall + R"(, "points": [[0.3, 0]], "targets": [[1, 0]]})");
  CHECK(run("pkernel --config " + bad).code == 1);
}

TEST_CASE("undetermined and unhealthy runs map to exit codes 3 and 2") {
  // One lattice point per shell cannot establish a verdict.
  const std::string und = write_config(
      "und.json", std::string(R"({"d": 2, "alpha": 1, )") + kBall +
                      R"(, "point": [1, 0], "shells": 2, "lattice_points": 1, "walks_per_point": 2})");
  CHECK(run("classify --config " + und).code == 3);
  // The Cauchy process on the half-line has infinite mean exit time.
  const std::string inf = write_config(
      "inf.json", R"({"d": 1, "alpha": 1, "domain": {"kind": "halfspace", "normal": [1]}, "points": [[1]], "walks": 4000})");
  CHECK(run("exit-time --config " + inf).code == 2);
}

TEST_CASE("output file") {
  const std::string cfg = write_config(
      "out.json", std::string(R"({"d": 2, "alpha": 1, )") + kBall + R"(, "points": [[0, 0]]})");
  const fs::path out = fs::temp_directory_path() / "fracpot_cli_test" / "result.csv";
  fs::remove(out);
  REQUIRE(run("exit-time --walks 100 --out " + out.string() + " --config " + cfg).code == 0);
  std::ifstream in(out);
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("#{", 0) == 0);
}

TEST_CASE("selftest --quick passes, and a corrupted constant fails it") {
  const Run q = run("selftest --quick");
  CHECK(q.code == 0);
  CHECK(q.out.find("[PASS] criterion 1") != std::string::npos);
  const Run bad = run("selftest --quick --perturb-poisson-const 1.01");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("[FAIL] criterion 1") != std::string::npos);
}
