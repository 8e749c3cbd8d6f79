#include <cmath>
#include <limits>
#include <string>

#include "doctest.h"

#include "fracpot/config.hpp"

using namespace fracpot;

namespace {

std::string error_of(const Json& doc) {
  try {
    parse_run_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

Json base() {
  return Json::parse(R"({"d": 2, "alpha": 1.0, "domain": {"kind": "ball", "center": [0, 0], "radius": 1}})");
}

}  // namespace

TEST_CASE("a minimal document parses") {
  const RunConfig rc = parse_run_config(base());
  CHECK(rc.params.d == 2);
  CHECK(rc.params.alpha == 1.0);
  REQUIRE(rc.domain);
  CHECK(contains(*rc.domain, Point{0.5, 0.0}));
  CHECK(rc.walks == 10000);
  CHECK(rc.domain_hash.size() == 16);
}

TEST_CASE("every domain kind parses") {
  const Json doc = Json::parse(R"({"d": 2, "alpha": 0.5, "domain": {"kind": "union", "children": [
      {"kind": "intersection", "children": [{"kind": "ball", "center": [0, 0], "radius": 1},
                                            {"kind": "halfspace", "normal": [1, 0], "offset": 0}]},
      {"kind": "thorn", "gamma": 2, "length": 0.5, "width_scale": 2},
      {"kind": "cusp", "gamma": 0.5},
      {"kind": "difference", "left": {"kind": "space"}, "right": {"kind": "point", "at": [5, -5]}}]}})");
  const RunConfig rc = parse_run_config(doc);
  CHECK(contains(*rc.domain, Point{9.0, -9.0}));
  CHECK_FALSE(contains(*rc.domain, Point{5.0, -5.0}));
}

TEST_CASE("errors name the offending node path") {
  Json d = base();
  d["domain"] = Json::parse(R"({"kind": "union", "children": [{"kind": "ball", "center": [0, 0], "radius": 1},
                                                             {"kind": "ball", "center": [0], "radius": 1}]})");
  CHECK(error_of(d).rfind("domain.children[1].center", 0) == 0);
  d["domain"] = Json::parse(R"({"kind": "blob"})");
  CHECK(error_of(d).rfind("domain.kind", 0) == 0);
  d["domain"] = Json::parse(R"({"kind": "thorn", "gamma": 2, "length": 3})");
  CHECK(error_of(d).rfind("domain", 0) == 0);
  d = base();
  d["alpha"] = 2.5;
  CHECK(error_of(d).find("alpha") != std::string::npos);
  d = base();
  d.erase("d");
  CHECK(error_of(d).rfind("d:", 0) == 0);
  d = base();
  d["walks"] = 0;
  CHECK(error_of(d).rfind("walks", 0) == 0);
  d = base();
  d.erase("domain");
  CHECK(error_of(d).rfind("domain", 0) == 0);
  CHECK_NOTHROW(parse_run_config(d, false));
}

TEST_CASE("payoffs") {
  const StableParams p(2, 1.0);
  CHECK(parse_payoff(Json::parse(R"({"kind": "constant", "value": 3})"), p, "payoff")(Point{9.0, 9.0}) == 3.0);
  CHECK(parse_payoff(Json::parse(R"({"kind": "coordinate", "index": 1})"), p, "payoff")(Point{2.0, 7.0}) == 7.0);
  CHECK_THROWS_AS(parse_payoff(Json::parse(R"({"kind": "coordinate", "index": 2})"), p, "payoff"), ConfigError);
  const Payoff ind = parse_payoff(
      Json::parse(R"({"kind": "indicator", "region": {"kind": "ball", "center": [3, 0], "radius": 1}})"), p, "payoff");
  CHECK(ind(Point{3.5, 0.0}) == 1.0);
  CHECK(ind(Point{0.0, 0.0}) == 0.0);
  const Payoff lw = parse_payoff(Json::parse(R"({"kind": "levy-weight", "y0": [0, 0]})"), p, "payoff");
  CHECK(lw(Point{2.0, 0.0}) == levy_density(p, Point{2.0, 0.0}, Point{0.0, 0.0}));
}

TEST_CASE("the domain hash depends only on the domain subtree") {
  Json a = base(), b = base();
  b["walks"] = 5;
  b["seed_note"] = "irrelevant";
  CHECK(parse_run_config(a).domain_hash == parse_run_config(b).domain_hash);
  b["domain"]["radius"] = 2;
  CHECK(parse_run_config(a).domain_hash != parse_run_config(b).domain_hash);
}

TEST_CASE("shortest round-trip formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(std::nan("")) == "nan");
  const double v = 0.1 + 0.2;
  CHECK(std::stod(format_double(v)) == v);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}
