#include "fracpot/config.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fracpot {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError((path.empty() ? std::string("document") : path) + ": " + what);
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const Json& member(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(child(path, key), "missing field");
  return *it;
}

std::string kind_of(const Json& node, const std::string& path) {
  const Json& k = member(node, "kind", path);
  if (!k.is_string()) fail(path + ".kind", "expected a string");
  return k.get<std::string>();
}

// Runs a geometry factory and re-labels its validation errors with the node path.
template <class F>
DomainSpec build(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    fail(path, e.what());
  } catch (const Unsupported& e) {
    fail(path, e.what());
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

std::vector<DomainSpec> parse_children(const Json& node, int d, const std::string& path) {
  const Json& ch = member(node, "children", path);
  if (!ch.is_array() || ch.empty()) fail(path + ".children", "expected a non-empty array");
  std::vector<DomainSpec> out;
  for (std::size_t i = 0; i < ch.size(); ++i)
    out.push_back(parse_domain(ch[i], d, path + ".children[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

const Json& require_field(const Json& obj, const std::string& key, const std::string& path) {
  return member(obj, key, path);
}

double get_number(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = member(obj, key, path);
  if (!v.is_number()) fail(child(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(child(path, key), "expected a finite number");
  return x;
}

double get_number_or(const Json& obj, const std::string& key, double fallback, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return get_number(obj, key, path);
}

std::uint64_t get_count_or(const Json& obj, const std::string& key, std::uint64_t fallback, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) fail(child(path, key), "expected a positive integer");
  return v.get<std::uint64_t>();
}

Point parse_point(const Json& node, int d, const std::string& path) {
  if (!node.is_array()) fail(path, "expected an array of " + std::to_string(d) + " numbers");
  if (static_cast<int>(node.size()) != d)
    fail(path, "expected " + std::to_string(d) + " coordinates, got " + std::to_string(node.size()));
  Point x(d);
  for (int i = 0; i < d; ++i) {
    if (!node[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    x[i] = node[i].get<double>();
    if (!std::isfinite(x[i])) fail(path + "[" + std::to_string(i) + "]", "expected a finite number");
  }
  return x;
}

std::vector<Point> parse_points(const Json& node, int d, const std::string& path) {
  if (!node.is_array() || node.empty()) fail(path, "expected a non-empty array of points");
  std::vector<Point> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(parse_point(node[i], d, path + "[" + std::to_string(i) + "]"));
  return out;
}

DomainSpec parse_domain(const Json& node, int d, const std::string& path) {
  const std::string kind = kind_of(node, path);
  if (kind == "ball") {
    const Point c = parse_point(member(node, "center", path), d, path + ".center");
    const double r = get_number(node, "radius", path);
    if (!(r > 0.0)) fail(path + ".radius", "radius must be positive");
    return build(path, [&] { return DomainSpec::ball(c, r); });
  }
  if (kind == "halfspace") {
    const Point n = parse_point(member(node, "normal", path), d, path + ".normal");
    const double off = get_number_or(node, "offset", 0.0, path);
    return build(path + ".normal", [&] { return DomainSpec::half_space(n, off); });
  }
  if (kind == "thorn") {
    const double g = get_number(node, "gamma", path);
    const double len = get_number_or(node, "length", 1.0, path);
    const double s = get_number_or(node, "width_scale", 1.0, path);
    return build(path, [&] { return DomainSpec::thorn(d, g, len, s); });
  }
  if (kind == "cusp") {
    if (d != 2) fail(path, "cusp regions are planar (d = 2)");
    const double g = get_number(node, "gamma", path);
    return build(path + ".gamma", [&] { return DomainSpec::cusp(g); });
  }
  if (kind == "space") return DomainSpec::space(d);
  if (kind == "point") {
    const Point at = parse_point(member(node, "at", path), d, path + ".at");
    return DomainSpec::singleton(at);
  }
  if (kind == "union") {
    auto ch = parse_children(node, d, path);
    return build(path, [&] { return DomainSpec::union_of(std::move(ch)); });
  }
  if (kind == "intersection") {
    auto ch = parse_children(node, d, path);
    return build(path, [&] { return DomainSpec::intersection_of(std::move(ch)); });
  }
  if (kind == "difference") {
    DomainSpec left = parse_domain(member(node, "left", path), d, path + ".left");
    DomainSpec right = parse_domain(member(node, "right", path), d, path + ".right");
    return build(path + ".right", [&] { return DomainSpec::difference(std::move(left), std::move(right)); });
  }
  fail(path + ".kind", "unknown domain kind '" + kind + "'");
}

Payoff parse_payoff(const Json& node, const StableParams& p, const std::string& path) {
  const std::string kind = kind_of(node, path);
  if (kind == "constant") {
    const double v = get_number_or(node, "value", 1.0, path);
    return [v](const Point&) { return v; };
  }
  if (kind == "coordinate") {
    const Json& idx = member(node, "index", path);
    if (!idx.is_number_integer() || idx.get<long long>() < 0 || idx.get<long long>() >= p.d)
      fail(path + ".index", "expected an integer in [0, d)");
    const int k = idx.get<int>();
    return [k](const Point& y) { return y[k]; };
  }
  if (kind == "levy-weight") {
    const Point y0 = parse_point(member(node, "y0", path), p.d, path + ".y0");
    return [p, y0](const Point& y) { return levy_density(p, y, y0); };
  }
  if (kind == "indicator") {
    const DomainSpec region = parse_domain(member(node, "region", path), p.d, path + ".region");
    return [region](const Point& y) { return contains(region, y) ? 1.0 : 0.0; };
  }
  fail(path + ".kind", "unknown payoff kind '" + kind + "'");
}

RunConfig parse_run_config(const Json& doc, bool require_domain) {
  if (!doc.is_object()) fail("", "the configuration must be a JSON object");
  RunConfig rc;
  const Json& dj = member(doc, "d", "");
  if (!dj.is_number_integer()) fail("d", "expected an integer");
  const int d = dj.get<int>();
  const double alpha = get_number(doc, "alpha", "");
  try {
    rc.params = StableParams(d, alpha);
  } catch (const std::exception& e) {
    fail("", e.what());
  }
  if (doc.contains("domain")) {
    rc.domain = parse_domain(doc.at("domain"), d, "domain");
    rc.domain_hash = fnv1a_hex(doc.at("domain").dump());
  } else if (require_domain) {
    fail("domain", "missing field");
  } else {
    rc.domain_hash = fnv1a_hex("null");
  }
  rc.walks = get_count_or(doc, "walks", rc.walks, "");
  if (doc.contains("walk")) {
    const Json& w = doc.at("walk");
    if (!w.is_object()) fail("walk", "expected an object");
    rc.walk.shrink = get_number_or(w, "shrink", rc.walk.shrink, "walk");
    if (!(rc.walk.shrink > 0.0 && rc.walk.shrink <= 1.0)) fail("walk.shrink", "must lie in (0, 1]");
    rc.walk.max_steps = get_count_or(w, "max_steps", rc.walk.max_steps, "walk");
    rc.walk.min_radius = get_number_or(w, "min_radius", rc.walk.min_radius, "walk");
    if (!(rc.walk.min_radius > 0.0)) fail("walk.min_radius", "must be positive");
  }
  rc.doc = doc;
  return rc;
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace fracpot
