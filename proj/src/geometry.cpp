#include "fracpot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracpot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

// Largest r in [0, hi] with g(r) >= 0, for g decreasing and g(0) > 0.
template <class G>
double largest_feasible(G&& g, double hi) {
  if (!(hi > 0.0)) return 0.0;
  if (g(hi) >= 0.0) return hi;
  double lo = 0.0;
  for (int i = 0; i < 60 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) >= 0.0) lo = mid; else hi = mid;
  }
  return lo;
}

double lateral_norm(const Point& x) {
  double s = 0.0;
  for (int i = 1; i < x.dim(); ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

bool in_closure_of_subtrahend(const DomainSpec& B, const Point& x) {
  if (auto* b = B.as<shape::Ball>()) return (x - b->ball.center).norm() <= b->ball.radius;
  if (auto* h = B.as<shape::HalfSpace>()) return dot(h->normal, x) >= h->offset;
  if (auto* s = B.as<shape::Singleton>()) return x == s->at;
  throw DomainError("difference: subtrahend must be a ball, half-space or point");
}

double distance_to_closure_of_subtrahend(const DomainSpec& B, const Point& x) {
  if (auto* b = B.as<shape::Ball>()) return std::max(0.0, (x - b->ball.center).norm() - b->ball.radius);
  if (auto* h = B.as<shape::HalfSpace>()) return std::max(0.0, h->offset - dot(h->normal, x));
  if (auto* s = B.as<shape::Singleton>()) return distance(x, s->at);
  return 0.0;
}

// Certified depth of x inside the open subtrahend (0 if outside).
double depth_in_subtrahend(const DomainSpec& B, const Point& x) {
  if (auto* b = B.as<shape::Ball>()) return std::max(0.0, b->ball.radius - (x - b->ball.center).norm());
  if (auto* h = B.as<shape::HalfSpace>()) return std::max(0.0, dot(h->normal, x) - h->offset);
  return 0.0;
}

double thorn_profile(const shape::ThornPower& t, double s) {
  if (s <= 0.0) return 0.0;
  return t.width_scale * std::pow(std::min(s, t.length), t.gamma);
}

double inradius(const DomainSpec& D, const Point& x);

double inradius_node(const shape::Node& n, const Point& x) {
  return std::visit(
      Overloaded{
          [&](const shape::Ball& b) { return b.ball.radius - (x - b.ball.center).norm(); },
          [&](const shape::HalfSpace& h) { return dot(h.normal, x) - h.offset; },
          [&](const shape::ThornPower& t) {
            const double s = x[0];
            const double rho = lateral_norm(x);
            auto g = [&](double r) { return t.width_scale * std::pow(s - r, t.gamma) - r - rho; };
            return largest_feasible(g, std::min(s, t.length - s));
          },
          [&](const shape::CuspRegion& c) {
            const double ax = std::abs(x[0]);
            const double y = x[1];
            auto g = [&](double r) { return y - r - std::pow(ax + r, c.gamma); };
            return largest_feasible(g, y);
          },
          [&](const shape::Space&) { return kInf; },
          [&](const shape::Singleton&) { return 0.0; },
          [&](const shape::Union& u) {
            double best = 0.0;
            for (const auto& c : u.children)
              if (contains(c, x)) best = std::max(best, inradius(c, x));
            return best;
          },
          [&](const shape::Intersection& u) {
            double best = kInf;
            for (const auto& c : u.children) best = std::min(best, inradius(c, x));
            return best;
          },
          [&](const shape::Difference& d) {
            return std::min(inradius(d.operands[0], x), distance_to_closure_of_subtrahend(d.operands[1], x));
          },
      },
      n);
}

double inradius(const DomainSpec& D, const Point& x) { return std::max(0.0, inradius_node(D.node(), x)); }

DomainSpec make_difference_checked(DomainSpec left, DomainSpec right) {
  return DomainSpec::difference(std::move(left), std::move(right));
}

}  // namespace

DomainSpec DomainSpec::ball(const BallSpec& b) {
  return DomainSpec(std::make_shared<const shape::Node>(shape::Ball{b}), b.center.dim());
}

DomainSpec DomainSpec::half_space(const Point& normal, double offset) {
  require(std::abs(normal.norm() - 1.0) <= 1e-9, "half_space: normal must be a unit vector");
  require(std::isfinite(offset), "half_space: offset must be finite");
  return DomainSpec(std::make_shared<const shape::Node>(shape::HalfSpace{normal, offset}), normal.dim());
}

DomainSpec DomainSpec::thorn(int d, double gamma, double length, double width_scale) {
  require(d >= 2 && d <= kMaxDim, "thorn: dimension must lie in [2, 8]");
  require(gamma > 0.0 && std::isfinite(gamma), "thorn: gamma must be positive");
  require(length > 0.0 && length <= 1.0, "thorn: length must lie in (0, 1]");
  require(width_scale > 0.0 && std::isfinite(width_scale), "thorn: width_scale must be positive");
  return DomainSpec(std::make_shared<const shape::Node>(shape::ThornPower{d, gamma, length, width_scale}), d);
}

DomainSpec DomainSpec::cusp(double gamma) {
  require(gamma > 0.0 && std::isfinite(gamma), "cusp: gamma must be positive");
  return DomainSpec(std::make_shared<const shape::Node>(shape::CuspRegion{gamma}), 2);
}

DomainSpec DomainSpec::space(int d) {
  require(d >= 1 && d <= kMaxDim, "space: dimension must lie in [1, 8]");
  return DomainSpec(std::make_shared<const shape::Node>(shape::Space{d}), d);
}

DomainSpec DomainSpec::singleton(const Point& at) {
  require(at.is_finite(), "point: coordinates must be finite");
  return DomainSpec(std::make_shared<const shape::Node>(shape::Singleton{at}), at.dim());
}

DomainSpec DomainSpec::union_of(std::vector<DomainSpec> children) {
  require(!children.empty(), "union: needs at least one child");
  const int d = children.front().dim();
  for (const auto& c : children) {
    require(c.dim() == d, "union: children differ in dimension");
    require(!c.as<shape::Singleton>(), "union: a point may only be subtracted");
  }
  return DomainSpec(std::make_shared<const shape::Node>(shape::Union{std::move(children)}), d);
}

DomainSpec DomainSpec::intersection_of(std::vector<DomainSpec> children) {
  require(!children.empty(), "intersection: needs at least one child");
  const int d = children.front().dim();
  for (const auto& c : children) {
    require(c.dim() == d, "intersection: children differ in dimension");
    require(!c.as<shape::Singleton>(), "intersection: a point may only be subtracted");
  }
  return DomainSpec(std::make_shared<const shape::Node>(shape::Intersection{std::move(children)}), d);
}

DomainSpec DomainSpec::difference(DomainSpec left, DomainSpec right) {
  require(left.dim() == right.dim(), "difference: operands differ in dimension");
  require(!left.as<shape::Singleton>(), "difference: a point may only be subtracted");
  require(right.as<shape::Ball>() || right.as<shape::HalfSpace>() || right.as<shape::Singleton>(),
          "difference: subtrahend must be a ball, half-space or point");
  const int d = left.dim();
  return DomainSpec(
      std::make_shared<const shape::Node>(shape::Difference{{std::move(left), std::move(right)}}), d);
}

bool contains(const DomainSpec& D, const Point& x) {
  if (x.dim() != D.dim()) throw DomainError("contains: dimension mismatch");
  return std::visit(
      Overloaded{
          [&](const shape::Ball& b) { return (x - b.ball.center).norm2() < b.ball.radius * b.ball.radius; },
          [&](const shape::HalfSpace& h) { return dot(h.normal, x) > h.offset; },
          [&](const shape::ThornPower& t) {
            return x[0] > 0.0 && x[0] < t.length && lateral_norm(x) < t.width_scale * std::pow(x[0], t.gamma);
          },
          [&](const shape::CuspRegion& c) { return x[1] > std::pow(std::abs(x[0]), c.gamma); },
          [&](const shape::Space&) { return true; },
          [&](const shape::Singleton&) { return false; },
          [&](const shape::Union& u) {
            return std::any_of(u.children.begin(), u.children.end(), [&](const auto& c) { return contains(c, x); });
          },
          [&](const shape::Intersection& u) {
            return std::all_of(u.children.begin(), u.children.end(), [&](const auto& c) { return contains(c, x); });
          },
          [&](const shape::Difference& d) {
            return contains(d.operands[0], x) && !in_closure_of_subtrahend(d.operands[1], x);
          },
      },
      D.node());
}

InradiusBound dist_lower_bound(const DomainSpec& D, const Point& x) {
  if (!contains(D, x)) throw DomainError("dist_lower_bound: point is not in the domain");
  const bool exact = D.as<shape::Ball>() || D.as<shape::HalfSpace>() || D.as<shape::Space>();
  return {inradius(D, x), exact};
}

double exterior_distance_lower_bound(const DomainSpec& D, const Point& y) {
  if (y.dim() != D.dim()) throw DomainError("exterior_distance_lower_bound: dimension mismatch");
  if (contains(D, y)) return 0.0;
  return std::visit(
      Overloaded{
          [&](const shape::Ball& b) { return std::max(0.0, (y - b.ball.center).norm() - b.ball.radius); },
          [&](const shape::HalfSpace& h) { return std::max(0.0, h.offset - dot(h.normal, y)); },
          [&](const shape::ThornPower& t) {
            const double s = y[0];
            const double rho = lateral_norm(y);
            double best = std::max({0.0, -s, s - t.length});
            auto g = [&](double r) { return rho - r - thorn_profile(t, s + r); };
            if (g(0.0) > 0.0) best = std::max(best, largest_feasible(g, rho));
            return best;
          },
          [&](const shape::CuspRegion& c) {
            const double ax = std::abs(y[0]);
            const double b = y[1];
            double best = std::max(0.0, -b);
            auto g = [&](double r) { return std::pow(std::max(ax - r, 0.0), c.gamma) - b - r; };
            if (g(0.0) > 0.0) best = std::max(best, largest_feasible(g, ax + std::abs(b)));
            return best;
          },
          [&](const shape::Space&) { return 0.0; },
          [&](const shape::Singleton&) { return kInf; },
          [&](const shape::Union& u) {
            double best = kInf;
            for (const auto& c : u.children) best = std::min(best, exterior_distance_lower_bound(c, y));
            return best;
          },
          [&](const shape::Intersection& u) {
            double best = 0.0;
            for (const auto& c : u.children) best = std::max(best, exterior_distance_lower_bound(c, y));
            return best;
          },
          [&](const shape::Difference& d) {
            return std::max(exterior_distance_lower_bound(d.operands[0], y), depth_in_subtrahend(d.operands[1], y));
          },
      },
      D.node());
}

std::optional<BallSpec> bounding_ball(const DomainSpec& D) {
  return std::visit(
      Overloaded{
          [&](const shape::Ball& b) -> std::optional<BallSpec> { return b.ball; },
          [&](const shape::HalfSpace&) -> std::optional<BallSpec> { return std::nullopt; },
          [&](const shape::ThornPower& t) -> std::optional<BallSpec> {
            const double half = 0.5 * t.length;
            const double w = t.width_scale * std::pow(t.length, t.gamma);
            return BallSpec(Point::axis(t.d, 0, half), std::hypot(half, w));
          },
          [&](const shape::CuspRegion&) -> std::optional<BallSpec> { return std::nullopt; },
          [&](const shape::Space&) -> std::optional<BallSpec> { return std::nullopt; },
          [&](const shape::Singleton&) -> std::optional<BallSpec> { return std::nullopt; },
          [&](const shape::Union& u) -> std::optional<BallSpec> {
            std::vector<BallSpec> balls;
            for (const auto& c : u.children) {
              auto b = bounding_ball(c);
              if (!b) return std::nullopt;
              balls.push_back(*b);
            }
            Point center(D.dim());
            for (const auto& b : balls) center += b.center;
            center *= 1.0 / static_cast<double>(balls.size());
            double radius = 0.0;
            for (const auto& b : balls) radius = std::max(radius, distance(center, b.center) + b.radius);
            return BallSpec(center, radius);
          },
          [&](const shape::Intersection& u) -> std::optional<BallSpec> {
            std::optional<BallSpec> best;
            for (const auto& c : u.children) {
              auto b = bounding_ball(c);
              if (b && (!best || b->radius < best->radius)) best = b;
            }
            return best;
          },
          [&](const shape::Difference& d) -> std::optional<BallSpec> { return bounding_ball(d.operands[0]); },
      },
      D.node());
}

Point project_to_boundary(const DomainSpec& D, const Point& x) {
  if (!contains(D, x)) return x;
  const double scale = 1.0 + x.norm();
  Point best = x;
  double best_t = kInf;
  for (int axis = 0; axis < D.dim(); ++axis) {
    for (double sign : {-1.0, 1.0}) {
      const Point e = Point::axis(D.dim(), axis, sign);
      double t = 0.0;
      bool hit = false;
      for (int it = 0; it < 100000 && t < best_t; ++it) {
        const Point q = x + t * e;
        if (!contains(D, q)) {
          hit = true;
          break;
        }
        const double r = inradius(D, q);
        if (!std::isfinite(r) || t > 1e12 * scale) break;
        if (r < 1e-13 * scale) {
          // Sphere tracing stalls at the boundary; finish by bisection.
          double lo = t, hi = t + 1e-12 * scale;
          while (contains(D, x + hi * e) && hi - t < 1e-6 * scale) hi = t + 2.0 * (hi - t);
          if (contains(D, x + hi * e)) {
            t = hi;
            continue;
          }
          for (int k = 0; k < 60; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (contains(D, x + mid * e)) lo = mid; else hi = mid;
          }
          t = hi;
          hit = true;
          break;
        }
        t += r;
      }
      if (hit && t < best_t) {
        best_t = t;
        best = x + t * e;
      }
    }
  }
  return best;
}

DomainSpec scale_domain(const DomainSpec& D, double k) {
  require(k > 0.0 && std::isfinite(k), "scale_domain: factor must be positive");
  return std::visit(
      Overloaded{
          [&](const shape::Ball& b) { return DomainSpec::ball(b.ball.center * k, b.ball.radius * k); },
          [&](const shape::HalfSpace& h) { return DomainSpec::half_space(h.normal, h.offset * k); },
          [&](const shape::ThornPower& t) {
            return DomainSpec::thorn(t.d, t.gamma, t.length * k, t.width_scale * std::pow(k, 1.0 - t.gamma));
          },
          [&](const shape::CuspRegion& c) {
            if (c.gamma != 1.0) throw Unsupported("scale_domain: a cusp with gamma != 1 is not scale invariant");
            return D;
          },
          [&](const shape::Space&) { return D; },
          [&](const shape::Singleton& s) { return DomainSpec::singleton(s.at * k); },
          [&](const shape::Union& u) {
            std::vector<DomainSpec> out;
            for (const auto& c : u.children) out.push_back(scale_domain(c, k));
            return DomainSpec::union_of(std::move(out));
          },
          [&](const shape::Intersection& u) {
            std::vector<DomainSpec> out;
            for (const auto& c : u.children) out.push_back(scale_domain(c, k));
            return DomainSpec::intersection_of(std::move(out));
          },
          [&](const shape::Difference& d) {
            return make_difference_checked(scale_domain(d.operands[0], k), scale_domain(d.operands[1], k));
          },
      },
      D.node());
}

DomainSpec translate_domain(const DomainSpec& D, const Point& t) {
  require(t.dim() == D.dim(), "translate_domain: dimension mismatch");
  return std::visit(
      Overloaded{
          [&](const shape::Ball& b) { return DomainSpec::ball(b.ball.center + t, b.ball.radius); },
          [&](const shape::HalfSpace& h) { return DomainSpec::half_space(h.normal, h.offset + dot(h.normal, t)); },
          [&](const shape::ThornPower&) -> DomainSpec {
            throw Unsupported("translate_domain: thorns are anchored at the origin");
          },
          [&](const shape::CuspRegion&) -> DomainSpec {
            throw Unsupported("translate_domain: cusps are anchored at the origin");
          },
          [&](const shape::Space&) { return D; },
          [&](const shape::Singleton& s) { return DomainSpec::singleton(s.at + t); },
          [&](const shape::Union& u) {
            std::vector<DomainSpec> out;
            for (const auto& c : u.children) out.push_back(translate_domain(c, t));
            return DomainSpec::union_of(std::move(out));
          },
          [&](const shape::Intersection& u) {
            std::vector<DomainSpec> out;
            for (const auto& c : u.children) out.push_back(translate_domain(c, t));
            return DomainSpec::intersection_of(std::move(out));
          },
          [&](const shape::Difference& d) {
            return make_difference_checked(translate_domain(d.operands[0], t), translate_domain(d.operands[1], t));
          },
      },
      D.node());
}

ExtendedPoint invert_point(const Point& x) {
  const double n2 = x.norm2();
  if (n2 == 0.0) return ExtendedPoint::infinity();
  return ExtendedPoint(x * (1.0 / n2));
}

ExtendedPoint invert_point(const ExtendedPoint& x, int dim) {
  if (x.is_infinity()) return ExtendedPoint(Point(dim));
  return invert_point(x.finite());
}

BallSpec invert_ball(const BallSpec& ball) {
  const double c2 = ball.center.norm2();
  const double r2 = ball.radius * ball.radius;
  if (!(c2 > r2)) throw DomainError("invert_ball: the closed ball must not contain the origin");
  const double den = c2 - r2;
  return BallSpec(ball.center * (1.0 / den), ball.radius / den);
}

}  // namespace fracpot
