#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "fracpot/kernels.hpp"
#include "fracpot/point.hpp"

namespace fracpot {

class DomainSpec;

namespace shape {

struct Ball {
  BallSpec ball;
};
/// Open half-space {x : <normal, x> > offset}; normal is a unit vector.
struct HalfSpace {
  Point normal;
  double offset;
};
/// {x : 0 < x_1 < length, |(x_2..x_d)| < width_scale * x_1^gamma}, d >= 2.
struct ThornPower {
  int d;
  double gamma;
  double length;
  double width_scale;
};
/// {(x, y) in R^2 : y > |x|^gamma}.
struct CuspRegion {
  double gamma;
};
/// All of R^d.
struct Space {
  int d;
};
/// A single point. Only meaningful as the subtrahend of a Difference.
struct Singleton {
  Point at;
};
struct Union {
  std::vector<DomainSpec> children;
};
struct Intersection {
  std::vector<DomainSpec> children;
};
/// left minus the closure of right; right must be a Ball, HalfSpace or Singleton.
struct Difference {
  std::vector<DomainSpec> operands;  // {left, right}
};

using Node = std::variant<Ball, HalfSpace, ThornPower, CuspRegion, Space, Singleton, Union, Intersection, Difference>;

}  // namespace shape

/// Immutable CSG description of an open set D in R^d.
class DomainSpec {
 public:
  static DomainSpec ball(const BallSpec& b);
  static DomainSpec ball(const Point& center, double radius) { return ball(BallSpec(center, radius)); }
  static DomainSpec half_space(const Point& normal, double offset);
  static DomainSpec thorn(int d, double gamma, double length = 1.0, double width_scale = 1.0);
  static DomainSpec cusp(double gamma);
  static DomainSpec space(int d);
  static DomainSpec singleton(const Point& at);
  static DomainSpec union_of(std::vector<DomainSpec> children);
  static DomainSpec intersection_of(std::vector<DomainSpec> children);
  static DomainSpec difference(DomainSpec left, DomainSpec right);

  int dim() const { return dim_; }
  const shape::Node& node() const { return *node_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(node_.get());
  }

 private:
  DomainSpec(std::shared_ptr<const shape::Node> n, int dim) : node_(std::move(n)), dim_(dim) {}

  std::shared_ptr<const shape::Node> node_;
  int dim_ = 0;
};

struct InradiusBound {
  double radius = 0.0;
  bool exact = false;
};

/// Open-set membership: boundary points are not in D.
bool contains(const DomainSpec& D, const Point& x);

/// Certified r with B(x, r) inside D; +inf for the whole space. Throws if x is not in D.
InradiusBound dist_lower_bound(const DomainSpec& D, const Point& x);

/// Certified r with B(y, r) disjoint from D, for y outside D (0 when nothing can be certified).
double exterior_distance_lower_bound(const DomainSpec& D, const Point& y);

/// A ball containing D when D is bounded by construction.
std::optional<BallSpec> bounding_ball(const DomainSpec& D);

/// A point of the boundary near x, found by marching along the 2d coordinate
/// rays and keeping the closest crossing. Returns x when no ray leaves D.
Point project_to_boundary(const DomainSpec& D, const Point& x);

/// The image kD. Thorns rescale their width, cusps only scale for gamma = 1.
DomainSpec scale_domain(const DomainSpec& D, double k);

/// The image D + t. Thorns and cusps are anchored at the origin and refuse.
DomainSpec translate_domain(const DomainSpec& D, const Point& t);

/// A point of R^d or the point at infinity.
class ExtendedPoint {
 public:
  static ExtendedPoint infinity() { return ExtendedPoint(); }
  ExtendedPoint(const Point& p) : p_(p) {}  // NOLINT: implicit by intent

  bool is_infinity() const { return !p_.has_value(); }
  const Point& finite() const { return p_.value(); }

 private:
  ExtendedPoint() = default;
  std::optional<Point> p_;
};

/// Inversion Tx = x / |x|^2, with T0 = infinity.
ExtendedPoint invert_point(const Point& x);
/// Inversion on the one-point compactification: infinity maps to the origin of R^dim.
ExtendedPoint invert_point(const ExtendedPoint& x, int dim);

/// Image of a ball not meeting the origin under inversion.
BallSpec invert_ball(const BallSpec& ball);

}  // namespace fracpot
