#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace fracpot {

inline constexpr int kMaxDim = 8;

/// A point (or vector) of R^d with inline storage, d <= kMaxDim.
class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(checked(dim)) {}
  Point(std::initializer_list<double> xs) : dim_(checked(static_cast<int>(xs.size()))) {
    int i = 0;
    for (double x : xs) c_[i++] = x;
  }
  explicit Point(std::span<const double> xs) : dim_(checked(static_cast<int>(xs.size()))) {
    for (int i = 0; i < dim_; ++i) c_[i] = xs[i];
  }

  /// The i-th unit vector of R^dim, scaled by s.
  static Point axis(int dim, int i, double s = 1.0) {
    Point p(dim);
    p[i] = s;
    return p;
  }

  int dim() const { return dim_; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }
  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  double norm2() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }

  bool is_finite() const {
    for (int i = 0; i < dim_; ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend Point operator-(Point a) { return a *= -1.0; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

 private:
  static int checked(int dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Point: dimension must lie in [1, 8]");
    return dim;
  }

  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

}  // namespace fracpot
