#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace accspec {

/// A point (x, omega) of the time-frequency plane.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

double norm(Vec2 v);
double dot(Vec2 a, Vec2 b);

/// Integer coefficients (i, j) of a lattice point i*v1 + j*v2. Set operations
/// on lattice points always go through these, never through mapped floats.
struct LatticePoint {
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
  friend LatticePoint operator-(LatticePoint a, LatticePoint b) { return {a.i - b.i, a.j - b.j}; }
  friend LatticePoint operator+(LatticePoint a, LatticePoint b) { return {a.i + b.i, a.j + b.j}; }
};

/// Result of Lagrange-Gauss reduction: |v1| <= |v2| and |<v1,v2>| <= |v1|^2 / 2.
struct ReducedBasis {
  Vec2 v1;
  Vec2 v2;
};

ReducedBasis lagrange_reduce(Vec2 v1, Vec2 v2);

/// Full-rank lattice in the time-frequency plane. The generator columns are the
/// basis vectors; l_min and l_fund are computed once at construction.
class Lattice2 {
 public:
  /// Columns v1, v2. Throws kInvalidLattice when |det| < 1e-12.
  Lattice2(Vec2 v1, Vec2 v2);

  /// Row-major 2x2 generator: columns of the matrix are the basis vectors.
  static Lattice2 from_rows(const std::array<std::array<double, 2>, 2>& rows);
  static Lattice2 diagonal(double a, double b) { return Lattice2({a, 0.0}, {0.0, b}); }

  Vec2 v1() const { return v1_; }
  Vec2 v2() const { return v2_; }
  double det() const { return det_; }
  double density() const { return 1.0 / det_; }
  double l_min() const { return l_min_; }
  double l_fund() const { return l_fund_; }

  Vec2 point(LatticePoint p) const {
    return {static_cast<double>(p.i) * v1_.x + static_cast<double>(p.j) * v2_.x,
            static_cast<double>(p.i) * v1_.y + static_cast<double>(p.j) * v2_.y};
  }

  /// Real coefficients c with point(c) == z.
  std::array<double, 2> coefficients(Vec2 z) const;

  /// Smallest q > 0 such that every time coordinate of the lattice is an
  /// integer multiple of q, or 0 when the time coordinates are incommensurate.
  double time_quantum() const;

  std::array<std::array<double, 2>, 2> rows() const {
    return {{{v1_.x, v2_.x}, {v1_.y, v2_.y}}};
  }

 private:
  Vec2 v1_;
  Vec2 v2_;
  double det_ = 0.0;
  double l_min_ = 0.0;
  double l_fund_ = 0.0;
};

/// Integer coefficient bounds of a box, padded so no lattice point in the box
/// is missed.
struct CoefficientBox {
  std::int64_t i_lo, i_hi, j_lo, j_hi;
};
CoefficientBox coefficient_box(const Lattice2& lat, Vec2 lo, Vec2 hi);

std::vector<LatticePoint> enumerate_in_box(const Lattice2& lat, Vec2 box_lo, Vec2 box_hi);
double shortest_vector(const Lattice2& lat);
double fundamental_diameter(const Lattice2& lat);

struct Ball {
  Vec2 center;
  double radius = 0.0;
};

struct Rect {
  Vec2 lo;
  Vec2 hi;
};

struct ConvexPolygon {
  std::vector<Vec2> vertices;  // counterclockwise
};

/// Compact region of the plane. Containment is closed with a 1e-9 tolerance
/// toward inclusion.
class Mask {
 public:
  using Shape = std::variant<Ball, Rect, ConvexPolygon>;

  static Mask ball(Vec2 center, double radius);
  static Mask rect(Vec2 lo, Vec2 hi);
  static Mask polygon(std::vector<Vec2> vertices);

  /// "ball:cx,cy,R", "rect:x0,y0,x1,y1", "poly:x1,y1,x2,y2,x3,y3[,...]".
  static Mask parse(std::string_view spec);
  std::string to_string() const;

  const Shape& shape() const { return shape_; }
  bool is_ball() const { return std::holds_alternative<Ball>(shape_); }

  bool contains(Vec2 z) const;
  double boundary_distance(Vec2 z) const;
  /// Euclidean distance from z to the region (0 inside).
  double distance_to(Vec2 z) const;
  void bounding_box(Vec2& lo, Vec2& hi) const;
  double perimeter() const;
  double area() const;

 private:
  explicit Mask(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

inline constexpr double kContainmentTol = 1e-9;

double boundary_distance(const Mask& mask, Vec2 z);
std::vector<LatticePoint> points_in_mask(const Mask& mask, const Lattice2& lat);

struct BoundaryCount {
  std::size_t count = 0;
  std::vector<LatticePoint> points;
};

/// Lattice points within closed distance r of the mask boundary.
BoundaryCount boundary_count(const Mask& mask, const Lattice2& lat, double r);

/// Lattice points in mask + B(0, pad): inside the mask, or outside within
/// distance pad.
std::vector<LatticePoint> points_near_mask(const Mask& mask, const Lattice2& lat, double pad);

std::size_t symmetric_difference_count(std::span<const LatticePoint> a,
                                       std::span<const LatticePoint> b);

/// Finite sample of a real-valued function on lattice points.
struct LatticeField {
  Lattice2 lattice;
  std::vector<LatticePoint> points;
  std::vector<double> values;
};

}  // namespace accspec
