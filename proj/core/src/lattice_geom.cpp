#include "accspec/lattice_geom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "accspec/error.hpp"

namespace accspec {
namespace {

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

std::vector<Vec2> rect_vertices(const Rect& r) {
  return {r.lo, {r.hi.x, r.lo.y}, r.hi, {r.lo.x, r.hi.y}};
}

double polyline_distance(const std::vector<Vec2>& v, Vec2 z) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k) {
    best = std::min(best, segment_distance(z, v[k], v[(k + 1) % v.size()]));
  }
  return best;
}

bool polygon_contains(const std::vector<Vec2>& v, Vec2 z) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Vec2 a = v[k];
    const Vec2 b = v[(k + 1) % v.size()];
    const Vec2 e = b - a;
    if (cross(e, z - a) < -kContainmentTol * norm(e)) return false;
  }
  return true;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_numbers(std::string_view body, std::string_view spec) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t comma = body.find(',', pos);
    const std::string token(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidMask, "bad number '" + token + "' in mask spec '" + std::string(spec) + "'");
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

ReducedBasis lagrange_reduce(Vec2 v1, Vec2 v2) {
  for (int iter = 0; iter < 1000; ++iter) {
    if (dot(v1, v1) > dot(v2, v2)) std::swap(v1, v2);
    const double mu = std::round(dot(v1, v2) / dot(v1, v1));
    if (mu == 0.0) break;
    v2 = v2 - mu * v1;
  }
  if (dot(v1, v1) > dot(v2, v2)) std::swap(v1, v2);
  return {v1, v2};
}

Lattice2::Lattice2(Vec2 v1, Vec2 v2) : v1_(v1), v2_(v2) {
  const double d = cross(v1, v2);
  if (!std::isfinite(d) || std::abs(d) < 1e-12) {
    throw Error(ErrorCode::kInvalidLattice, "degenerate generator, |det| = " + fmt_double(std::abs(d)));
  }
  det_ = std::abs(d);
  l_min_ = shortest_vector(*this);
  l_fund_ = fundamental_diameter(*this);
}

Lattice2 Lattice2::from_rows(const std::array<std::array<double, 2>, 2>& rows) {
  return Lattice2({rows[0][0], rows[1][0]}, {rows[0][1], rows[1][1]});
}

std::array<double, 2> Lattice2::coefficients(Vec2 z) const {
  const double d = cross(v1_, v2_);
  return {cross(z, v2_) / d, cross(v1_, z) / d};
}

double Lattice2::time_quantum() const {
  double a = std::abs(v1_.x);
  double b = std::abs(v2_.x);
  const double scale = std::max(a, b);
  const double tol = 1e-9 * scale;
  if (a < tol) return b;
  if (b < tol) return a;
  for (int iter = 0; iter < 64 && b > tol; ++iter) {
    double rem = std::fmod(a, b);
    if (b - rem < tol) rem = 0.0;
    a = b;
    b = rem;
  }
  if (b > tol || a < 1e-6 * scale) return 0.0;
  for (double c : {std::abs(v1_.x), std::abs(v2_.x)}) {
    const double ratio = c / a;
    if (std::abs(ratio - std::round(ratio)) > 1e-7) return 0.0;
  }
  return a;
}

CoefficientBox coefficient_box(const Lattice2& lat, Vec2 lo, Vec2 hi) {
  double i_min = std::numeric_limits<double>::infinity(), i_max = -i_min;
  double j_min = i_min, j_max = -i_min;
  for (Vec2 corner : {lo, Vec2{hi.x, lo.y}, hi, Vec2{lo.x, hi.y}}) {
    const auto c = lat.coefficients(corner);
    i_min = std::min(i_min, c[0]);
    i_max = std::max(i_max, c[0]);
    j_min = std::min(j_min, c[1]);
    j_max = std::max(j_max, c[1]);
  }
  return {static_cast<std::int64_t>(std::floor(i_min)) - 1, static_cast<std::int64_t>(std::ceil(i_max)) + 1,
          static_cast<std::int64_t>(std::floor(j_min)) - 1, static_cast<std::int64_t>(std::ceil(j_max)) + 1};
}

std::vector<LatticePoint> enumerate_in_box(const Lattice2& lat, Vec2 box_lo, Vec2 box_hi) {
  if (!(box_lo.x < box_hi.x && box_lo.y < box_hi.y)) {
    throw Error(ErrorCode::kInvalidArgument, "enumerate_in_box requires box_lo < box_hi");
  }
  const CoefficientBox cb = coefficient_box(lat, box_lo, box_hi);
  std::vector<LatticePoint> out;
  for (std::int64_t i = cb.i_lo; i <= cb.i_hi; ++i) {
    for (std::int64_t j = cb.j_lo; j <= cb.j_hi; ++j) {
      const Vec2 z = lat.point({i, j});
      if (z.x >= box_lo.x - kContainmentTol && z.x <= box_hi.x + kContainmentTol &&
          z.y >= box_lo.y - kContainmentTol && z.y <= box_hi.y + kContainmentTol) {
        out.push_back({i, j});
      }
    }
  }
  return out;
}

double shortest_vector(const Lattice2& lat) {
  const double rad = 2.0 * std::min(norm(lat.v1()), norm(lat.v2()));
  double best = std::numeric_limits<double>::infinity();
  for (const LatticePoint& p : enumerate_in_box(lat, {-rad, -rad}, {rad, rad})) {
    if (p.i == 0 && p.j == 0) continue;
    best = std::min(best, norm(lat.point(p)));
  }
  return best;
}

double fundamental_diameter(const Lattice2& lat) {
  const ReducedBasis rb = lagrange_reduce(lat.v1(), lat.v2());
  return std::max(norm(rb.v1 + rb.v2), norm(rb.v1 - rb.v2));
}

Mask Mask::ball(Vec2 center, double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidMask, "ball radius must be finite and >= 0");
  }
  return Mask(Ball{center, radius});
}

Mask Mask::rect(Vec2 lo, Vec2 hi) {
  if (!(lo.x < hi.x && lo.y < hi.y)) {
    throw Error(ErrorCode::kInvalidMask, "rect requires lo < hi componentwise");
  }
  return Mask(Rect{lo, hi});
}

Mask Mask::polygon(std::vector<Vec2> vertices) {
  if (vertices.size() < 3) throw Error(ErrorCode::kInvalidMask, "polygon needs at least 3 vertices");
  const std::size_t n = vertices.size();
  double turning = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 e0 = vertices[(k + 1) % n] - vertices[k];
    const Vec2 e1 = vertices[(k + 2) % n] - vertices[(k + 1) % n];
    const double c = cross(e0, e1);
    if (!(c > 0.0)) {
      throw Error(ErrorCode::kInvalidMask, "polygon must be strictly convex and counterclockwise");
    }
    turning += std::atan2(c, dot(e0, e1));
  }
  if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6) {
    throw Error(ErrorCode::kInvalidMask, "polygon winds more than once");
  }
  return Mask(ConvexPolygon{std::move(vertices)});
}

Mask Mask::parse(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidMask, "mask spec '" + std::string(spec) + "' lacks a kind prefix");
  }
  const std::string_view kind = spec.substr(0, colon);
  const std::vector<double> v = parse_numbers(spec.substr(colon + 1), spec);
  if (kind == "ball") {
    if (v.size() != 3) throw Error(ErrorCode::kInvalidMask, "ball spec needs cx,cy,R");
    return ball({v[0], v[1]}, v[2]);
  }
  if (kind == "rect") {
    if (v.size() != 4) throw Error(ErrorCode::kInvalidMask, "rect spec needs x0,y0,x1,y1");
    return rect({v[0], v[1]}, {v[2], v[3]});
  }
  if (kind == "poly") {
    if (v.size() < 6 || v.size() % 2 != 0) {
      throw Error(ErrorCode::kInvalidMask, "poly spec needs an even count >= 6 of coordinates");
    }
    std::vector<Vec2> verts;
    for (std::size_t k = 0; k < v.size(); k += 2) verts.push_back({v[k], v[k + 1]});
    return polygon(std::move(verts));
  }
  throw Error(ErrorCode::kInvalidMask, "unknown mask kind '" + std::string(kind) + "'");
}

std::string Mask::to_string() const {
  std::ostringstream os;
  if (const auto* b = std::get_if<Ball>(&shape_)) {
    os << "ball:" << fmt_double(b->center.x) << ',' << fmt_double(b->center.y) << ',' << fmt_double(b->radius);
  } else if (const auto* r = std::get_if<Rect>(&shape_)) {
    os << "rect:" << fmt_double(r->lo.x) << ',' << fmt_double(r->lo.y) << ',' << fmt_double(r->hi.x) << ','
       << fmt_double(r->hi.y);
  } else {
    const auto& p = std::get<ConvexPolygon>(shape_);
    os << "poly:";
    for (std::size_t k = 0; k < p.vertices.size(); ++k) {
      if (k) os << ',';
      os << fmt_double(p.vertices[k].x) << ',' << fmt_double(p.vertices[k].y);
    }
  }
  return os.str();
}

bool Mask::contains(Vec2 z) const {
  if (const auto* b = std::get_if<Ball>(&shape_)) return norm(z - b->center) <= b->radius + kContainmentTol;
  if (const auto* r = std::get_if<Rect>(&shape_)) {
    return z.x >= r->lo.x - kContainmentTol && z.x <= r->hi.x + kContainmentTol &&
           z.y >= r->lo.y - kContainmentTol && z.y <= r->hi.y + kContainmentTol;
  }
  return polygon_contains(std::get<ConvexPolygon>(shape_).vertices, z);
}

double Mask::boundary_distance(Vec2 z) const {
  if (const auto* b = std::get_if<Ball>(&shape_)) return std::abs(norm(z - b->center) - b->radius);
  if (const auto* r = std::get_if<Rect>(&shape_)) return polyline_distance(rect_vertices(*r), z);
  return polyline_distance(std::get<ConvexPolygon>(shape_).vertices, z);
}

double Mask::distance_to(Vec2 z) const { return contains(z) ? 0.0 : boundary_distance(z); }

void Mask::bounding_box(Vec2& lo, Vec2& hi) const {
  if (const auto* b = std::get_if<Ball>(&shape_)) {
    lo = {b->center.x - b->radius, b->center.y - b->radius};
    hi = {b->center.x + b->radius, b->center.y + b->radius};
    return;
  }
  if (const auto* r = std::get_if<Rect>(&shape_)) {
    lo = r->lo;
    hi = r->hi;
    return;
  }
  const auto& v = std::get<ConvexPolygon>(shape_).vertices;
  lo = hi = v.front();
  for (const Vec2& p : v) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
}

double Mask::perimeter() const {
  if (const auto* b = std::get_if<Ball>(&shape_)) return 2.0 * std::numbers::pi * b->radius;
  const std::vector<Vec2> v = std::holds_alternative<Rect>(shape_) ? rect_vertices(std::get<Rect>(shape_))
                                                                    : std::get<ConvexPolygon>(shape_).vertices;
  double p = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) p += norm(v[(k + 1) % v.size()] - v[k]);
  return p;
}

double Mask::area() const {
  if (const auto* b = std::get_if<Ball>(&shape_)) return std::numbers::pi * b->radius * b->radius;
  if (const auto* r = std::get_if<Rect>(&shape_)) return (r->hi.x - r->lo.x) * (r->hi.y - r->lo.y);
  const auto& v = std::get<ConvexPolygon>(shape_).vertices;
  double a = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) a += cross(v[k], v[(k + 1) % v.size()]);
  return 0.5 * a;
}

double boundary_distance(const Mask& mask, Vec2 z) { return mask.boundary_distance(z); }

namespace {

std::vector<LatticePoint> candidates(const Mask& mask, const Lattice2& lat, double inflate) {
  Vec2 lo, hi;
  mask.bounding_box(lo, hi);
  // A zero-radius ball still needs a non-degenerate box.
  const double pad = std::max(inflate, 1e-6);
  return enumerate_in_box(lat, {lo.x - pad, lo.y - pad}, {hi.x + pad, hi.y + pad});
}

}  // namespace

std::vector<LatticePoint> points_in_mask(const Mask& mask, const Lattice2& lat) {
  std::vector<LatticePoint> out;
  for (const LatticePoint& p : candidates(mask, lat, lat.l_fund())) {
    if (mask.contains(lat.point(p))) out.push_back(p);
  }
  return out;
}

BoundaryCount boundary_count(const Mask& mask, const Lattice2& lat, double r) {
  if (!(r >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "boundary_count requires r >= 0");
  BoundaryCount bc;
  for (const LatticePoint& p : candidates(mask, lat, r + lat.l_fund())) {
    if (mask.boundary_distance(lat.point(p)) <= r + kContainmentTol) bc.points.push_back(p);
  }
  bc.count = bc.points.size();
  return bc;
}

std::vector<LatticePoint> points_near_mask(const Mask& mask, const Lattice2& lat, double pad) {
  std::vector<LatticePoint> out;
  for (const LatticePoint& p : candidates(mask, lat, pad + lat.l_fund())) {
    const Vec2 z = lat.point(p);
    if (mask.contains(z) || mask.boundary_distance(z) <= pad + kContainmentTol) out.push_back(p);
  }
  return out;
}

std::size_t symmetric_difference_count(std::span<const LatticePoint> a, std::span<const LatticePoint> b) {
  std::vector<LatticePoint> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  std::vector<LatticePoint> diff;
  std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(diff));
  return diff.size();
}

}  // namespace accspec
