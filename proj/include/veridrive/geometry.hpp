// Copyright 2026 The veridrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace veridrive {

struct Vec2 {
  double x{0.0};
  double y{0.0};
};

inline Vec2 operator+(const Vec2 & a, const Vec2 & b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(const Vec2 & a, const Vec2 & b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double k, const Vec2 & v) { return {k * v.x, k * v.y}; }
inline double dot(const Vec2 & a, const Vec2 & b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2 & a, const Vec2 & b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 & v) { return std::hypot(v.x, v.y); }
inline Vec2 normalized(const Vec2 & v)
{
  const double n = norm(v);
  if (n < 1e-12) {
    throw std::invalid_argument("cannot normalize near-zero vector");
  }
  return {v.x / n, v.y / n};
}
// Unit normal pointing to the left of the travel direction.
inline Vec2 left_normal(const Vec2 & direction)
{
  const Vec2 u = normalized(direction);
  return {-u.y, u.x};
}

struct Interval {
  double lo{0.0};
  double hi{0.0};

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const Interval & o) const { return lo <= o.lo && o.hi <= hi; }
  bool overlaps(const Interval & o) const { return lo <= o.hi && o.lo <= hi; }
};

inline std::optional<Interval> intersect(const Interval & a, const Interval & b)
{
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  if (lo > hi) {
    return std::nullopt;
  }
  return Interval{lo, hi};
}

struct Aabb {
  Interval x;
  Interval y;
};

/// Convex polygon with counter-clockwise vertex order. Degenerate inputs
/// (fewer than 3 vertices) are rejected.
class ConvexPolygon {
public:
  ConvexPolygon() = default;

  explicit ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices))
  {
    if (vertices_.size() < 3) {
      throw std::invalid_argument("polygon needs at least 3 vertices");
    }
    if (signed_area(vertices_) < 0.0) {
      std::reverse(vertices_.begin(), vertices_.end());
    }
  }

  static ConvexPolygon oriented_rect(
    const Vec2 & center, double length, double width, double heading)
  {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    const double hl = 0.5 * length;
    const double hw = 0.5 * width;
    auto corner = [&](double dx, double dy) {
      return Vec2{center.x + dx * c - dy * s, center.y + dx * s + dy * c};
    };
    return ConvexPolygon({corner(-hl, -hw), corner(hl, -hw), corner(hl, hw), corner(-hl, hw)});
  }

  const std::vector<Vec2> & vertices() const { return vertices_; }

  // Boundary-inclusive containment.
  bool contains(const Vec2 & p) const
  {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 & a = vertices_[i];
      const Vec2 & b = vertices_[(i + 1) % n];
      if (cross(b - a, p - a) < -1e-12) {
        return false;
      }
    }
    return true;
  }

  // Separating-axis test; touching polygons count as intersecting.
  bool intersects(const ConvexPolygon & other) const
  {
    return !separated_by_edges(*this, other) && !separated_by_edges(other, *this);
  }

  Aabb bounding_box() const
  {
    Aabb box{{vertices_[0].x, vertices_[0].x}, {vertices_[0].y, vertices_[0].y}};
    for (const Vec2 & v : vertices_) {
      box.x.lo = std::min(box.x.lo, v.x);
      box.x.hi = std::max(box.x.hi, v.x);
      box.y.lo = std::min(box.y.lo, v.y);
      box.y.hi = std::max(box.y.hi, v.y);
    }
    return box;
  }

  Vec2 centroid() const
  {
    Vec2 c{0.0, 0.0};
    for (const Vec2 & v : vertices_) {
      c = c + v;
    }
    return (1.0 / static_cast<double>(vertices_.size())) * c;
  }

private:
  static double signed_area(const std::vector<Vec2> & pts)
  {
    double a = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2 & p = pts[i];
      const Vec2 & q = pts[(i + 1) % pts.size()];
      a += cross(p, q);
    }
    return 0.5 * a;
  }

  static bool separated_by_edges(const ConvexPolygon & edges_of, const ConvexPolygon & other)
  {
    const auto & va = edges_of.vertices_;
    const std::size_t n = va.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 axis = left_normal(va[(i + 1) % n] - va[i]);
      double a_min = std::numeric_limits<double>::infinity();
      double a_max = -a_min;
      for (const Vec2 & v : va) {
        const double p = dot(axis, v);
        a_min = std::min(a_min, p);
        a_max = std::max(a_max, p);
      }
      double b_min = std::numeric_limits<double>::infinity();
      double b_max = -b_min;
      for (const Vec2 & v : other.vertices_) {
        const double p = dot(axis, v);
        b_min = std::min(b_min, p);
        b_max = std::max(b_max, p);
      }
      if (a_max < b_min - 1e-12 || b_max < a_min - 1e-12) {
        return true;
      }
    }
    return false;
  }

  std::vector<Vec2> vertices_;
};

struct CurvilinearPos {
  double s{0.0};
  double d{0.0};
};

/// Curvilinear frame along a polyline reference path. Lateral offsets are
/// measured along miter normals (averaged at interior vertices) so that
/// project() and to_world() are exact inverses of each other for any point
/// whose lateral offset stays below the local radius of curvature.
class CurvilinearFrame {
public:
  explicit CurvilinearFrame(std::vector<Vec2> points) : pts_(std::move(points))
  {
    if (pts_.size() < 2) {
      throw std::invalid_argument("reference path needs at least 2 points");
    }
    arclen_.resize(pts_.size());
    arclen_[0] = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      const double seg = norm(pts_[i] - pts_[i - 1]);
      if (seg < 1e-9) {
        throw std::invalid_argument("reference path has duplicate consecutive points");
      }
      arclen_[i] = arclen_[i - 1] + seg;
    }
    normals_.resize(pts_.size());
    normals_.front() = left_normal(pts_[1] - pts_[0]);
    normals_.back() = left_normal(pts_.back() - pts_[pts_.size() - 2]);
    for (std::size_t i = 1; i + 1 < pts_.size(); ++i) {
      const Vec2 n_prev = left_normal(pts_[i] - pts_[i - 1]);
      const Vec2 n_next = left_normal(pts_[i + 1] - pts_[i]);
      normals_[i] = normalized(n_prev + n_next);
    }
  }

  double length() const { return arclen_.back(); }
  const std::vector<Vec2> & points() const { return pts_; }
  const std::vector<double> & arclengths() const { return arclen_; }

  /// Nearest-point projection. Returns nullopt when the lateral distance
  /// exceeds max_lateral. Ties are broken toward the smaller arclength.
  std::optional<CurvilinearPos> project(const Vec2 & p, double max_lateral) const
  {
    bool found = false;
    CurvilinearPos best{};
    double best_err = std::numeric_limits<double>::infinity();
    double best_abs_d = std::numeric_limits<double>::infinity();

    auto consider = [&](double s, double d) {
      const double err = norm(p - to_world(s, d));
      constexpr double kTol = 1e-9;
      const bool better = err < best_err - kTol ||
                          (err < best_err + kTol && std::abs(d) < best_abs_d - kTol) ||
                          (err < best_err + kTol && std::abs(d) < best_abs_d + kTol &&
                           found && s < best.s);
      if (!found || better) {
        found = true;
        best = {s, d};
        best_err = err;
        best_abs_d = std::abs(d);
      }
    };

    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
      const Vec2 e = pts_[i + 1] - pts_[i];
      const double seg_len = arclen_[i + 1] - arclen_[i];
      const Vec2 w = p - pts_[i];
      const Vec2 dn = normals_[i + 1] - normals_[i];
      // Solve cross(w - t*e, n(t)) = 0 with n(t) = n_i + t*(n_{i+1} - n_i).
      const double qa = -cross(e, dn);
      const double qb = cross(w, dn) - cross(e, normals_[i]);
      const double qc = cross(w, normals_[i]);
      for (double t : solve_quadratic(qa, qb, qc)) {
        if (t < -1e-9 || t > 1.0 + 1e-9) {
          continue;
        }
        t = std::clamp(t, 0.0, 1.0);
        const Vec2 n = interp_normal(i, t);
        const double d = dot(w - t * e, n);
        consider(arclen_[i] + t * seg_len, d);
      }
    }
    // End caps: orthogonal projection onto the first/last segment, clamped.
    {
      const Vec2 e0 = pts_[1] - pts_[0];
      if (dot(p - pts_[0], e0) < 0.0) {
        consider(0.0, dot(p - pts_[0], normals_.front()));
      }
      const std::size_t m = pts_.size();
      const Vec2 e1 = pts_[m - 1] - pts_[m - 2];
      if (dot(p - pts_[m - 1], e1) > 0.0) {
        consider(length(), dot(p - pts_[m - 1], normals_.back()));
      }
    }
    if (!found || best_abs_d > max_lateral) {
      return std::nullopt;
    }
    return best;
  }

  Vec2 to_world(double s, double d) const
  {
    s = std::clamp(s, 0.0, length());
    const std::size_t i = segment_index(s);
    const double seg_len = arclen_[i + 1] - arclen_[i];
    const double t = (s - arclen_[i]) / seg_len;
    const Vec2 base = pts_[i] + t * (pts_[i + 1] - pts_[i]);
    return base + d * interp_normal(i, t);
  }

  /// Unit tangent of the reference path at arclength s.
  Vec2 tangent(double s) const
  {
    s = std::clamp(s, 0.0, length());
    const std::size_t i = segment_index(s);
    return normalized(pts_[i + 1] - pts_[i]);
  }

  double heading(double s) const
  {
    const Vec2 t = tangent(s);
    return std::atan2(t.y, t.x);
  }

private:
  std::size_t segment_index(double s) const
  {
    const auto it = std::upper_bound(arclen_.begin(), arclen_.end(), s);
    const std::size_t i = static_cast<std::size_t>(std::distance(arclen_.begin(), it));
    return std::min(std::max<std::size_t>(i, 1) - 1, pts_.size() - 2);
  }

  Vec2 interp_normal(std::size_t segment, double t) const
  {
    return normalized((1.0 - t) * normals_[segment] + t * normals_[segment + 1]);
  }

  static std::vector<double> solve_quadratic(double a, double b, double c)
  {
    std::vector<double> roots;
    if (std::abs(a) < 1e-14) {
      if (std::abs(b) > 1e-14) {
        roots.push_back(-c / b);
      }
      return roots;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
      return roots;
    }
    const double sq = std::sqrt(disc);
    // Numerically stable split of the two roots.
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    roots.push_back(q / a);
    if (std::abs(q) > 1e-14) {
      roots.push_back(c / q);
    } else {
      roots.push_back(0.0);
    }
    return roots;
  }

  std::vector<Vec2> pts_;
  std::vector<double> arclen_;
  std::vector<Vec2> normals_;
};

}  // namespace veridrive
