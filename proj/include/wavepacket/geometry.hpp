// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <variant>

#include "wavepacket/core.hpp"

namespace wavepacket {

// Base sets in reference coordinates. The outer set of a patch is open,
// the inner set closed.
struct Rect {
  double x0, x1, y0, y1;
};
struct Disc {
  double r;
};
struct Annulus {
  double r0, r1;
};
using Shape = std::variant<Rect, Disc, Annulus>;

enum class Membership { Open, Closed };

inline bool shape_contains(const Shape& s, Vec2 u, Membership mode) {
  const bool open = mode == Membership::Open;
  if (const auto* r = std::get_if<Rect>(&s)) {
    return open ? (u.x > r->x0 && u.x < r->x1 && u.y > r->y0 && u.y < r->y1)
                : (u.x >= r->x0 && u.x <= r->x1 && u.y >= r->y0 && u.y <= r->y1);
  }
  const double rr = u.x * u.x + u.y * u.y;
  if (const auto* d = std::get_if<Disc>(&s)) {
    return open ? rr < d->r * d->r : rr <= d->r * d->r;
  }
  const auto& a = std::get<Annulus>(s);
  return open ? (rr > a.r0 * a.r0 && rr < a.r1 * a.r1)
              : (rr >= a.r0 * a.r0 && rr <= a.r1 * a.r1);
}

inline Vec2 shape_center(const Shape& s) {
  if (const auto* r = std::get_if<Rect>(&s)) {
    return {0.5 * (r->x0 + r->x1), 0.5 * (r->y0 + r->y1)};
  }
  return {0.0, 0.0};
}

// Radius of a disc about shape_center containing the shape.
inline double shape_radius(const Shape& s) {
  if (const auto* r = std::get_if<Rect>(&s)) {
    return 0.5 * std::hypot(r->x1 - r->x0, r->y1 - r->y0);
  }
  if (const auto* d = std::get_if<Disc>(&s)) return d->r;
  return std::get<Annulus>(s).r1;
}

inline double shape_area(const Shape& s) {
  if (const auto* r = std::get_if<Rect>(&s)) return (r->x1 - r->x0) * (r->y1 - r->y0);
  if (const auto* d = std::get_if<Disc>(&s)) return kPi * d->r * d->r;
  const auto& a = std::get<Annulus>(s);
  return kPi * (a.r1 * a.r1 - a.r0 * a.r0);
}

using Quad = std::array<Vec2, 4>;

inline Quad rect_vertices(const Rect& r, const AffineMap2& m) {
  return {m.apply({r.x0, r.y0}), m.apply({r.x1, r.y0}), m.apply({r.x1, r.y1}),
          m.apply({r.x0, r.y1})};
}

struct Box {
  double x0, x1, y0, y1;
};

inline Box bounding_box(const Shape& s, const AffineMap2& m) {
  if (const auto* r = std::get_if<Rect>(&s)) {
    const Quad q = rect_vertices(*r, m);
    Box b{q[0].x, q[0].x, q[0].y, q[0].y};
    for (const Vec2& v : q) {
      b.x0 = std::min(b.x0, v.x);
      b.x1 = std::max(b.x1, v.x);
      b.y0 = std::min(b.y0, v.y);
      b.y1 = std::max(b.y1, v.y);
    }
    return b;
  }
  const double rad = shape_radius(s);
  const double ex = rad * std::hypot(m.t.a, m.t.b);
  const double ey = rad * std::hypot(m.t.c, m.t.d);
  return {m.b.x - ex, m.b.x + ex, m.b.y - ey, m.b.y + ey};
}

namespace detail {

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

// Distance from p to the closed convex quadrilateral q (either orientation).
inline double point_quad_distance(Vec2 p, const Quad& q) {
  bool pos = true, neg = true;
  for (int k = 0; k < 4; ++k) {
    const double c = cross(q[(k + 1) % 4] - q[k], p - q[k]);
    pos = pos && c >= 0.0;
    neg = neg && c <= 0.0;
  }
  if (pos || neg) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    best = std::min(best, point_segment_distance(p, q[k], q[(k + 1) % 4]));
  }
  return best;
}

inline double max_vertex_norm(const Quad& q) {
  double m = 0.0;
  for (const Vec2& v : q) m = std::max(m, norm(v));
  return m;
}

// Strict separating-axis test for two open convex quadrilaterals.
inline bool quads_overlap(const Quad& p, const Quad& q) {
  auto separated_on = [&](Vec2 axis) {
    double pmin = dot(axis, p[0]), pmax = pmin, qmin = dot(axis, q[0]), qmax = qmin;
    for (int k = 1; k < 4; ++k) {
      const double a = dot(axis, p[k]), b = dot(axis, q[k]);
      pmin = std::min(pmin, a);
      pmax = std::max(pmax, a);
      qmin = std::min(qmin, b);
      qmax = std::max(qmax, b);
    }
    return pmax <= qmin || qmax <= pmin;
  };
  for (const Quad* poly : {&p, &q}) {
    for (int k = 0; k < 4; ++k) {
      const Vec2 e = (*poly)[(k + 1) % 4] - (*poly)[k];
      if (separated_on({-e.y, e.x})) return false;
    }
  }
  return true;
}

inline bool is_similarity(const Mat2& m) {
  const double scale = std::max(1.0, m.op_norm());
  const double tol = 1e-13 * scale;
  return (std::abs(m.a - m.d) <= tol && std::abs(m.b + m.c) <= tol) ||
         (std::abs(m.a + m.d) <= tol && std::abs(m.b - m.c) <= tol);
}

// Extremes of |c + L u| over the circle |u| = r.
inline std::pair<double, double> ellipse_boundary_norm_range(Vec2 c, const Mat2& l, double r) {
  auto f = [&](double t) { return norm(c + r * (l * Vec2{std::cos(t), std::sin(t)})); };
  constexpr int kSamples = 720;
  double best_min = std::numeric_limits<double>::infinity(), best_max = 0.0;
  int imin = 0, imax = 0;
  for (int k = 0; k < kSamples; ++k) {
    const double v = f(2.0 * kPi * k / kSamples);
    if (v < best_min) best_min = v, imin = k;
    if (v > best_max) best_max = v, imax = k;
  }
  auto refine = [&](int k, bool minimize) {
    const double h = 2.0 * kPi / kSamples;
    double lo = (k - 1) * h, hi = (k + 1) * h;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
      const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
      const double v1 = f(m1), v2 = f(m2);
      if ((v1 < v2) == minimize) hi = m2; else lo = m1;
    }
    return f(0.5 * (lo + hi));
  };
  return {std::min(best_min, refine(imin, true)), std::max(best_max, refine(imax, false))};
}

// Distance range from the origin to the open set m(Disc r).
inline std::pair<double, double> disc_image_norm_range(const AffineMap2& m, double r) {
  if (is_similarity(m.t)) {
    const double rho = r * m.t.op_norm(), d = norm(m.b);
    return {std::max(0.0, d - rho), d + rho};
  }
  auto [lo, hi] = ellipse_boundary_norm_range(m.b, m.t, r);
  const Vec2 pre = m.t.inverse() * (-m.b);
  if (norm(pre) < r) lo = 0.0;
  return {lo, hi};
}

// Does the open set mb(Shape b) meet the open base set a at the origin frame?
inline bool base_meets_image(const Shape& a, const Shape& b, const AffineMap2& m);

inline bool annulus_meets(const Annulus& an, double dmin, double dmax) {
  return dmin < an.r1 && dmax > an.r0;
}

inline bool base_meets_image(const Shape& a, const Shape& b, const AffineMap2& m) {
  if (const auto* ra = std::get_if<Rect>(&a)) {
    const AffineMap2 id{Mat2::identity(), {0.0, 0.0}};
    if (const auto* rb = std::get_if<Rect>(&b)) {
      return quads_overlap(rect_vertices(*ra, id), rect_vertices(*rb, m));
    }
    // Pull the rectangle into the frame of the round set.
    return base_meets_image(b, a, m.inverse());
  }
  if (const auto* da = std::get_if<Disc>(&a)) {
    if (const auto* rb = std::get_if<Rect>(&b)) {
      return point_quad_distance({0.0, 0.0}, rect_vertices(*rb, m)) < da->r;
    }
    if (const auto* db = std::get_if<Disc>(&b)) {
      return disc_image_norm_range(m, db->r).first < da->r;
    }
    return base_meets_image(b, a, m.inverse());
  }
  const auto& an = std::get<Annulus>(a);
  if (const auto* rb = std::get_if<Rect>(&b)) {
    const Quad q = rect_vertices(*rb, m);
    return annulus_meets(an, point_quad_distance({0.0, 0.0}, q), max_vertex_norm(q));
  }
  if (const auto* db = std::get_if<Disc>(&b)) {
    auto [lo, hi] = disc_image_norm_range(m, db->r);
    return annulus_meets(an, lo, hi);
  }
  const auto& bn = std::get<Annulus>(b);
  if (!is_similarity(m.t) || norm(m.b) > 1e-12 * std::max(1.0, bn.r1 * m.t.op_norm())) {
    throw GeometryError("annulus intersection requires concentric similar annuli");
  }
  const double s = m.t.op_norm();
  return bn.r0 * s < an.r1 && bn.r1 * s > an.r0;
}

}  // namespace detail

// Exact test whether ma(sa) and mb(sb), both open, intersect.
inline bool sets_intersect(const Shape& sa, const AffineMap2& ma, const Shape& sb,
                           const AffineMap2& mb) {
  return detail::base_meets_image(sa, sb, ma.inverse().compose(mb));
}

}  // namespace wavepacket
