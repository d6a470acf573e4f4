// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wavepacket {

inline constexpr double kPi = std::numbers::pi;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Violated precondition on arguments.
struct PreconditionError : Error {
  using Error::Error;
};
// Query outside the enumerated or representable range.
struct RangeError : Error {
  using Error::Error;
};
// Malformed serialized data.
struct FormatError : Error {
  using Error::Error;
};
// Geometry configuration the exact tests do not handle.
struct GeometryError : Error {
  using Error::Error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Mat2 identity() { return {}; }
  static Mat2 diag(double x, double y) { return {x, 0.0, 0.0, y}; }
  static Mat2 rotation(double t) {
    const double cs = std::cos(t), sn = std::sin(t);
    return {cs, -sn, sn, cs};
  }

  double det() const { return a * d - b * c; }
  Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 inverse() const {
    const double dt = det();
    if (dt == 0.0 || !std::isfinite(dt)) throw PreconditionError("singular 2x2 matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  // Largest singular value.
  double op_norm() const {
    const double s = a * a + b * b + c * c + d * d;
    const double dt = det();
    const double disc = std::max(0.0, s * s - 4.0 * dt * dt);
    return std::sqrt(0.5 * (s + std::sqrt(disc)));
  }
  // Smallest singular value.
  double min_singular() const {
    const double mx = op_norm();
    return mx == 0.0 ? 0.0 : std::abs(det()) / mx;
  }

  friend Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
  }
  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
            m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
  }
  friend Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }
};

// xi -> t * xi + b
struct AffineMap2 {
  Mat2 t;
  Vec2 b;

  Vec2 apply(Vec2 x) const { return t * x + b; }
  AffineMap2 inverse() const {
    const Mat2 ti = t.inverse();
    return {ti, -(ti * b)};
  }
  // (this o other)(x) = this(other(x))
  AffineMap2 compose(const AffineMap2& other) const {
    return {t * other.t, t * other.b + b};
  }
};

inline double pow2(double e) { return std::exp2(e); }

}  // namespace wavepacket
