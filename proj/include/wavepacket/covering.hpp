// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wavepacket/core.hpp"
#include "wavepacket/geometry.hpp"

namespace wavepacket {

struct CoveringSpec {
  double alpha = 1.0;
  double beta = 1.0;
  double epsilon = 1.0 / 64.0;
  int n_const = 10;

  bool conformant() const { return n_const == 10; }

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw PreconditionError("alpha must lie in [0,1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("beta must lie in [0,1]");
    if (beta > alpha) throw PreconditionError("beta must not exceed alpha");
    if (!(epsilon > 0.0 && epsilon < 1.0 / 32.0)) {
      throw PreconditionError("epsilon must lie in (0, 1/32)");
    }
    if (n_const < 1) throw PreconditionError("n_const must be positive");
  }
};

// Zero is encoded as j == 0.
struct WPIndex {
  int j = 0;
  int m = 0;
  int l = 0;

  static WPIndex zero() { return {}; }
  bool is_zero() const { return j == 0; }
  friend constexpr auto operator<=>(const WPIndex&, const WPIndex&) = default;
};

inline std::string to_string(const WPIndex& i) {
  if (i.is_zero()) return "0";
  return "(" + std::to_string(i.j) + "," + std::to_string(i.m) + "," + std::to_string(i.l) + ")";
}

namespace detail {

// ceil(scale * 2^e), exact when e is an integer.
inline std::int64_t ceil_scaled_pow2(double scale, double e) {
  const double r = std::round(e);
  if (std::abs(e - r) <= 1e-9 * std::max(1.0, std::abs(e))) {
    return static_cast<std::int64_t>(std::ceil(std::ldexp(scale, static_cast<int>(r))));
  }
  return static_cast<std::int64_t>(std::ceil(scale * std::exp2(e)));
}

}  // namespace detail

inline int max_m(int j, const CoveringSpec& sp) {
  if (j < 1) throw PreconditionError("max_m requires j >= 1");
  return static_cast<int>(detail::ceil_scaled_pow2(1.0, (1.0 - sp.alpha) * j - 1.0));
}

inline int max_ell(int j, const CoveringSpec& sp) {
  if (j < 1) throw PreconditionError("max_ell requires j >= 1");
  return static_cast<int>(detail::ceil_scaled_pow2(sp.n_const, (1.0 - sp.beta) * j));
}

inline std::vector<WPIndex> enumerate_indices(const CoveringSpec& sp, int j_max) {
  sp.validate();
  if (j_max < 1) throw PreconditionError("j_max must be >= 1");
  std::vector<WPIndex> out{WPIndex::zero()};
  for (int j = 1; j <= j_max; ++j) {
    const int mm = max_m(j, sp), lm = max_ell(j, sp);
    for (int m = 0; m <= mm; ++m)
      for (int l = 0; l <= lm; ++l) out.push_back({j, m, l});
  }
  return out;
}

inline bool index_valid(const WPIndex& i, const CoveringSpec& sp) {
  if (i.is_zero()) return i.m == 0 && i.l == 0;
  return i.j >= 1 && i.m >= 0 && i.l >= 0 && i.m <= max_m(i.j, sp) && i.l <= max_ell(i.j, sp);
}

inline double phi_j(int j, const CoveringSpec& sp) {
  return kPi / sp.n_const * std::exp2((sp.beta - 1.0) * j);
}

inline double theta_jl(int j, int l, const CoveringSpec& sp) { return 2.0 * l * phi_j(j, sp); }

inline AffineMap2 affine_map(const WPIndex& i, const CoveringSpec& sp) {
  if (!index_valid(i, sp)) throw RangeError("index " + to_string(i) + " out of range");
  if (i.is_zero()) return {};
  const Mat2 rot = Mat2::rotation(theta_jl(i.j, i.l, sp));
  const Mat2 a = Mat2::diag(std::exp2(sp.alpha * i.j), std::exp2(sp.beta * i.j));
  const Vec2 c{std::exp2(i.j - 1.0) + i.m * std::exp2(sp.alpha * i.j), 0.0};
  return {rot * a, rot * c};
}

inline Rect base_outer(const CoveringSpec& sp) {
  const double e = sp.epsilon;
  return {-e, 1.0 + e, -1.0 - e, 1.0 + e};
}
inline Rect base_inner() { return {0.0, 1.0, -1.0, 1.0}; }

inline constexpr double kLowpassOuter = 4.0;
inline constexpr double kLowpassInner = 3.0;

enum class Which { Outer, Inner };

inline bool contains(const WPIndex& i, Vec2 xi, const CoveringSpec& sp, Which which) {
  const Vec2 u = affine_map(i, sp).inverse().apply(xi);
  if (i.is_zero()) {
    return which == Which::Outer ? shape_contains(Disc{kLowpassOuter}, u, Membership::Open)
                                 : shape_contains(Disc{kLowpassInner}, u, Membership::Closed);
  }
  return which == Which::Outer ? shape_contains(base_outer(sp), u, Membership::Open)
                               : shape_contains(base_inner(), u, Membership::Closed);
}

inline Shape outer_shape(const WPIndex& i, const CoveringSpec& sp) {
  return i.is_zero() ? Shape{Disc{kLowpassOuter}} : Shape{base_outer(sp)};
}
inline Shape inner_shape(const WPIndex& i) {
  return i.is_zero() ? Shape{Disc{kLowpassInner}} : Shape{base_inner()};
}

inline bool intersects(const WPIndex& i, const CoveringSpec& si, const WPIndex& k,
                       const CoveringSpec& sk) {
  return sets_intersect(outer_shape(i, si), affine_map(i, si), outer_shape(k, sk),
                        affine_map(k, sk));
}

struct RadialBounds {
  double lo, hi;
};

inline RadialBounds norm_bounds(const WPIndex& i, const CoveringSpec& sp) {
  if (i.is_zero()) throw PreconditionError("norm_bounds requires a triple index");
  const double a = std::exp2(sp.alpha * i.j), off = std::exp2(i.j - 1.0), e = sp.epsilon;
  return {off + a * (i.m - e), off + a * (i.m + 2.0 + 2.0 * e)};
}

struct AngleBounds {
  double theta_center, half_width;
};

inline AngleBounds angle_bound(const WPIndex& i, const CoveringSpec& sp) {
  if (i.is_zero()) throw PreconditionError("angle_bound requires a triple index");
  return {theta_jl(i.j, i.l, sp), 4.0 * (1.0 + sp.epsilon) * std::exp2((sp.beta - 1.0) * i.j)};
}

inline double transition_norm(const WPIndex& i, const CoveringSpec& si, const WPIndex& k,
                              const CoveringSpec& sk) {
  return (affine_map(i, si).t.inverse() * affine_map(k, sk).t).op_norm();
}

inline double weight(const WPIndex& i, double s) {
  return i.is_zero() ? 1.0 : std::exp2(i.j * s);
}

// ---------------------------------------------------------------------------
// Covering providers

struct Patch {
  std::array<int, 3> key{};  // provider specific label
  bool lowpass = false;
  int level = 0;             // j, n, or a dyadic level for alpha-modulation
  AffineMap2 map;
  Shape outer;
  Shape inner;
  Vec2 center;               // center of the bounding circle
  double radius = 0.0;       // radius of the bounding circle
};

inline Patch make_patch(std::array<int, 3> key, bool lowpass, int level, const AffineMap2& map,
                        Shape outer, Shape inner) {
  Patch p{key, lowpass, level, map, outer, inner, {}, 0.0};
  p.center = map.apply(shape_center(outer));
  p.radius = map.t.op_norm() * shape_radius(outer);
  return p;
}

inline bool patch_contains(const Patch& p, Vec2 xi, Which which) {
  const Vec2 u = p.map.inverse().apply(xi);
  return which == Which::Outer ? shape_contains(p.outer, u, Membership::Open)
                               : shape_contains(p.inner, u, Membership::Closed);
}

inline bool patches_intersect(const Patch& a, const Patch& b) {
  if (norm(a.center - b.center) >= a.radius + b.radius) return false;
  return sets_intersect(a.outer, a.map, b.outer, b.map);
}

class Covering {
 public:
  virtual ~Covering() = default;

  virtual std::string name() const = 0;
  // Indices of all patches that may meet the open disc B_radius(center); a superset.
  virtual std::vector<std::size_t> candidates(Vec2 center, double radius) const = 0;
  // Radius of the disc on which the truncated covering is complete.
  virtual double safe_radius() const = 0;
  virtual double weight(const Patch& p, double s) const = 0;

  const std::vector<Patch>& patches() const { return patches_; }
  std::size_t size() const { return patches_.size(); }
  const Patch& patch(std::size_t k) const { return patches_.at(k); }

  std::vector<std::size_t> neighbors(std::size_t k) const {
    const Patch& p = patch(k);
    std::vector<std::size_t> out;
    for (std::size_t c : candidates(p.center, p.radius)) {
      if (patches_intersect(p, patches_[c])) out.push_back(c);
    }
    return out;
  }

  std::vector<std::size_t> neighbors_full_scan(std::size_t k) const {
    const Patch& p = patch(k);
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < patches_.size(); ++c) {
      if (patches_intersect(p, patches_[c])) out.push_back(c);
    }
    return out;
  }

  std::optional<std::size_t> first_containing(Vec2 xi, Which which) const {
    for (std::size_t c : candidates(xi, 0.0)) {
      if (patch_contains(patches_[c], xi, which)) return c;
    }
    return std::nullopt;
  }

 protected:
  std::vector<Patch> patches_;
};

namespace detail {

inline void append_range(std::vector<std::size_t>& out, std::size_t base, int lo, int hi) {
  for (int v = lo; v <= hi; ++v) out.push_back(base + static_cast<std::size_t>(v));
}

inline constexpr double kSlack = 1e-9;

}  // namespace detail

class WavePacketCovering final : public Covering {
 public:
  WavePacketCovering(CoveringSpec spec, int j_max) : spec_(spec), j_max_(j_max) {
    spec_.validate();
    if (j_max < 1) throw PreconditionError("j_max must be >= 1");
    offsets_.assign(j_max + 2, 0);
    std::size_t pos = 1;
    for (int j = 1; j <= j_max; ++j) {
      offsets_[j] = pos;
      pos += static_cast<std::size_t>(max_m(j, spec_) + 1) * (max_ell(j, spec_) + 1);
    }
    offsets_[j_max + 1] = pos;
    patches_.reserve(pos);
    for (const WPIndex& i : enumerate_indices(spec_, j_max)) {
      patches_.push_back(make_patch({i.j, i.m, i.l}, i.is_zero(), i.j, affine_map(i, spec_),
                                    outer_shape(i, spec_), inner_shape(i)));
    }
  }

  std::string name() const override { return "wavepacket"; }
  const CoveringSpec& spec() const { return spec_; }
  int j_max() const { return j_max_; }
  double safe_radius() const override { return std::exp2(j_max_ - 1.0); }
  double weight(const Patch& p, double s) const override {
    return p.lowpass ? 1.0 : std::exp2(p.level * s);
  }

  WPIndex index(std::size_t k) const {
    const Patch& p = patch(k);
    return {p.key[0], p.key[1], p.key[2]};
  }
  std::size_t position(const WPIndex& i) const {
    if (i.is_zero()) return 0;
    if (i.j > j_max_ || !index_valid(i, spec_)) throw RangeError("index outside truncation");
    return offsets_[i.j] + static_cast<std::size_t>(i.m) * (max_ell(i.j, spec_) + 1) + i.l;
  }

  std::vector<std::size_t> candidates(Vec2 center, double radius) const override {
    std::vector<std::size_t> out;
    const double r = norm(center);
    const double rlo = std::max(0.0, r - radius), rhi = r + radius;
    if (rlo < kLowpassOuter * (1.0 + detail::kSlack)) out.push_back(0);
    const double eps = spec_.epsilon;
    for (int j = 1; j <= j_max_; ++j) {
      if (std::exp2(j + 3.0) <= rlo * (1.0 - detail::kSlack)) continue;
      if (std::exp2(j - 2.0) >= rhi * (1.0 + detail::kSlack) + detail::kSlack) continue;
      const double a = std::exp2(spec_.alpha * j), off = std::exp2(j - 1.0);
      const int mm = max_m(j, spec_), lm = max_ell(j, spec_);
      const int m_lo = std::max(0, static_cast<int>(std::ceil((rlo - off) / a - 2.0 - 2.0 * eps - 1e-6)));
      const int m_hi = std::min(mm, static_cast<int>(std::floor((rhi - off) / a + eps + 1e-6)));
      if (m_lo > m_hi) continue;
      const std::vector<std::pair<int, int>> ells = ell_windows(j, lm, center, r, radius);
      for (int m = m_lo; m <= m_hi; ++m) {
        const std::size_t base = offsets_[j] + static_cast<std::size_t>(m) * (lm + 1);
        for (auto [lo, hi] : ells) detail::append_range(out, base, lo, hi);
      }
    }
    return out;
  }

 private:
  std::vector<std::pair<int, int>> ell_windows(int j, int lm, Vec2 center, double r,
                                               double radius) const {
    if (radius >= r * (1.0 - 1e-9)) return {{0, lm}};
    const double w = std::asin(std::min(1.0, radius / r)) +
                     4.0 * (1.0 + spec_.epsilon) * std::exp2((spec_.beta - 1.0) * j) + 1e-9;
    if (w >= kPi) return {{0, lm}};
    double phi = std::atan2(center.y, center.x);
    if (phi < 0.0) phi += 2.0 * kPi;
    const double step = 2.0 * phi_j(j, spec_);
    std::vector<char> hit(lm + 1, 0);
    for (int t = -1; t <= 2; ++t) {
      const double c = phi + 2.0 * kPi * t;
      const int lo = std::max(0, static_cast<int>(std::ceil((c - w) / step - 1e-9)));
      const int hi = std::min(lm, static_cast<int>(std::floor((c + w) / step + 1e-9)));
      for (int l = lo; l <= hi; ++l) hit[l] = 1;
    }
    std::vector<std::pair<int, int>> out;
    for (int l = 0; l <= lm; ++l) {
      if (!hit[l]) continue;
      int e = l;
      while (e + 1 <= lm && hit[e + 1]) ++e;
      out.emplace_back(l, e);
      l = e;
    }
    return out;
  }

  CoveringSpec spec_;
  int j_max_;
  std::vector<std::size_t> offsets_;
};

// Inhomogeneous dyadic covering: B_0 = B_4, B_n = annulus (2^{n-2}, 2^{n+2}).
class BesovCovering final : public Covering {
 public:
  explicit BesovCovering(int n_max) : n_max_(n_max) {
    if (n_max < 1) throw PreconditionError("n_max must be >= 1");
    patches_.push_back(make_patch({0, 0, 0}, true, 0, {}, Disc{4.0}, Disc{3.0}));
    for (int n = 1; n <= n_max; ++n) {
      const AffineMap2 m{Mat2::diag(std::exp2(n), std::exp2(n)), {0.0, 0.0}};
      patches_.push_back(make_patch({n, 0, 0}, false, n, m, Annulus{0.25, 4.0}, Annulus{0.5, 2.0}));
    }
  }

  std::string name() const override { return "besov"; }
  int n_max() const { return n_max_; }
  double safe_radius() const override { return std::exp2(n_max_ - 1.0); }
  double weight(const Patch& p, double s) const override { return std::exp2(p.level * s); }

  std::vector<std::size_t> candidates(Vec2 center, double radius) const override {
    const double r = norm(center);
    const double rlo = std::max(0.0, r - radius), rhi = r + radius;
    std::vector<std::size_t> out;
    if (rlo < 4.0 * (1.0 + detail::kSlack)) out.push_back(0);
    for (int n = 1; n <= n_max_; ++n) {
      if (std::exp2(n - 2.0) < rhi * (1.0 + detail::kSlack) + detail::kSlack &&
          std::exp2(n + 2.0) > rlo * (1.0 - detail::kSlack)) {
        out.push_back(static_cast<std::size_t>(n));
      }
    }
    return out;
  }

 private:
  int n_max_;
};

// Balls of radius r|k|^{a0} centered at |k|^{a0} k, k in Z^2 \ {0}, a0 = alpha/(1-alpha).
class AlphaModulationCovering final : public Covering {
 public:
  // Default inner radius: half the diagonal of the image of a unit cell plus a margin.
  static double default_inner_radius(double alpha) {
    const double a0 = alpha / (1.0 - alpha);
    return std::max(1.25, 0.5 * std::hypot(1.0 + a0, 1.0) + 0.25);
  }

  AlphaModulationCovering(double alpha, int j_max, double inner_radius = 0.0)
      : alpha_(alpha), j_max_(j_max) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
      throw PreconditionError("alpha-modulation covering requires alpha in [0,1)");
    }
    if (j_max < 1) throw PreconditionError("j_max must be >= 1");
    a0_ = alpha / (1.0 - alpha);
    r_in_ = inner_radius > 0.0 ? inner_radius : default_inner_radius(alpha);
    r_out_ = 4.0 / 3.0 * r_in_;
    // Keep every patch that reaches into the safe disc.
    const double safe = safe_radius();
    kmax_ = 1;
    while (std::pow(kmax_, 1.0 + a0_) - r_out_ * std::pow(kmax_, a0_) < safe) ++kmax_;
    grid_.assign(static_cast<std::size_t>(2 * kmax_ + 1) * (2 * kmax_ + 1), kNone);
    for (int k1 = -kmax_; k1 <= kmax_; ++k1) {
      for (int k2 = -kmax_; k2 <= kmax_; ++k2) {
        if (k1 == 0 && k2 == 0) continue;
        const double kn = std::hypot(k1, k2);
        const double sc = std::pow(kn, a0_);
        if (kn * sc - r_out_ * sc >= safe) continue;
        const AffineMap2 m{Mat2::diag(sc, sc), {sc * k1, sc * k2}};
        const int level = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 + kn * sc))));
        grid_[slot(k1, k2)] = patches_.size();
        patches_.push_back(make_patch({k1, k2, 0}, false, level, m, Disc{r_out_}, Disc{r_in_}));
      }
    }
  }

  std::string name() const override { return "alpha-modulation"; }
  double alpha() const { return alpha_; }
  double inner_radius() const { return r_in_; }
  double outer_radius() const { return r_out_; }
  double safe_radius() const override { return std::exp2(j_max_ - 1.0); }
  double weight(const Patch& p, double s) const override {
    const double k2 = double(p.key[0]) * p.key[0] + double(p.key[1]) * p.key[1];
    return std::pow(1.0 + k2, s / (2.0 * (1.0 - alpha_)));
  }

  std::vector<std::size_t> candidates(Vec2 center, double radius) const override {
    const double r = norm(center);
    // |k| range from the radial extent of the balls.
    auto outer_reach = [&](double t) { return std::pow(t, 1.0 + a0_) - r_out_ * std::pow(t, a0_); };
    auto inner_reach = [&](double t) { return std::pow(t, 1.0 + a0_) + r_out_ * std::pow(t, a0_); };
    double tmin = 0.0;
    {
      double lo = 0.0, hi = kmax_ + 1.0;
      if (inner_reach(hi) <= r - radius) return {};
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (inner_reach(mid) <= r - radius ? lo : hi) = mid;
      }
      tmin = lo;
    }
    double tmax = kmax_;
    {
      double lo = 0.0, hi = kmax_ + 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (outer_reach(mid) < r + radius ? lo : hi) = mid;
      }
      tmax = std::min<double>(kmax_, hi);
    }
    tmin = std::max(0.0, tmin - 1e-6);
    tmax += 1e-6;
    const double reach = radius + r_out_ * std::pow(tmax, a0_);
    const bool all_angles = reach >= r;
    const double half = all_angles ? kPi : std::asin(reach / r) + 1e-9;
    const double phi = std::atan2(center.y, center.x);
    std::vector<std::size_t> out;
    const int kt = static_cast<int>(std::floor(tmax));
    for (int k1 = -kt; k1 <= kt; ++k1) {
      const double rem_hi = tmax * tmax - double(k1) * k1;
      if (rem_hi < 0.0) continue;
      const int k2m = static_cast<int>(std::floor(std::sqrt(rem_hi)));
      for (int k2 = -k2m; k2 <= k2m; ++k2) {
        const double kn = std::hypot(k1, k2);
        if (kn < tmin || kn == 0.0) continue;
        if (!all_angles) {
          double d = std::abs(std::atan2(double(k2), double(k1)) - phi);
          if (d > kPi) d = 2.0 * kPi - d;
          if (d > half) continue;
        }
        if (std::abs(k1) > kmax_ || std::abs(k2) > kmax_) continue;
        const std::size_t s = grid_[slot(k1, k2)];
        if (s != kNone) out.push_back(s);
      }
    }
    return out;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t slot(int k1, int k2) const {
    return static_cast<std::size_t>(k2 + kmax_) * (2 * kmax_ + 1) + (k1 + kmax_);
  }

  double alpha_;
  int j_max_;
  double a0_ = 0.0, r_in_ = 0.0, r_out_ = 0.0;
  int kmax_ = 1;
  std::vector<std::size_t> grid_;
};

// Patches B^{-t} Q_i of an inner covering.
class DilatedCovering final : public Covering {
 public:
  DilatedCovering(std::shared_ptr<const Covering> inner, Mat2 b)
      : inner_(std::move(inner)), b_(b), bt_(b.transpose()), bmt_(b.transpose().inverse()) {
    for (const Patch& p : inner_->patches()) {
      const AffineMap2 m{bmt_ * p.map.t, bmt_ * p.map.b};
      patches_.push_back(make_patch(p.key, p.lowpass, p.level, m, p.outer, p.inner));
    }
  }

  std::string name() const override { return "dilated-" + inner_->name(); }
  const Covering& inner() const { return *inner_; }
  const Mat2& matrix() const { return b_; }
  double safe_radius() const override {
    return inner_->safe_radius() / bt_.op_norm();
  }
  double weight(const Patch& p, double s) const override { return inner_->weight(p, s); }

  std::vector<std::size_t> candidates(Vec2 center, double radius) const override {
    const double scale = bt_.op_norm();
    return inner_->candidates(bt_ * center, radius * scale * (1.0 + 1e-12) + 1e-12);
  }

 private:
  std::shared_ptr<const Covering> inner_;
  Mat2 b_, bt_, bmt_;
};

}  // namespace wavepacket
