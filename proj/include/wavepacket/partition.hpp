// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "wavepacket/covering.hpp"

namespace wavepacket {

enum class BumpProfile {
  Exp,         // h(u) = exp(-1/u)
  ExpSquared,  // h(u) = exp(-1/u^2)
};

namespace detail {

inline double bump_h(double u, BumpProfile prof) {
  if (u <= 0.0) return 0.0;
  return prof == BumpProfile::Exp ? std::exp(-1.0 / u) : std::exp(-1.0 / (u * u));
}

// e^2 h((x - a)/(ai - a)) h((b - x)/(b - bi)); >= 1 on [ai, bi], 0 off (a, b).
inline double bump_1d(double x, double a, double ai, double bi, double b, BumpProfile prof) {
  if (x <= a || x >= b) return 0.0;
  return std::exp(2.0) * bump_h((x - a) / (ai - a), prof) * bump_h((b - x) / (b - bi), prof);
}

}  // namespace detail

// Base bump theta on the outer base set, >= 1 on the inner base set.
inline double base_bump(const Shape& outer, const Shape& inner, Vec2 u, BumpProfile prof) {
  if (const auto* o = std::get_if<Rect>(&outer)) {
    const auto& in = std::get<Rect>(inner);
    const double gx = detail::bump_1d(u.x, o->x0, in.x0, in.x1, o->x1, prof);
    if (gx == 0.0) return 0.0;
    return gx * detail::bump_1d(u.y, o->y0, in.y0, in.y1, o->y1, prof);
  }
  // Radial profiles in r^2 stay smooth at the origin.
  const double r2 = u.x * u.x + u.y * u.y;
  if (const auto* d = std::get_if<Disc>(&outer)) {
    const double ri = std::get<Disc>(inner).r;
    if (r2 >= d->r * d->r) return 0.0;
    return std::exp(1.0) * detail::bump_h((d->r * d->r - r2) / (d->r * d->r - ri * ri), prof);
  }
  const auto& a = std::get<Annulus>(outer);
  const auto& ai = std::get<Annulus>(inner);
  return detail::bump_1d(r2, a.r0 * a.r0, ai.r0 * ai.r0, ai.r1 * ai.r1, a.r1 * a.r1, prof);
}

class Partition {
 public:
  // Checks `verify_samples` seeded points of the safe disc for denominator >= 1.
  explicit Partition(std::shared_ptr<const Covering> cov, BumpProfile prof = BumpProfile::Exp,
                     int verify_samples = 4096, std::uint64_t seed = 1)
      : cov_(std::move(cov)), prof_(prof) {
    inverse_.reserve(cov_->size());
    for (const Patch& p : cov_->patches()) inverse_.push_back(p.map.inverse());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double rs = cov_->safe_radius();
    for (int k = 0; k < verify_samples; ++k) {
      const double rad = rs * std::sqrt(u(rng)), ang = 2.0 * kPi * u(rng);
      const Vec2 xi{rad * std::cos(ang), rad * std::sin(ang)};
      if (denominator(xi) < 1.0) {
        throw Error("coverage gap at (" + std::to_string(xi.x) + ", " + std::to_string(xi.y) + ")");
      }
    }
  }

  const Covering& covering() const { return *cov_; }
  std::shared_ptr<const Covering> covering_ptr() const { return cov_; }
  BumpProfile profile() const { return prof_; }
  double safe_radius() const { return cov_->safe_radius(); }

  double theta(std::size_t k, Vec2 xi) const {
    const Patch& p = cov_->patch(k);
    return base_bump(p.outer, p.inner, inverse_[k].apply(xi), prof_);
  }

  double denominator(Vec2 xi) const {
    double s = 0.0;
    for (std::size_t c : cov_->candidates(xi, 0.0)) s += theta(c, xi);
    return s;
  }

  double eval_phi(std::size_t k, Vec2 xi) const {
    check_safe(xi);
    const double t = theta(k, xi);
    if (t == 0.0) return 0.0;
    return t / denominator(xi);
  }

  double sum_phi(Vec2 xi) const {
    check_safe(xi);
    const std::vector<std::size_t> cs = cov_->candidates(xi, 0.0);
    std::vector<double> t(cs.size());
    double den = 0.0;
    for (std::size_t n = 0; n < cs.size(); ++n) den += t[n] = theta(cs[n], xi);
    double s = 0.0;
    for (double v : t) s += v / den;
    return s;
  }

  // Nonzero terms at xi.
  std::vector<std::pair<std::size_t, double>> active(Vec2 xi) const {
    check_safe(xi);
    std::vector<std::pair<std::size_t, double>> out;
    double den = 0.0;
    for (std::size_t c : cov_->candidates(xi, 0.0)) {
      const double t = theta(c, xi);
      if (t > 0.0) {
        out.emplace_back(c, t);
        den += t;
      }
    }
    for (auto& [c, v] : out) v /= den;
    return out;
  }

 private:
  void check_safe(Vec2 xi) const {
    if (norm(xi) > cov_->safe_radius()) {
      throw PreconditionError("frequency outside the truncation-safe region");
    }
  }

  std::shared_ptr<const Covering> cov_;
  BumpProfile prof_;
  std::vector<AffineMap2> inverse_;
};

struct DerivativeAudit {
  // sup[order][level]; levels not sampled are absent.
  std::vector<std::map<int, double>> sup;
  std::vector<double> overall;
  std::vector<double> growth;  // last level sup over max of earlier levels
  bool plateau = false;
};

// Central differences of phi_k(T_k u + b_k) on the pulled-back base set.
inline DerivativeAudit derivative_bound_audit(const Partition& part, int order_max,
                                              int patches_per_level = 3, int grid = 48,
                                              double growth_tol = 1.5) {
  if (order_max < 0 || order_max > 2) throw PreconditionError("order_max must be in [0,2]");
  const Covering& cov = part.covering();
  const double safe = part.safe_radius();
  DerivativeAudit out;
  out.sup.resize(order_max + 1);
  out.overall.assign(order_max + 1, 0.0);
  std::map<int, std::vector<std::size_t>> by_level;
  for (std::size_t k = 0; k < cov.size(); ++k) by_level[cov.patch(k).level].push_back(k);
  for (auto& [level, ks] : by_level) {
    // Sample evenly through the level, keeping patches that reach the safe disc.
    std::vector<std::size_t> chosen;
    const std::size_t stride = std::max<std::size_t>(1, ks.size() / patches_per_level);
    for (std::size_t t = 0; t < ks.size() && static_cast<int>(chosen.size()) < patches_per_level;
         t += stride) {
      const Patch& p = cov.patch(ks[t]);
      if (norm(p.center) - p.radius < safe) chosen.push_back(ks[t]);
    }
    for (std::size_t k : chosen) {
      const Patch& p = cov.patch(k);
      const Box bb = bounding_box(p.outer, AffineMap2{});
      const double side = std::min(bb.x1 - bb.x0, bb.y1 - bb.y0);
      const double h = 1e-4 * side;
      // Uniform grid plus refinement near the edges where the bump transitions.
      auto axis = [&](double a0, double a1) {
        std::vector<double> v;
        const double w = a1 - a0;
        for (int t = 0; t < grid; ++t) v.push_back(a0 + w * (t + 0.5) / grid);
        for (int t = 0; t < grid / 2; ++t) {
          const double f = (t + 0.5) / grid * 0.06;
          v.push_back(a0 + w * f);
          v.push_back(a1 - w * f);
        }
        return v;
      };
      const std::vector<double> xs = axis(bb.x0, bb.x1), ys = axis(bb.y0, bb.y1);
      auto f = [&](double x, double y) {
        const Vec2 xi = p.map.apply({x, y});
        if (norm(xi) > safe) return std::nan("");
        return part.eval_phi(k, xi);
      };
      for (double x : xs) {
        for (double y : ys) {
          if (!shape_contains(p.outer, {x, y}, Membership::Open)) continue;
          const Vec2 xi = p.map.apply({x, y});
          if (norm(xi) + p.map.t.op_norm() * 2.0 * h >= safe) continue;
          double vals[3] = {0.0, 0.0, 0.0};
          const double f0 = f(x, y);
          vals[0] = std::abs(f0);
          if (order_max >= 1) {
            const double fx = (f(x + h, y) - f(x - h, y)) / (2 * h);
            const double fy = (f(x, y + h) - f(x, y - h)) / (2 * h);
            vals[1] = std::max(std::abs(fx), std::abs(fy));
          }
          if (order_max >= 2) {
            const double fxx = (f(x + h, y) - 2 * f0 + f(x - h, y)) / (h * h);
            const double fyy = (f(x, y + h) - 2 * f0 + f(x, y - h)) / (h * h);
            const double fxy =
                (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h);
            vals[2] = std::max({std::abs(fxx), std::abs(fyy), std::abs(fxy)});
          }
          for (int o = 0; o <= order_max; ++o) {
            if (!std::isfinite(vals[o])) continue;
            double& s = out.sup[o][level];
            s = std::max(s, vals[o]);
          }
        }
      }
    }
  }
  out.plateau = true;
  out.growth.assign(order_max + 1, 0.0);
  for (int o = 0; o <= order_max; ++o) {
    double prev = 0.0;
    for (auto& [level, v] : out.sup[o]) out.overall[o] = std::max(out.overall[o], v);
    if (out.sup[o].size() >= 2) {
      auto last = std::prev(out.sup[o].end());
      for (auto it = out.sup[o].begin(); it != last; ++it) prev = std::max(prev, it->second);
      out.growth[o] = prev > 0.0 ? last->second / prev : 0.0;
      if (!(out.growth[o] <= growth_tol) && last->second > 0.0) out.plateau = false;
    }
    if (!std::isfinite(out.overall[o])) out.plateau = false;
  }
  return out;
}

}  // namespace wavepacket
