// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "wavepacket/covering.hpp"

namespace wavepacket {

namespace detail {

inline double radical_inverse(std::uint64_t n, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (n > 0) {
    r += f * static_cast<double>(n % base);
    n /= base;
    f *= inv;
  }
  return r;
}

}  // namespace detail

// Halton points in the disc of radius r, shifted by a seed-derived rotation.
class DiscSampler {
 public:
  DiscSampler(double radius, std::uint64_t seed) : radius_(radius) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    shift_[0] = u(rng);
    shift_[1] = u(rng);
  }
  Vec2 operator()(std::uint64_t n) const {
    double a = detail::radical_inverse(n + 1, 2) + shift_[0];
    double b = detail::radical_inverse(n + 1, 3) + shift_[1];
    a -= std::floor(a);
    b -= std::floor(b);
    const double r = radius_ * std::sqrt(a), t = 2.0 * kPi * b;
    return {r * std::cos(t), r * std::sin(t)};
  }

 private:
  double radius_;
  double shift_[2]{};
};

struct CoverageReport {
  std::vector<Vec2> misses;
  std::uint64_t tested = 0;
};

inline CoverageReport verify_coverage(const Covering& cov, std::uint64_t sample_count,
                                      std::uint64_t seed, double radius = -1.0) {
  if (radius < 0.0) radius = cov.safe_radius();
  CoverageReport rep;
  const DiscSampler sampler(radius, seed);
  for (std::uint64_t n = 0; n < sample_count; ++n) {
    const Vec2 xi = sampler(n);
    if (!cov.first_containing(xi, Which::Inner)) rep.misses.push_back(xi);
  }
  rep.tested = sample_count;
  return rep;
}

inline CoverageReport verify_coverage(const CoveringSpec& sp, int j_max,
                                      std::uint64_t sample_count, std::uint64_t seed = 1) {
  if (j_max < 2) throw PreconditionError("verify_coverage requires j_max >= 2");
  return verify_coverage(WavePacketCovering(sp, j_max), sample_count, seed);
}

struct AdmissibilityReport {
  std::uint64_t pairs = 0;           // ordered intersecting pairs
  int max_dj = 0;                    // over triple pairs
  std::size_t max_cluster = 0;
  std::size_t lowpass_cluster = 0;
  int max_distinct_m = 0;            // per (i, j') among intersecting partners
  int max_distinct_l = 0;
  double max_transition_norm = 0.0;  // over all intersecting pairs
  double max_lowpass_transition = 0.0;
  int max_weight_dj = 0;             // |j - j'| with Zero counted as j = 0
};

inline AdmissibilityReport admissibility_sweep(const WavePacketCovering& cov) {
  AdmissibilityReport rep;
  for (std::size_t k = 0; k < cov.size(); ++k) {
    const WPIndex i = cov.index(k);
    const std::vector<std::size_t> nb = cov.neighbors(k);
    rep.pairs += nb.size();
    rep.max_cluster = std::max(rep.max_cluster, nb.size());
    if (i.is_zero()) rep.lowpass_cluster = nb.size();
    std::map<int, std::set<int>> ms, ls;
    const Mat2 ti = cov.patch(k).map.t.inverse();
    for (std::size_t c : nb) {
      const WPIndex o = cov.index(c);
      const double tn = (ti * cov.patch(c).map.t).op_norm();
      rep.max_transition_norm = std::max(rep.max_transition_norm, tn);
      if (i.is_zero() || o.is_zero()) {
        rep.max_lowpass_transition = std::max(rep.max_lowpass_transition, tn);
      }
      rep.max_weight_dj = std::max(rep.max_weight_dj, std::abs(i.j - o.j));
      if (!i.is_zero() && !o.is_zero()) {
        rep.max_dj = std::max(rep.max_dj, std::abs(i.j - o.j));
        ms[o.j].insert(o.m);
        ls[o.j].insert(o.l);
      }
    }
    for (auto& [j, s] : ms) rep.max_distinct_m = std::max(rep.max_distinct_m, int(s.size()));
    for (auto& [j, s] : ls) rep.max_distinct_l = std::max(rep.max_distinct_l, int(s.size()));
  }
  return rep;
}

// Largest w_i^s / w_k^s over intersecting pairs.
inline double max_weight_ratio(const Covering& cov, double s) {
  double best = 1.0;
  for (std::size_t k = 0; k < cov.size(); ++k) {
    const double wk = cov.weight(cov.patch(k), s);
    for (std::size_t c : cov.neighbors(k)) best = std::max(best, cov.weight(cov.patch(c), s) / wk);
  }
  return best;
}

struct SubordinationProfile {
  std::size_t max = 0;
  std::map<std::size_t, std::size_t> histogram;  // count -> number of indices
  std::map<int, std::size_t> level_max;           // level -> max count
};

inline SubordinationProfile subordination_profile(const Covering& a, const Covering& b) {
  SubordinationProfile prof;
  for (const Patch& p : a.patches()) {
    std::size_t n = 0;
    for (std::size_t c : b.candidates(p.center, p.radius)) {
      if (patches_intersect(p, b.patch(c))) ++n;
    }
    prof.max = std::max(prof.max, n);
    ++prof.histogram[n];
    auto& lm = prof.level_max[p.level];
    lm = std::max(lm, n);
  }
  return prof;
}

inline SubordinationProfile subordination_profile(const CoveringSpec& a, const CoveringSpec& b,
                                                  int j_max) {
  return subordination_profile(WavePacketCovering(a, j_max), WavePacketCovering(b, j_max));
}

struct ConformanceLevel {
  double measure_lo = std::numeric_limits<double>::infinity();
  double measure_hi = 0.0;
  double radial = 0.0;
  double angular = 0.0;
};

struct ConformanceReport {
  double c_measure_lo = std::numeric_limits<double>::infinity();
  double c_measure_hi = 0.0;
  double c_radial = 0.0;
  double c_angular = 0.0;
  std::size_t max_cluster = 0;
  std::map<int, ConformanceLevel> levels;
  bool finite = false;
  bool stable = false;
  bool pass() const { return finite && stable; }
};

// Fits the constants of the measure, radial-interval and angular conditions of an
// (alpha, beta) covering. Stability: the last level stays within `tol` times the
// extremes of the earlier levels.
inline ConformanceReport alpha_beta_conformance(const Covering& cov, double alpha, double beta,
                                                int samples_per_axis = 24, double tol = 1.5) {
  ConformanceReport rep;
  auto sample_points = [&](const Patch& p) {
    std::vector<Vec2> pts;
    const int n = samples_per_axis;
    if (const auto* r = std::get_if<Rect>(&p.outer)) {
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
          pts.push_back(p.map.apply({r->x0 + (r->x1 - r->x0) * a / n, r->y0 + (r->y1 - r->y0) * b / n}));
    } else {
      const double r1 = shape_radius(p.outer);
      const double r0 = std::holds_alternative<Annulus>(p.outer) ? std::get<Annulus>(p.outer).r0 : 0.0;
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b < 4 * n; ++b) {
          const double rr = r0 + (r1 - r0) * a / n, t = 2.0 * kPi * b / (4 * n);
          pts.push_back(p.map.apply({rr * std::cos(t), rr * std::sin(t)}));
        }
    }
    return pts;
  };
  for (std::size_t k = 0; k < cov.size(); ++k) {
    const Patch& p = cov.patch(k);
    const std::vector<Vec2> pts = sample_points(p);
    const double meas = std::abs(p.map.t.det()) * shape_area(p.outer);
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const Vec2& x : pts) {
      rmin = std::min(rmin, norm(x));
      rmax = std::max(rmax, norm(x));
    }
    ConformanceLevel& lv = rep.levels[p.level];
    // Measure ratio over the extremes of |xi| in the patch.
    for (double r : {rmin, rmax}) {
      const double ratio = meas / std::pow(1.0 + r, alpha + beta);
      lv.measure_lo = std::min(lv.measure_lo, ratio);
      lv.measure_hi = std::max(lv.measure_hi, ratio);
    }
    lv.radial = std::max(lv.radial, (rmax - rmin) / std::pow(1.0 + rmin, alpha));
    const double phi = std::atan2(p.center.y, p.center.x);
    for (const Vec2& x : pts) {
      double d = 0.0;
      if (norm(x) > 0.0) {
        d = std::remainder(std::atan2(x.y, x.x) - phi, kPi);
        d = std::abs(d);
      }
      lv.angular = std::max(lv.angular, d / std::pow(1.0 + norm(x), beta - 1.0));
    }
    rep.max_cluster = std::max(rep.max_cluster, cov.neighbors(k).size());
  }
  rep.finite = true;
  for (auto& [j, lv] : rep.levels) {
    rep.c_measure_lo = std::min(rep.c_measure_lo, lv.measure_lo);
    rep.c_measure_hi = std::max(rep.c_measure_hi, lv.measure_hi);
    rep.c_radial = std::max(rep.c_radial, lv.radial);
    rep.c_angular = std::max(rep.c_angular, lv.angular);
    rep.finite = rep.finite && std::isfinite(lv.measure_hi) && lv.measure_lo > 0.0 &&
                 std::isfinite(lv.radial) && std::isfinite(lv.angular);
  }
  rep.stable = true;
  if (rep.levels.size() >= 3) {
    ConformanceLevel prev;
    auto last = std::prev(rep.levels.end());
    for (auto it = rep.levels.begin(); it != last; ++it) {
      prev.measure_lo = std::min(prev.measure_lo, it->second.measure_lo);
      prev.measure_hi = std::max(prev.measure_hi, it->second.measure_hi);
      prev.radial = std::max(prev.radial, it->second.radial);
      prev.angular = std::max(prev.angular, it->second.angular);
    }
    const ConformanceLevel& l = last->second;
    rep.stable = l.measure_hi <= tol * prev.measure_hi && l.measure_lo * tol >= prev.measure_lo &&
                 l.radial <= tol * prev.radial && l.angular <= tol * prev.angular;
  }
  return rep;
}

}  // namespace wavepacket
