// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wavepacket/covering.hpp"

namespace wavepacket {

struct SumParams {
  double s = 0.0;
  double sigma = 1.0;
  double tau = 1.0;
  double kappa0 = 0.0, kappa1 = 0.0, kappa2 = 0.0;
};

inline double kappa2_zero(const CoveringSpec& sp, double sigma, double tau) {
  return (2.0 - sp.alpha - sp.beta + sigma * (sp.alpha - sp.beta)) / ((1.0 - sp.beta) * tau);
}

struct KappaMinima {
  double kappa0, kappa1, kappa2, kappa2_zero;
};

inline KappaMinima kappa_minima(const CoveringSpec& sp, double s, double sigma, double tau) {
  if (!(sp.alpha < 1.0)) throw PreconditionError("technical sums require alpha < 1");
  if (!(sigma >= 0.0) || !(tau > 0.0)) throw PreconditionError("need sigma >= 0 and tau > 0");
  const double a = sp.alpha, b = sp.beta;
  const double k20 = kappa2_zero(sp, sigma, tau);
  KappaMinima k{};
  k.kappa2_zero = k20;
  k.kappa1 = std::max(2.0, 2.0 / tau);
  k.kappa2 = std::max(1.0 + (sigma + 2.0) / tau, 2.0 + k20);
  k.kappa0 = std::max((3.0 + std::abs(s) + tau + a + (a + b) * sigma) / ((1.0 - a) * tau),
                      (2.0 + std::abs(s) + tau * b * k20 + std::max(tau, sigma) * (a + b)) / ((1.0 - a) * tau));
  return k;
}

inline SumParams minimal_params(const CoveringSpec& sp, double s, double sigma, double tau) {
  const KappaMinima k = kappa_minima(sp, s, sigma, tau);
  return {s, sigma, tau, k.kappa0, k.kappa1, k.kappa2};
}

// Throws when the kappa conditions fail for the covering exponents.
inline void check_kappa_conditions(const SumParams& p, const CoveringSpec& sp) {
  const KappaMinima k = kappa_minima(sp, p.s, p.sigma, p.tau);
  const double tol = 1e-12;
  auto fail = [](const std::string& what, double have, double need) {
    throw PreconditionError("kappa condition violated: " + what + " = " + std::to_string(have) +
                            " < " + std::to_string(need));
  };
  if (p.kappa1 < k.kappa1 - tol) fail("kappa1", p.kappa1, k.kappa1);
  if (p.kappa2 < k.kappa2 - tol) fail("kappa2", p.kappa2, k.kappa2);
  if (p.kappa0 < k.kappa0 - tol) fail("kappa0", p.kappa0, k.kappa0);
}

inline double bound_b(const SumParams& p, const CoveringSpec& sp) {
  const double k20 = kappa2_zero(sp, p.sigma, p.tau);
  return sp.n_const * std::exp2(37.0 + 8.0 * p.sigma + p.tau * (10.0 + 5.0 * p.kappa0 + 6.0 * k20 + p.kappa2));
}

inline double psi(Vec2 xi, double k0, double k1, double k2) {
  return std::exp(-k0 * std::log1p(norm(xi)) - k1 * std::log1p(std::abs(xi.x)) -
                  k2 * std::log1p(std::abs(xi.y)));
}

namespace detail {

// Largest value of psi on a box: psi decreases in |xi|, |xi_1| and |xi_2|.
inline double psi_sup(const Box& b, const SumParams& p) {
  const double mx = (b.x0 <= 0.0 && b.x1 >= 0.0) ? 0.0 : std::min(std::abs(b.x0), std::abs(b.x1));
  const double my = (b.y0 <= 0.0 && b.y1 >= 0.0) ? 0.0 : std::min(std::abs(b.y0), std::abs(b.y1));
  return psi({mx, my}, p.kappa0, p.kappa1, p.kappa2);
}

// Upper bound of psi outside the disc of radius r.
inline double psi_tail(double r, const SumParams& p) {
  return std::pow(1.0 + r, -p.kappa0) * std::pow(1.0 + r / std::sqrt(2.0), -std::min(p.kappa1, p.kappa2));
}

inline double prefactor(int j, int jp, double tn, const SumParams& p) {
  return std::exp2((j - jp) * p.s) * std::pow(1.0 + tn, p.sigma);
}

// Gauss-Legendre nodes and weights on [0, 1].
inline const std::vector<std::pair<double, double>>& gauss_legendre(int n) {
  static const std::vector<std::vector<std::pair<double, double>>> table = [] {
    std::vector<std::vector<std::pair<double, double>>> t(65);
    for (int m = 1; m <= 64; ++m) {
      for (int k = 0; k < m; ++k) {
        double x = std::cos(kPi * (k + 0.75) / (m + 0.5)), dp = 0.0;
        for (int it = 0; it < 100; ++it) {
          double p0 = 1.0, p1 = x;
          for (int l = 2; l <= m; ++l) {
            const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
            p0 = p1;
            p1 = p2;
          }
          if (m == 1) p1 = x, p0 = 1.0;
          dp = m * (x * p1 - p0) / (x * x - 1.0);
          const double dx = p1 / dp;
          x -= dx;
          if (std::abs(dx) < 1e-16) break;
        }
        t[m].emplace_back(0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp));
      }
    }
    return t;
  }();
  if (n < 1 || n > 64) throw PreconditionError("Gauss order must lie in [1, 64]");
  return table[n];
}

using Polygon = std::vector<Vec2>;

// Convex polygon intersected with the half plane {s . v >= 0}.
inline Polygon clip_half_plane(const Polygon& poly, Vec2 s) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 a = poly[k], b = poly[(k + 1) % n];
    const double da = s.x * a.x + s.y * a.y, db = s.x * b.x + s.y * b.y;
    if (da >= 0.0) out.push_back(a);
    if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

inline constexpr int kDiscSides = 256;

// Integral of psi and area over a convex polygon. Pieces are split at the
// coordinate axes, where psi is not smooth, and integrated by collapsed Gauss
// rules on fan triangles anchored at the origin when it is a vertex.
inline std::pair<double, double> integrate_psi(const Polygon& poly, const SumParams& p, int order) {
  const auto& gl = gauss_legendre(order);
  double total = 0.0, area = 0.0;
  for (const Vec2 q : {Vec2{1, 1}, Vec2{-1, 1}, Vec2{-1, -1}, Vec2{1, -1}}) {
    Polygon piece = clip_half_plane(clip_half_plane(poly, {q.x, 0.0}), {0.0, q.y});
    if (piece.size() < 3) continue;
    std::size_t start = 0;
    for (std::size_t k = 0; k < piece.size(); ++k)
      if (norm(piece[k]) < 1e-14) start = k;
    std::rotate(piece.begin(), piece.begin() + static_cast<long>(start), piece.end());
    const Vec2 v0 = piece[0];
    for (std::size_t k = 1; k + 1 < piece.size(); ++k) {
      const Vec2 e1 = piece[k] - v0, e2 = piece[k + 1] - piece[k];
      const double jac = std::abs(e1.x * e2.y - e1.y * e2.x);
      if (jac == 0.0) continue;
      area += 0.5 * jac;
      double acc = 0.0;
      for (const auto& [u, wu] : gl)
        for (const auto& [w, ww] : gl) {
          const Vec2 x = v0 + u * (e1 + w * e2);
          acc += wu * ww * u * psi(x, p.kappa0, p.kappa1, p.kappa2);
        }
      total += acc * jac;
    }
  }
  return {total, area};
}

// Mean of psi over the image of the base set of i' under eta -> G eta + g.
inline double mean_psi(const WPIndex& ip, const CoveringSpec& sp, const Mat2& g, Vec2 off, const SumParams& p,
                       int order) {
  Polygon poly;
  if (ip.is_zero()) {
    for (int k = 0; k < kDiscSides; ++k) {
      const double t = 2.0 * kPi * k / kDiscSides;
      poly.push_back(g * Vec2{kLowpassOuter * std::cos(t), kLowpassOuter * std::sin(t)} + off);
    }
  } else {
    const Rect q = base_outer(sp);
    for (const Vec2 v : {Vec2{q.x0, q.y0}, Vec2{q.x1, q.y0}, Vec2{q.x1, q.y1}, Vec2{q.x0, q.y1}})
      poly.push_back(g * v + off);
  }
  if (g.det() < 0.0) std::reverse(poly.begin(), poly.end());
  const auto [integral, area] = integrate_psi(poly, p, order);
  return integral / area;
}

}  // namespace detail

// 2^{(j-j')s} (1 + |T_i^{-1} T_i'|)^sigma (mean over Q_i' of psi(T_i^{-1}(xi - b_i)))^tau
inline double m1_term(const WPIndex& i, const WPIndex& ip, const SumParams& p, const CoveringSpec& sp,
                      int quad_order = 16) {
  if (quad_order < 2) throw PreconditionError("quad_order must be >= 2");
  const AffineMap2 mi = affine_map(i, sp), mp = affine_map(ip, sp);
  const Mat2 ti = mi.t.inverse();
  const Mat2 g = ti * mp.t;
  const Vec2 off = ti * (mp.b - mi.b);
  return detail::prefactor(i.j, ip.j, g.op_norm(), p) *
         std::pow(detail::mean_psi(ip, sp, g, off, p, quad_order), p.tau);
}

struct SumsOptions {
  int quad_order = 16;         // Gauss points per axis on each triangle
  int coarse_order = 6;        // for terms whose sup bound is below hi_tol
  double hi_tol = 1e-3;
  double lo_tol = 1e-7;        // below this the sup bound itself is summed
  double remainder_tol = 1e-5; // bound on the unenumerated part of every row and column
};

struct TargetReport {
  double row_sup = 0.0;  // sup over i of sum over i'
  double col_sup = 0.0;  // sup over i' of sum over i
  double b = 0.0;
  WPIndex row_arg, col_arg;
  std::map<int, double> row_bands, col_bands;  // keyed by |j - j'|
  double remainder = 0.0;
  double radius = 0.0;
  std::size_t pairs_fine = 0, pairs_coarse = 0, pairs_bounded = 0;
  int j_max = 0;

  bool within_bound() const { return row_sup <= b && col_sup <= b; }
  // Largest band(d+1)/band(d) over d >= d0 where band(d) is nonzero.
  double band_decay(int d0 = 2) const {
    double worst = 0.0;
    for (const auto* bands : {&row_bands, &col_bands})
      for (const auto& [d, v] : *bands) {
        if (d < d0 || v <= 0.0) continue;
        const auto nx = bands->find(d + 1);
        if (nx != bands->end()) worst = std::max(worst, nx->second / v);
      }
    return worst;
  }
};

// Row and column sums of M^(1) over the j_max truncation. Terms are evaluated by
// quadrature near the diagonal, by their sup bound far from it, and the rest is
// covered by an analytic remainder that is added to every sum.
inline TargetReport audit_target_estimate(const SumParams& p, const CoveringSpec& sp, int j_max,
                                          const SumsOptions& opt = {}) {
  check_kappa_conditions(p, sp);
  const WavePacketCovering cov(sp, j_max);
  const std::size_t n = cov.size();
  std::vector<int> count(j_max + 1, 0);
  std::vector<AffineMap2> maps(n);
  std::vector<Mat2> inv(n);
  for (std::size_t k = 0; k < n; ++k) {
    const WPIndex i = cov.index(k);
    ++count[i.j];
    maps[k] = affine_map(i, sp);
    inv[k] = maps[k].t.inverse();
  }
  auto norm_a = [&](int j) { return j == 0 ? 1.0 : std::exp2(sp.alpha * j); };
  auto norm_ainv = [&](int j) { return j == 0 ? 1.0 : std::exp2(-sp.beta * j); };

  TargetReport rep;
  rep.j_max = j_max;
  rep.b = bound_b(p, sp);
  // remainder(R) = max over levels of sum over the other side of prefactor bounds times psi_tail(R)^tau
  double worst_pf = 0.0;
  for (int j = 0; j <= j_max; ++j) {
    double row = 0.0, col = 0.0;
    for (int jp = 0; jp <= j_max; ++jp) {
      row += count[jp] * detail::prefactor(j, jp, norm_ainv(j) * norm_a(jp), p);
      col += count[jp] * detail::prefactor(jp, j, norm_ainv(jp) * norm_a(j), p);
    }
    worst_pf = std::max({worst_pf, row, col});
  }
  double r = 2.0;
  while (worst_pf * std::pow(detail::psi_tail(r, p), p.tau) > opt.remainder_tol) r *= 1.25;
  rep.radius = r;
  rep.remainder = worst_pf * std::pow(detail::psi_tail(r, p), p.tau);

  std::vector<double> rows(n, 0.0), cols(n, 0.0);
  std::vector<std::vector<double>> rb(n, std::vector<double>(j_max + 1, 0.0)),
      cb(n, std::vector<double>(j_max + 1, 0.0));
  const Rect q = base_outer(sp);
  for (std::size_t a = 0; a < n; ++a) {
    const WPIndex i = cov.index(a);
    for (std::size_t c : cov.candidates(maps[a].b, r * norm_a(i.j))) {
      const WPIndex ip = cov.index(c);
      const Mat2 g = inv[a] * maps[c].t;
      const Vec2 off = inv[a] * (maps[c].b - maps[a].b);
      const Shape base = ip.is_zero() ? Shape{Disc{kLowpassOuter}} : Shape{q};
      const Box box = bounding_box(base, AffineMap2{g, off});
      const double pf = detail::prefactor(i.j, ip.j, g.op_norm(), p);
      const double ub = pf * std::pow(detail::psi_sup(box, p), p.tau);
      double v;
      if (ub <= opt.lo_tol) {
        v = ub;
        ++rep.pairs_bounded;
      } else if (ub <= opt.hi_tol) {
        v = pf * std::pow(detail::mean_psi(ip, sp, g, off, p, opt.coarse_order), p.tau);
        ++rep.pairs_coarse;
      } else {
        v = pf * std::pow(detail::mean_psi(ip, sp, g, off, p, opt.quad_order), p.tau);
        ++rep.pairs_fine;
      }
      rows[a] += v;
      cols[c] += v;
      const int d = std::abs(i.j - ip.j);
      rb[a][d] += v;
      cb[c][d] += v;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double rv = rows[k] + rep.remainder, cv = cols[k] + rep.remainder;
    if (rv > rep.row_sup) {
      rep.row_sup = rv;
      rep.row_arg = cov.index(k);
    }
    if (cv > rep.col_sup) {
      rep.col_sup = cv;
      rep.col_arg = cov.index(k);
    }
    for (int d = 0; d <= j_max; ++d) {
      rep.row_bands[d] = std::max(rep.row_bands[d], rb[k][d]);
      rep.col_bands[d] = std::max(rep.col_bands[d], cb[k][d]);
    }
  }
  return rep;
}

struct PlateauReport {
  std::vector<TargetReport> runs;
  double row_growth = 0.0;  // relative growth at the last level
  double col_growth = 0.0;
  bool monotone = true;     // up to the enumeration remainders
  bool plateau(double tol = 0.01) const { return row_growth < tol && col_growth < tol; }
};

inline PlateauReport audit_plateau(const SumParams& p, const CoveringSpec& sp, int j_lo, int j_hi,
                                   const SumsOptions& opt = {}) {
  PlateauReport out;
  for (int j = j_lo; j <= j_hi; ++j) out.runs.push_back(audit_target_estimate(p, sp, j, opt));
  for (std::size_t k = 1; k < out.runs.size(); ++k) {
    const TargetReport &a = out.runs[k - 1], &b = out.runs[k];
    const double slack = 2.0 * std::max(a.remainder, b.remainder);
    if (b.row_sup < a.row_sup - slack || b.col_sup < a.col_sup - slack) out.monotone = false;
  }
  if (out.runs.size() >= 2) {
    const TargetReport &a = out.runs[out.runs.size() - 2], &b = out.runs.back();
    out.row_growth = (b.row_sup - a.row_sup) / a.row_sup;
    out.col_growth = (b.col_sup - a.col_sup) / a.col_sup;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Appendix audits

struct SumEstimateReport {
  double sum = 0.0;    // truncated part
  double tail = 0.0;   // integral bound of the rest
  double total = 0.0;
  double bound = 0.0;  // 2 + 10/beta
  bool holds = false;
};

// sum over k of (1 + |beta (k + x)|)^{-2}
inline SumEstimateReport audit_sum_estimate(double beta, double x, long trunc = 1000000) {
  if (!(beta > 0.0)) throw PreconditionError("beta must be positive");
  if (trunc < 2) throw PreconditionError("trunc must be >= 2");
  x -= std::floor(x);
  SumEstimateReport r;
  for (long k = trunc; k >= 1; --k) {
    r.sum += std::pow(1.0 + beta * (k + x), -2.0);
    r.sum += std::pow(1.0 + std::abs(beta * (x - k)), -2.0);
  }
  r.sum += std::pow(1.0 + beta * x, -2.0);
  r.tail = 1.0 / (beta * (1.0 + beta * (trunc + x))) + 1.0 / (beta * (1.0 + beta * (trunc - x)));
  r.total = r.sum + r.tail;
  r.bound = 2.0 + 10.0 / beta;
  r.holds = r.total <= r.bound;
  return r;
}

struct MainLemmaParams {
  double n = 0.0, gamma = 0.0, l = 1.0, tau = 1.0, m = 0.0;
  double beta1 = 1.0, beta2 = 1.0;
  double c0 = 1.0, q = 3.0;
};

struct MainLemmaReport {
  double lhs = 0.0, tail = 0.0, rhs = 0.0;
  bool holds = false;
};

namespace detail {

// integral of (1 + |x|)^{-q} over [a, b], q > 1
inline double decay_integral(double a, double b, double q) {
  if (b <= a) return 0.0;
  auto g = [q](double x) {
    const double v = (1.0 - std::pow(1.0 + std::abs(x), 1.0 - q)) / (q - 1.0);
    return x < 0.0 ? -v : v;
  };
  return g(b) - g(a);
}

inline MainLemmaReport main_lemma_positive(const MainLemmaParams& p, long trunc) {
  MainLemmaReport r;
  const long k0 = static_cast<long>(std::ceil(-p.m - 1e-12));
  double t = 0.0;
  for (long k = k0; k <= k0 + trunc; ++k) {
    t = k + p.m;
    const double integral = p.c0 * decay_integral(p.beta1 * t - p.l, p.beta2 * t + p.l, p.q);
    r.lhs += std::pow(std::abs(p.gamma * t), p.n) * std::pow(integral, p.tau);
  }
  if (!(t > 2.0 * p.l / p.beta1)) throw PreconditionError("trunc too small for the tail bound");
  const double e = p.q * p.tau - p.n - p.tau;
  const double kk = std::pow(p.gamma, p.n) * std::pow(p.c0 * p.beta2, p.tau) * std::pow(p.beta1 / 2.0, -p.q * p.tau);
  r.tail = kk * std::pow(t, 1.0 - e) / (e - 1.0);
  const double c = std::exp2(4.0 + p.n + p.tau + p.tau * p.q);
  r.rhs = c * std::pow(p.beta2 / p.beta1, p.tau) * std::pow(p.gamma / p.beta1, p.n) * std::pow(p.c0, p.tau) *
          (1.0 + std::pow(p.l, p.tau + p.n)) * (1.0 + (p.l + 1.0) / p.beta1);
  r.holds = r.lhs + r.tail <= r.rhs;
  return r;
}

inline void check_main_lemma(const MainLemmaParams& p) {
  if (!(p.n >= 0.0 && p.gamma >= 0.0 && p.l > 0.0 && p.tau > 0.0 && p.c0 > 0.0))
    throw PreconditionError("need N, gamma >= 0 and L, tau, C0 > 0");
  if (!(p.beta1 > 0.0 && p.beta2 > 0.0)) throw PreconditionError("betas must be positive");
  if (!(p.q >= 1.0 + (p.n + 2.0) / p.tau - 1e-12)) throw PreconditionError("need q >= 1 + (N + 2)/tau");
}

}  // namespace detail

// Sum over k + M >= 0 (beta1 <= beta2), or over k + M <= 0 (beta2 <= beta1) when negative.
inline MainLemmaReport audit_main_lemma(const MainLemmaParams& p, bool negative = false, long trunc = 200000) {
  detail::check_main_lemma(p);
  if (!negative) {
    if (p.beta1 > p.beta2) throw PreconditionError("need beta1 <= beta2");
    return detail::main_lemma_positive(p, trunc);
  }
  if (p.beta2 > p.beta1) throw PreconditionError("need beta2 <= beta1");
  // k -> -k, M -> -M maps the interval to its mirror image; f is even.
  MainLemmaParams r = p;
  r.m = -p.m;
  r.beta1 = p.beta2;
  r.beta2 = p.beta1;
  return detail::main_lemma_positive(r, trunc);
}

struct TrigReport {
  std::size_t checked = 0;
  std::map<std::string, std::size_t> violations;
  double worst_margin = std::numeric_limits<double>::infinity();
  bool ok() const {
    for (const auto& [k, v] : violations)
      if (v) return false;
    return true;
  }

};

inline TrigReport audit_trig_bounds(std::size_t samples = 100000) {
  TrigReport r;
  const double tol = 1e-12;
  auto check = [&](const std::string& name, double margin) {
    ++r.checked;
    r.violations[name] += margin < -tol ? 1 : 0;
    r.worst_margin = std::min(r.worst_margin, margin);
  };
  for (std::size_t k = 0; k <= samples; ++k) {
    const double phi = 0.5 * kPi * static_cast<double>(k) / samples;
    check("sine-linear", std::sin(phi) - 2.0 / kPi * phi);
    check("sine-linear", phi - std::sin(phi));
    check("cosine-linear", std::cos(phi) - (1.0 - 2.0 / kPi * phi));
    check("cosine-linear", 0.5 * kPi * (1.0 - 2.0 / kPi * phi) - std::cos(phi));
    const double t = -10.0 + 20.0 * static_cast<double>(k) / samples;
    check("cosine-sine", std::abs(std::sin(t)) - (1.0 - std::abs(std::cos(t))));
    check("cosine-sine", std::abs(std::cos(t)) - (1.0 - std::abs(std::sin(t))));
    check("cosine-quadratic", std::cos(t) - (1.0 - t * t / 2.0));
  }
  return r;
}

struct OmegaIntervals {
  double i1_lo, i1_hi, i2_lo, i2_hi;
};

// Interval product containing T_i^{-1}(Q_i' - b_i).
inline OmegaIntervals omega_intervals(const WPIndex& i, const WPIndex& ip, const CoveringSpec& sp) {
  if (i.is_zero() || ip.is_zero()) throw PreconditionError("omega intervals require triple indices");
  const double eps = sp.epsilon;
  double v = theta_jl(ip.j, ip.l, sp) - theta_jl(i.j, i.l, sp);
  v -= 2.0 * kPi * std::floor(v / (2.0 * kPi));
  if (v >= 2.0 * kPi) v = 0.0;
  const int iota = std::min(3, static_cast<int>(std::floor(v / (0.5 * kPi))));
  const double th = v - iota * 0.5 * kPi;
  const double c = std::cos(th), s = std::sin(th);
  const double xm = std::exp2(ip.j - 1.0) + (ip.m - eps) * std::exp2(sp.alpha * ip.j);
  const double xp = std::exp2(ip.j - 1.0) + (ip.m + 1.0 + eps) * std::exp2(sp.alpha * ip.j);
  const double y = std::exp2(sp.beta * ip.j + 1.0);
  double um, up, vm, vp;
  switch (iota) {
    case 0:
      um = xm * c - y * s, up = xp * c + y * s;
      vm = xm * s - y * c, vp = xp * s + y * c;
      break;
    case 1:
      um = -xp * s - y * c, up = -xm * s + y * c;
      vm = xm * c - y * s, vp = xp * c + y * s;
      break;
    case 2:
      um = -xp * c - y * s, up = -xm * c + y * s;
      vm = -xp * s - y * c, vp = -xm * s + y * c;
      break;
    default:
      um = xm * s - y * c, up = xp * s + y * c;
      vm = -xp * c - y * s, vp = -xm * c + y * s;
      break;
  }
  const double sa = std::exp2(-sp.alpha * i.j), sb = std::exp2(-sp.beta * i.j);
  const double shift = std::exp2(i.j - 1.0) + i.m * std::exp2(sp.alpha * i.j);
  return {sa * (um - shift), sa * (up - shift), sb * vm, sb * vp};
}

struct InclusionReport {
  std::size_t samples = 0, violations = 0;
  double worst_excess = 0.0;
  bool ok() const { return violations == 0; }
};

inline InclusionReport audit_omega_inclusion(const WPIndex& i, const WPIndex& ip, const CoveringSpec& sp,
                                             std::size_t samples = 10000, std::uint64_t seed = 1) {
  const OmegaIntervals iv = omega_intervals(i, ip, sp);
  const AffineMap2 mi = affine_map(i, sp), mp = affine_map(ip, sp);
  const Mat2 ti = mi.t.inverse();
  const Rect q = base_outer(sp);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(q.x0, q.x1), uy(q.y0, q.y1);
  InclusionReport r;
  const double tol = 1e-9 * (1.0 + std::max({std::abs(iv.i1_lo), std::abs(iv.i1_hi), std::abs(iv.i2_lo),
                                               std::abs(iv.i2_hi)}));
  auto probe = [&](Vec2 eta) {
    const Vec2 w = ti * (mp.apply(eta) - mi.b);
    const double ex = std::max({iv.i1_lo - w.x, w.x - iv.i1_hi, iv.i2_lo - w.y, w.y - iv.i2_hi});
    ++r.samples;
    r.worst_excess = std::max(r.worst_excess, ex);
    if (ex > tol) ++r.violations;
  };
  for (const Vec2 corner : {Vec2{q.x0, q.y0}, Vec2{q.x1, q.y0}, Vec2{q.x0, q.y1}, Vec2{q.x1, q.y1}}) probe(corner);
  for (std::size_t k = 0; k < samples; ++k) probe({ux(rng), uy(rng)});
  return r;
}

struct AppendixOptions {
  std::vector<double> sum_betas = {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  int sum_x_points = 20;
  int lemma_draws = 100;
  long lemma_trunc = 20000;
  std::size_t trig_samples = 100000;
  int omega_pairs = 200;
  std::size_t omega_samples = 10000;
  int omega_jmax = 5;
  std::uint64_t seed = 1;
};

struct AppendixReport {
  std::size_t sum_checked = 0, sum_violations = 0;
  double sum_worst_ratio = 0.0;  // total / bound
  int lemma_checked = 0, lemma_violations = 0;
  double lemma_worst_ratio = 0.0;  // (lhs + tail) / rhs
  TrigReport trig;
  int omega_pairs = 0;
  std::size_t omega_samples = 0, omega_violations = 0;
  bool sum_ok() const { return sum_violations == 0; }
  bool lemma_ok() const { return lemma_violations == 0; }
  bool omega_ok() const { return omega_violations == 0; }
  bool ok() const { return sum_ok() && lemma_ok() && trig.ok() && omega_ok(); }
};

// Seeded parameter draws for the main lemma, alternating the positive and negative forms.
inline MainLemmaParams draw_main_lemma_params(std::mt19937_64& rng, bool negative) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MainLemmaParams p;
  p.n = 3.0 * u(rng);
  p.gamma = 0.1 + 1.9 * u(rng);
  p.l = 0.5 + 1.5 * u(rng);
  p.tau = 0.5 + 1.5 * u(rng);
  p.m = 2.0 * u(rng) - 1.0;
  const double b1 = 0.5 + 1.5 * u(rng), b2 = 0.5 + 1.5 * u(rng);
  p.beta1 = negative ? std::max(b1, b2) : std::min(b1, b2);
  p.beta2 = negative ? std::min(b1, b2) : std::max(b1, b2);
  p.c0 = 0.5 + 1.5 * u(rng);
  p.q = 1.0 + (p.n + 2.0) / p.tau + 2.0 * u(rng);
  return p;
}

inline AppendixReport audit_appendix(const AppendixOptions& o = {}) {
  AppendixReport r;
  for (double beta : o.sum_betas)
    for (int k = 0; k < o.sum_x_points; ++k) {
      const SumEstimateReport e = audit_sum_estimate(beta, static_cast<double>(k) / o.sum_x_points);
      ++r.sum_checked;
      r.sum_violations += e.holds ? 0 : 1;
      r.sum_worst_ratio = std::max(r.sum_worst_ratio, e.total / e.bound);
    }
  std::mt19937_64 rng(o.seed);
  for (int d = 0; d < o.lemma_draws; ++d) {
    const bool neg = d % 2 == 1;
    const MainLemmaReport e = audit_main_lemma(draw_main_lemma_params(rng, neg), neg, o.lemma_trunc);
    ++r.lemma_checked;
    r.lemma_violations += e.holds ? 0 : 1;
    r.lemma_worst_ratio = std::max(r.lemma_worst_ratio, (e.lhs + e.tail) / e.rhs);
  }
  r.trig = audit_trig_bounds(o.trig_samples);
  const std::array<CoveringSpec, 4> specs = {CoveringSpec{0.0, 0.0}, CoveringSpec{0.5, 0.3}, CoveringSpec{0.7, 0.7},
                                             CoveringSpec{1.0, 1.0}};
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const WavePacketCovering cov(specs[c], o.omega_jmax);
    const int want = o.omega_pairs / 4 + (static_cast<int>(c) < o.omega_pairs % 4 ? 1 : 0);
    for (int got = 0; got < want;) {
      const std::size_t a = 1 + rng() % (cov.size() - 1);
      const auto nb = cov.neighbors(a);
      const std::size_t b = nb[rng() % nb.size()];
      if (b == 0) continue;
      const InclusionReport e = audit_omega_inclusion(cov.index(a), cov.index(b), specs[c], o.omega_samples, rng());
      ++got;
      ++r.omega_pairs;
      r.omega_samples += e.samples;
      r.omega_violations += e.violations;
    }
  }
  return r;
}

}  // namespace wavepacket
