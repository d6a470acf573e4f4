// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "wavepacket/covering.hpp"
#include "wavepacket/dspace.hpp"
#include "wavepacket/fields.hpp"
#include "wavepacket/jet.hpp"

namespace wavepacket {

// ---------------------------------------------------------------------------
// Spectral windows and generators

// A window evaluable on doubles and on jets; `support` bounds where it may be nonzero.
struct SpectralWindow {
  std::function<double(double, double)> value;
  std::function<Jet2(const Jet2&, const Jet2&)> jet;
  Box support{-kInf, kInf, -kInf, kInf};

  double operator()(Vec2 xi) const { return value(xi.x, xi.y); }
  bool compact() const { return std::isfinite(support.x0) && std::isfinite(support.x1) &&
                                std::isfinite(support.y0) && std::isfinite(support.y1); }
};

template <typename F>
SpectralWindow make_window(F f, Box support) {
  return {[f](double x, double y) { return f(x, y); },
          [f](const Jet2& x, const Jet2& y) { return f(x, y); }, support};
}

// 0 for t <= 0, 1 for t >= 1, exp-quotient in between; works on doubles and jets.
template <typename T>
T smooth_step_t(const T& t) {
  using std::exp;
  const double v = jet_value(t);
  if (v <= 0.0) return jet_const(t, 0.0);
  if (v >= 1.0) return jet_const(t, 1.0);
  const T a = exp(jet_const(t, -1.0) / t);
  const T b = exp(jet_const(t, -1.0) / (1.0 - t));
  return a / (a + b);
}

struct GeneratorPair {
  SpectralWindow phi_hat;    // low-pass
  SpectralWindow gamma_hat;  // high-pass prototype
};

// gamma^ = 1 on [0,1] x [-1,1], supported in [-2e, 1+2e] x [-1-2e, 1+2e];
// phi^ = 1 on the closed disc of radius 4, supported in the disc of radius 5.
inline GeneratorPair default_generators(double eps = 1.0 / 64.0) {
  const double w = 2.0 * eps;
  auto gamma = [w](const auto& x, const auto& y) {
    return smooth_step_t((x + w) / w) * smooth_step_t((1.0 + w - x) / w) *
           smooth_step_t((y + 1.0 + w) / w) * smooth_step_t((1.0 + w - y) / w);
  };
  auto phi = [](const auto& x, const auto& y) { return smooth_step_t((25.0 - x * x - y * y) / 9.0); };
  return {make_window(phi, {-5.0, 5.0, -5.0, 5.0}), make_window(gamma, {-w, 1.0 + w, -1.0 - w, 1.0 + w})};
}

inline SpectralWindow gaussian_window(double scale = 1.0) {
  return make_window(
      [scale](const auto& x, const auto& y) {
        using std::exp;
        return exp((x * x + y * y) * (-kPi * scale * scale));
      },
      {});
}

// ---------------------------------------------------------------------------
// Kappa exponents

enum class KappaBranch { Atomic, Banach };

struct KappaSet {
  int n0 = 0;
  double kappa0 = 0.0, kappa0_prime = 0.0, kappa1 = 0.0, kappa2 = 0.0;
  KappaBranch branch = KappaBranch::Atomic;

  // Exponent of (1 + |xi|) in the decay bound.
  double radial_exponent() const { return branch == KappaBranch::Atomic ? 4.0 + kappa0 : kappa0_prime; }
};

namespace detail {

inline KappaSet kappas(double p0, double q0, double s0, double omega, double alpha, double beta) {
  if (!(0.0 <= beta && beta <= alpha && alpha < 1.0)) {
    throw PreconditionError("frames require 0 <= beta <= alpha < 1");
  }
  for (double v : {p0, q0, omega}) {
    if (!(v > 0.0 && v <= 1.0)) throw PreconditionError("p0, q0 and omega must lie in (0, 1]");
  }
  if (!(s0 >= 0.0)) throw PreconditionError("s0 must be nonnegative");
  const double mn = std::min(p0, q0);
  KappaSet k;
  k.n0 = static_cast<int>(std::ceil((2.0 + omega) / p0 - 1e-12));
  k.kappa1 = 2.0 / mn;
  k.kappa2 = 3.0 + 2.0 / ((1.0 - beta) * mn) + 5.0 / p0;
  k.kappa0 = (3.0 + s0 + (3.0 + alpha) / mn + (6.0 * alpha + 9.0 * beta) / p0 +
              2.0 * beta / ((1.0 - beta) * mn)) /
             (1.0 - alpha);
  k.kappa0_prime = (3.0 + s0 + (1.0 + alpha) / mn + (5.0 * alpha + 10.0 * beta) / p0 +
                    2.0 / ((1.0 - beta) * mn)) /
                   (1.0 - alpha);
  return k;
}

}  // namespace detail

inline KappaSet kappa_atomic(double p0, double q0, double s0, double omega, double alpha, double beta) {
  KappaSet k = detail::kappas(p0, q0, s0, omega, alpha, beta);
  k.branch = KappaBranch::Atomic;
  return k;
}

inline KappaSet kappa_banach(double p0, double q0, double s0, double omega, double alpha, double beta) {
  KappaSet k = detail::kappas(p0, q0, s0, omega, alpha, beta);
  k.branch = KappaBranch::Banach;
  return k;
}

struct DecayGrid {
  int radial = 48;
  int angular = 48;
  double r_max = 64.0;
};

struct DecayReport {
  bool ok = false;
  double worst_ratio = 0.0;  // smallest admissible constant C
  Vec2 at{};
  int dx = 0, dy = 0;        // derivative order attaining it
  int mu = -1;               // Banach branch: -1 none, 0 xi_1 factor, 1 xi_2 factor
  std::size_t points = 0;
};

// Fits C in |d^theta w(xi)| <= C (1+|xi|)^{-r0} (1+|xi_1|)^{-k1} (1+|xi_2|)^{-k2}, |theta| <= deriv_max.
// The Banach branch also checks 2 pi xi_mu w for mu = 1, 2.
inline DecayReport check_decay(const SpectralWindow& w, const KappaSet& k, int deriv_max,
                               const DecayGrid& grid = {}) {
  if (deriv_max < 0 || deriv_max > k.n0) throw PreconditionError("deriv_max must lie in [0, N0]");
  std::vector<Vec2> pts;
  const int nr = grid.radial, na = grid.angular;
  for (int a = 0; a < na; ++a) {
    const double t = 2.0 * kPi * (a + 0.5) / na;
    for (int r = 0; r < nr; ++r) {
      const double rl = grid.r_max * r / (nr - 1);
      const double rg = 1e-2 * std::pow(grid.r_max / 1e-2, static_cast<double>(r) / (nr - 1));
      pts.push_back({rl * std::cos(t), rl * std::sin(t)});
      pts.push_back({rg * std::cos(t), rg * std::sin(t)});
    }
  }
  if (w.compact()) {
    const Box& b = w.support;
    const int n = 2 * nr;
    for (int a = 0; a <= n; ++a)
      for (int c = 0; c <= n; ++c)
        pts.push_back({b.x0 + (b.x1 - b.x0) * a / n, b.y0 + (b.y1 - b.y0) * c / n});
  }
  DecayReport rep;
  rep.ok = true;
  const int mus = k.branch == KappaBranch::Banach ? 3 : 1;
  for (const Vec2& xi : pts) {
    const double bound = std::pow(1.0 + norm(xi), -k.radial_exponent()) *
                         std::pow(1.0 + std::abs(xi.x), -k.kappa1) *
                         std::pow(1.0 + std::abs(xi.y), -k.kappa2);
    const Jet2 jx = Jet2::var_x(deriv_max, xi.x), jy = Jet2::var_y(deriv_max, xi.y);
    const Jet2 base = w.jet(jx, jy);
    for (int mu = 0; mu < mus; ++mu) {
      const Jet2 f = mu == 0 ? base : (2.0 * kPi) * (mu == 1 ? jx : jy) * base;
      for (int a = 0; a <= deriv_max; ++a)
        for (int b = 0; a + b <= deriv_max; ++b) {
          const double d = std::abs(f.derivative(a, b));
          if (d == 0.0) continue;
          const double ratio = bound > 0.0 ? d / bound : kInf;
          if (!std::isfinite(ratio)) rep.ok = false;
          if (ratio > rep.worst_ratio || !std::isfinite(ratio)) {
            rep.worst_ratio = ratio;
            rep.at = xi;
            rep.dx = a;
            rep.dy = b;
            rep.mu = mus == 1 ? -1 : mu - 1;
          }
        }
    }
  }
  rep.points = pts.size();
  return rep;
}

// ---------------------------------------------------------------------------
// Wave packet system

// gamma^{[i]}(xi) = |det A_j|^{-1/2} gamma^(T_i^{-1}(xi - b_i)); phi^ for the low-pass index.
inline double generator_spectrum(const GeneratorPair& gen, const WPIndex& i, const CoveringSpec& sp, Vec2 xi) {
  if (i.is_zero()) return gen.phi_hat(xi);
  const AffineMap2 m = affine_map(i, sp);
  return gen.gamma_hat(m.inverse().apply(xi)) / std::sqrt(std::abs(m.t.det()));
}

inline Box generator_support(const GeneratorPair& gen, const WPIndex& i, const CoveringSpec& sp) {
  const SpectralWindow& w = i.is_zero() ? gen.phi_hat : gen.gamma_hat;
  if (!w.compact()) throw PreconditionError("generator spectrum must be compactly supported");
  const Rect r{w.support.x0, w.support.x1, w.support.y0, w.support.y1};
  return bounding_box(r, i.is_zero() ? AffineMap2{} : affine_map(i, sp));
}

inline SampledField generator_field(const WPIndex& i, const GeneratorPair& gen, const CoveringSpec& sp,
                                    const Grid2& grid) {
  grid.validate();
  const Box b = generator_support(gen, i, sp);
  const double lo_x = grid.xi_x(0), hi_x = grid.xi_x(grid.nx - 1);
  const double lo_y = grid.xi_y(0), hi_y = grid.xi_y(grid.ny - 1);
  if (b.x0 < lo_x || b.x1 > hi_x || b.y0 < lo_y || b.y1 > hi_y) {
    throw PreconditionError("Nyquist violation: generator " + to_string(i) + " exceeds the grid band");
  }
  return dft_inverse(sample_spectrum(grid, [&](double x, double y) {
    return cplx(generator_spectrum(gen, i, sp, {x, y}), 0.0);
  }));
}

struct CoefficientBlock {
  WPIndex index;
  int k1 = 0, k2 = 0;        // window [-k1, k1] x [-k2, k2]
  std::vector<cplx> values;  // row-major, k1 outer
  cplx& at(int a, int b) { return values[(a + k1) * (2 * k2 + 1) + (b + k2)]; }
  const cplx& at(int a, int b) const { return values[(a + k1) * (2 * k2 + 1) + (b + k2)]; }
};

struct CoefficientTensor {
  CoveringSpec spec;
  int j_max = 1;
  double delta = 0.25;
  Grid2 grid;
  std::vector<CoefficientBlock> blocks;

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.values.size();
    return n;
  }
};

inline double coefficient_norm(const CoefficientTensor& c, const SpaceParams& sp) {
  if (!(sp.p > 0.0) || !(sp.q > 0.0)) throw PreconditionError("p and q must be positive or infinite");
  const double ip = sp.p == kInf ? 0.0 : 1.0 / sp.p;
  const double ex = sp.s + (sp.alpha + sp.beta) * (0.5 - ip);
  std::vector<double> per;
  per.reserve(c.blocks.size());
  for (const auto& b : c.blocks) {
    const double w = b.index.is_zero() ? 1.0 : std::exp2(b.index.j * ex);
    double lp = 0.0;
    if (sp.p == kInf) {
      for (const cplx& z : b.values) lp = std::max(lp, std::abs(z));
    } else if (sp.p == 2.0) {
      for (const cplx& z : b.values) lp += std::norm(z);
      lp = std::sqrt(lp);
    } else {
      for (const cplx& z : b.values) lp += std::pow(std::abs(z), sp.p);
      lp = std::pow(lp, 1.0 / sp.p);
    }
    per.push_back(w * lp);
  }
  return lq_aggregate(per, sp.q);
}

struct FrameOptions {
  double delta = 0.25;
  double window_factor = 1.0;  // lattice points cover window_factor * half_extent
  double band_radius = -1.0;   // spectral projector radius; negative selects the safe radius
                               // larger radii are accepted while the generators cover the band
};

struct ReconstructResult {
  SampledField recon;
  SampledField solution;  // u with S u ~ f
  double rel_error = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
};

class FrameSystem {
 public:
  FrameSystem(GeneratorPair gen, const CoveringSpec& sp, int j_max, const Grid2& grid, FrameOptions opt = {})
      : gen_(std::move(gen)), spec_(sp), j_max_(j_max), grid_(grid), opt_(opt) {
    sp.validate();
    grid.validate();
    if (!(opt.delta > 0.0)) throw PreconditionError("delta must be positive");
    if (!(opt.window_factor > 0.0)) throw PreconditionError("window factor must be positive");
    if (sp.alpha >= 1.0) throw PreconditionError("frames require alpha < 1");
    const WavePacketCovering cov(sp, j_max);
    band_ = opt.band_radius > 0.0 ? opt.band_radius : cov.safe_radius();
    if (band_ > grid.nyquist_radius()) throw PreconditionError("band radius exceeds the grid Nyquist radius");
    const double d = grid.dxi();
    const double r2 = band_ * band_;
    std::vector<double> cover(grid.size(), 0.0);
    for (std::size_t k = 0; k < cov.size(); ++k) {
      Atom at;
      at.index = cov.index(k);
      const AffineMap2 m = at.index.is_zero() ? AffineMap2{} : affine_map(at.index, sp);
      at.tinv = m.t.inverse();
      const Box b = generator_support(gen_, at.index, sp);
      const long gx0 = std::max<long>(0, static_cast<long>(std::ceil(b.x0 / d + grid.nx / 2.0)));
      const long gx1 = std::min<long>(grid.nx - 1, static_cast<long>(std::floor(b.x1 / d + grid.nx / 2.0)));
      const long gy0 = std::max<long>(0, static_cast<long>(std::ceil(b.y0 / d + grid.ny / 2.0)));
      const long gy1 = std::min<long>(grid.ny - 1, static_cast<long>(std::floor(b.y1 / d + grid.ny / 2.0)));
      long bx0 = gx1 + 1, bx1 = gx0 - 1, by0 = gy1 + 1, by1 = gy0 - 1;
      for (long gy = gy0; gy <= gy1; ++gy)
        for (long gx = gx0; gx <= gx1; ++gx) {
          const double ex = grid.xi_x(gx), ey = grid.xi_y(gy);
          if (ex * ex + ey * ey > r2) continue;
          const double v = generator_spectrum(gen_, at.index, sp, {ex, ey});
          if (v == 0.0) continue;
          at.g.push_back(static_cast<std::uint32_t>(gy * grid.nx + gx));
          at.gh.push_back(v);
          cover[gy * grid.nx + gx] += v * v;
          const Vec2 u = at.tinv * Vec2{ex, ey};
          at.u1.push_back(opt.delta * u.x);
          at.u2.push_back(opt.delta * u.y);
          bx0 = std::min(bx0, gx);
          bx1 = std::max(bx1, gx);
          by0 = std::min(by0, gy);
          by1 = std::max(by1, gy);
        }
      if (at.g.empty()) continue;
      at.bx = bx0;
      at.by = by0;
      at.mx = bx1 - bx0 + 1;
      at.my = by1 - by0 + 1;
      const double reach = opt.window_factor * grid.half_extent / opt.delta;
      // |k| = |T^t y| / delta for y in the box [-cL, cL]^2.
      at.k1 = static_cast<int>(std::ceil(reach * (std::abs(m.t.a) + std::abs(m.t.c)) - 1e-9));
      at.k2 = static_cast<int>(std::ceil(reach * (std::abs(m.t.b) + std::abs(m.t.d)) - 1e-9));
      atoms_.push_back(std::move(at));
    }
    for (std::size_t gy = 0; gy < grid.ny; ++gy)
      for (std::size_t gx = 0; gx < grid.nx; ++gx) {
        const double ex = grid.xi_x(gx), ey = grid.xi_y(gy);
        if (ex * ex + ey * ey > r2) continue;
        const double c = cover[gy * grid.nx + gx];
        min_cover_ = std::min(min_cover_, c);
        max_cover_ = std::max(max_cover_, c);
      }
    if (!(min_cover_ >= kMinCover)) {
      throw PreconditionError("generators do not cover the frame band: min sum |gamma|^2 = " +
                              std::to_string(min_cover_));
    }
  }

  // Range of sum_i |gamma_i^|^2 over the band.
  double min_cover() const { return min_cover_; }
  double max_cover() const { return max_cover_; }

  const CoveringSpec& spec() const { return spec_; }
  const Grid2& grid() const { return grid_; }
  double delta() const { return opt_.delta; }
  double band_radius() const { return band_; }
  std::size_t atom_count() const { return atoms_.size(); }
  std::size_t coefficient_count() const {
    std::size_t n = 0;
    for (const Atom& a : atoms_) n += static_cast<std::size_t>(2 * a.k1 + 1) * (2 * a.k2 + 1);
    return n;
  }

  // Fraction of spectral energy outside the band disc.
  double band_leakage(const SpectralField& s) const {
    double out = 0.0, tot = 0.0;
    for (std::size_t gy = 0; gy < grid_.ny; ++gy)
      for (std::size_t gx = 0; gx < grid_.nx; ++gx) {
        const double e = std::norm(s.at(gx, gy));
        tot += e;
        if (std::hypot(grid_.xi_x(gx), grid_.xi_y(gy)) > band_) out += e;
      }
    return tot > 0.0 ? out / tot : 0.0;
  }

  CoefficientTensor analysis(const SpectralField& f) const {
    check_grid(f.grid);
    CoefficientTensor c = empty_tensor();
    const double cell = grid_.dxi() * grid_.dxi();
    for (std::size_t n = 0; n < atoms_.size(); ++n) {
      const Atom& at = atoms_[n];
      CoefficientBlock& blk = c.blocks[n];
      const int n1 = 2 * at.k1 + 1, n2 = 2 * at.k2 + 1;
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n1, n2);
      for_chunks(at, [&](std::size_t g0, std::size_t g1) {
        const Eigen::MatrixXcd u = exp_table(at.u1, g0, g1, at.k1);
        const Eigen::MatrixXcd v = exp_table(at.u2, g0, g1, at.k2);
        Eigen::VectorXcd a(g1 - g0);
        for (std::size_t g = g0; g < g1; ++g) a[g - g0] = f.values[at.g[g]] * at.gh[g] * cell;
        acc.noalias() += (u * a.asDiagonal()) * v.transpose();
      });
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) blk.values[i * n2 + j] = acc(i, j);
    }
    return c;
  }
  CoefficientTensor analysis(const SampledField& f) const { return analysis(dft_forward(f)); }

  SpectralField synthesis_spectrum(const CoefficientTensor& c) const {
    if (c.blocks.size() != atoms_.size()) throw PreconditionError("coefficient tensor does not match the system");
    SpectralField out(grid_);
    for (std::size_t n = 0; n < atoms_.size(); ++n) {
      const Atom& at = atoms_[n];
      const CoefficientBlock& blk = c.blocks[n];
      if (blk.k1 != at.k1 || blk.k2 != at.k2 || !(blk.index == at.index)) {
        throw PreconditionError("coefficient block does not match the system");
      }
      const int n1 = 2 * at.k1 + 1, n2 = 2 * at.k2 + 1;
      const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> cm(
          blk.values.data(), n1, n2);
      for_chunks(at, [&](std::size_t g0, std::size_t g1) {
        const Eigen::MatrixXcd u = exp_table(at.u1, g0, g1, at.k1);
        const Eigen::MatrixXcd v = exp_table(at.u2, g0, g1, at.k2);
        const Eigen::MatrixXcd m = cm * v.conjugate();
        const Eigen::RowVectorXcd s = u.conjugate().cwiseProduct(m).colwise().sum();
        for (std::size_t g = g0; g < g1; ++g) out.values[at.g[g]] += at.gh[g] * s[g - g0];
      });
    }
    return out;
  }
  SampledField synthesis(const CoefficientTensor& c) const { return dft_inverse(synthesis_spectrum(c)); }

  // S = synthesis o analysis, evaluated as per-atom convolutions with Dirichlet kernels.
  SpectralField frame_operator(const SpectralField& f) const {
    check_grid(f.grid);
    prepare_kernels();
    SpectralField out(grid_);
    const double cell = grid_.dxi() * grid_.dxi();
    std::vector<cplx> buf, res;
    for (std::size_t n = 0; n < atoms_.size(); ++n) {
      const Atom& at = atoms_[n];
      const Kernel& ker = kernels_[n];
      buf.assign(ker.px * ker.py, cplx(0.0));
      res.resize(buf.size());
      for (std::size_t g = 0; g < at.g.size(); ++g) {
        buf[local(at, ker, at.g[g])] = f.values[at.g[g]] * at.gh[g];
      }
      raw_dft2(ker.px, ker.py, buf.data(), res.data(), true);
      for (std::size_t t = 0; t < res.size(); ++t) res[t] *= ker.spectrum[t];
      raw_dft2(ker.px, ker.py, res.data(), buf.data(), false);
      const double sc = cell / static_cast<double>(ker.px * ker.py);
      for (std::size_t g = 0; g < at.g.size(); ++g) {
        out.values[at.g[g]] += at.gh[g] * sc * buf[local(at, ker, at.g[g])];
      }
    }
    return out;
  }

  // CG on S u = f over the band; keeps the iterate with the smallest residual.
  ReconstructResult reconstruct(const SampledField& field, int cg_iters = 200, double tol = 1e-10) const {
    const SpectralField f = dft_forward(field);
    const double leak = band_leakage(f);
    if (leak > kLeakageTolerance) {
      throw PreconditionError("field not band-limited to the frame band: leakage " + std::to_string(leak));
    }
    SpectralField fb = project(f);
    ReconstructResult res;
    const double fn = l2(fb);
    if (fn == 0.0) {
      res.recon = SampledField(grid_);
      res.solution = SampledField(grid_);
      res.converged = true;
      return res;
    }
    SpectralField x(grid_), r = fb, p = fb, best = x;
    double rr = dot(r, r).real(), best_r = std::sqrt(rr);
    res.residual_history.push_back(best_r / fn);
    for (int it = 0; it < cg_iters && best_r > tol * fn; ++it) {
      const SpectralField ap = frame_operator(p);
      const cplx pap = dot(p, ap);
      if (!(pap.real() > 0.0)) break;
      const cplx a = rr / pap;
      for (std::size_t k = 0; k < x.values.size(); ++k) {
        x.values[k] += a * p.values[k];
        r.values[k] -= a * ap.values[k];
      }
      const double rr_new = dot(r, r).real();
      res.iterations = it + 1;
      const double rn = std::sqrt(rr_new);
      res.residual_history.push_back(rn / fn);
      if (rn < best_r) {
        best_r = rn;
        best = x;
      }
      const double b = rr_new / rr;
      rr = rr_new;
      for (std::size_t k = 0; k < p.values.size(); ++k) p.values[k] = r.values[k] + b * p.values[k];
    }
    const SpectralField sx = frame_operator(best);
    double err = 0.0;
    for (std::size_t k = 0; k < sx.values.size(); ++k) err += std::norm(sx.values[k] - fb.values[k]);
    res.rel_error = std::sqrt(err) / fn;
    res.converged = res.rel_error <= tol * 10.0;
    res.recon = dft_inverse(sx);
    res.solution = dft_inverse(best);
    return res;
  }

  // Energy fraction of coefficients whose lattice point lies within `margin` of the window edge.
  double window_edge_fraction(const CoefficientTensor& c, double margin = 0.1) const {
    const double lim = (1.0 - margin) * opt_.window_factor * grid_.half_extent;
    double out = 0.0, tot = 0.0;
    for (std::size_t n = 0; n < atoms_.size(); ++n) {
      const Atom& at = atoms_[n];
      const Mat2 tit = at.tinv.transpose();
      for (int a = -at.k1; a <= at.k1; ++a)
        for (int b = -at.k2; b <= at.k2; ++b) {
          const double e = std::norm(c.blocks[n].at(a, b));
          tot += e;
          const Vec2 y = tit * Vec2{opt_.delta * a, opt_.delta * b};
          if (std::max(std::abs(y.x), std::abs(y.y)) > lim) out += e;
        }
    }
    return tot > 0.0 ? out / tot : 0.0;
  }

  CoefficientTensor empty_tensor() const {
    CoefficientTensor c;
    c.spec = spec_;
    c.j_max = j_max_;
    c.delta = opt_.delta;
    c.grid = grid_;
    for (const Atom& at : atoms_) {
      CoefficientBlock b;
      b.index = at.index;
      b.k1 = at.k1;
      b.k2 = at.k2;
      b.values.assign(static_cast<std::size_t>(2 * at.k1 + 1) * (2 * at.k2 + 1), cplx(0.0));
      c.blocks.push_back(std::move(b));
    }
    return c;
  }

  // Block position of an index, if it has band content.
  std::optional<std::size_t> block_of(const WPIndex& i) const {
    for (std::size_t n = 0; n < atoms_.size(); ++n)
      if (atoms_[n].index == i) return n;
    return std::nullopt;
  }

  SpectralField project(const SpectralField& f) const {
    SpectralField out = f;
    for (std::size_t gy = 0; gy < grid_.ny; ++gy)
      for (std::size_t gx = 0; gx < grid_.nx; ++gx)
        if (std::hypot(grid_.xi_x(gx), grid_.xi_y(gy)) > band_) out.at(gx, gy) = 0.0;
    return out;
  }

 private:
  struct Atom {
    WPIndex index;
    Mat2 tinv;
    std::vector<std::uint32_t> g;
    std::vector<double> gh, u1, u2;
    long bx = 0, by = 0, mx = 0, my = 0;
    int k1 = 0, k2 = 0;
  };
  struct Kernel {
    std::uint32_t px = 0, py = 0;
    std::vector<cplx> spectrum;
  };

  static constexpr std::size_t kChunk = 2048;
  static constexpr double kMinCover = 1e-3;

  template <typename F>
  static void for_chunks(const Atom& at, F&& f) {
    for (std::size_t g0 = 0; g0 < at.g.size(); g0 += kChunk) f(g0, std::min(at.g.size(), g0 + kChunk));
  }

  // rows k = -K..K, columns g: exp(2 pi i k u_g)
  static Eigen::MatrixXcd exp_table(const std::vector<double>& u, std::size_t g0, std::size_t g1, int kk) {
    Eigen::MatrixXcd t(2 * kk + 1, static_cast<Eigen::Index>(g1 - g0));
    for (std::size_t g = g0; g < g1; ++g) {
      const double ph = 2.0 * kPi * u[g];
      const cplx step = std::polar(1.0, ph);
      cplx w = std::polar(1.0, -ph * kk);
      for (int k = 0; k <= 2 * kk; ++k) {
        // Re-anchor periodically to bound recurrence drift.
        if (k % 64 == 0) w = std::polar(1.0, ph * (k - kk));
        t(k, static_cast<Eigen::Index>(g - g0)) = w;
        w *= step;
      }
    }
    return t;
  }

  static double dirichlet(int kk, double t) {
    const double s = std::sin(kPi * t);
    if (std::abs(s) < 1e-13) return 2.0 * kk + 1.0;
    return std::sin((2.0 * kk + 1.0) * kPi * t) / s;
  }

  std::size_t local(const Atom& at, const Kernel& k, std::uint32_t g) const {
    const long gx = g % grid_.nx, gy = g / grid_.nx;
    return static_cast<std::size_t>(gy - at.by) * k.px + static_cast<std::size_t>(gx - at.bx);
  }

  void prepare_kernels() const {
    std::call_once(*kernel_once_, [this] {
      kernels_.resize(atoms_.size());
      const double d = grid_.dxi();
      for (std::size_t n = 0; n < atoms_.size(); ++n) {
        const Atom& at = atoms_[n];
        Kernel& k = kernels_[n];
        k.px = static_cast<std::uint32_t>(2 * at.mx);
        k.py = static_cast<std::uint32_t>(2 * at.my);
        std::vector<cplx> ker(static_cast<std::size_t>(k.px) * k.py, cplx(0.0));
        for (long oy = -(at.my - 1); oy <= at.my - 1; ++oy)
          for (long ox = -(at.mx - 1); ox <= at.mx - 1; ++ox) {
            const Vec2 z = at.tinv * Vec2{ox * d, oy * d};
            const double v = dirichlet(at.k1, opt_.delta * z.x) * dirichlet(at.k2, opt_.delta * z.y);
            const std::size_t ix = static_cast<std::size_t>((ox + k.px) % k.px);
            const std::size_t iy = static_cast<std::size_t>((oy + k.py) % k.py);
            ker[iy * k.px + ix] = v;
          }
        k.spectrum.resize(ker.size());
        raw_dft2(k.px, k.py, ker.data(), k.spectrum.data(), true);
      }
    });
  }

  void check_grid(const Grid2& g) const {
    if (!(g == grid_)) throw PreconditionError("field grid differs from the frame grid");
  }

  static cplx dot(const SpectralField& a, const SpectralField& b) {
    cplx s = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) s += std::conj(a.values[k]) * b.values[k];
    return s;
  }
  static double l2(const SpectralField& a) { return std::sqrt(dot(a, a).real()); }

  GeneratorPair gen_;
  CoveringSpec spec_;
  int j_max_;
  Grid2 grid_;
  FrameOptions opt_;
  double band_ = 0.0;
  double min_cover_ = kInf, max_cover_ = 0.0;
  std::vector<Atom> atoms_;
  mutable std::vector<Kernel> kernels_;
  mutable std::shared_ptr<std::once_flag> kernel_once_ = std::make_shared<std::once_flag>();
};

}  // namespace wavepacket
