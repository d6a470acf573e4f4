// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "wavepacket/covering.hpp"
#include "wavepacket/fields.hpp"
#include "wavepacket/partition.hpp"

namespace wavepacket {

struct SpaceParams {
  double alpha = 1.0, beta = 1.0;
  double p = 2.0, q = 2.0;
  double s = 0.0;

  void validate() const {
    CoveringSpec{alpha, beta}.validate();
    if (!(p > 0.0) || !(q > 0.0)) throw PreconditionError("p and q must be positive or infinite");
  }
};

// Partition values phi_i rasterized on the centred frequency grid inside the safe disc.
class SpectralPartition {
 public:
  struct Entry {
    std::uint32_t idx;
    double phi;
  };

  SpectralPartition(const Partition& part, const Grid2& grid)
      : cov_(part.covering_ptr()), grid_(grid), safe_(part.safe_radius()) {
    grid.validate();
    entries_.resize(cov_->size());
    std::vector<double> den(grid.size(), 0.0);
    const double d = grid.dxi();
    const double r2 = safe_ * safe_;
    for (std::size_t k = 0; k < cov_->size(); ++k) {
      const Patch& p = cov_->patch(k);
      const Box bb = bounding_box(p.outer, p.map);
      const long gx0 = std::max<long>(0, static_cast<long>(std::ceil(bb.x0 / d + grid.nx / 2.0)));
      const long gx1 = std::min<long>(grid.nx - 1, static_cast<long>(std::floor(bb.x1 / d + grid.nx / 2.0)));
      const long gy0 = std::max<long>(0, static_cast<long>(std::ceil(bb.y0 / d + grid.ny / 2.0)));
      const long gy1 = std::min<long>(grid.ny - 1, static_cast<long>(std::floor(bb.y1 / d + grid.ny / 2.0)));
      for (long gy = gy0; gy <= gy1; ++gy) {
        const double ey = grid.xi_y(gy);
        for (long gx = gx0; gx <= gx1; ++gx) {
          const double ex = grid.xi_x(gx);
          if (ex * ex + ey * ey > r2) continue;
          const double t = part.theta(k, {ex, ey});
          if (t <= 0.0) continue;
          const auto idx = static_cast<std::uint32_t>(gy * grid.nx + gx);
          entries_[k].push_back({idx, t});
          den[idx] += t;
        }
      }
    }
    for (auto& list : entries_) {
      for (Entry& e : list) e.phi /= den[e.idx];
    }
    for (std::size_t gy = 0; gy < grid.ny; ++gy)
      for (std::size_t gx = 0; gx < grid.nx; ++gx) {
        const double ex = grid.xi_x(gx), ey = grid.xi_y(gy);
        if (ex * ex + ey * ey <= r2 && den[gy * grid.nx + gx] < 1.0) {
          throw Error("partition denominator below 1 inside the safe region");
        }
      }
  }

  const Covering& covering() const { return *cov_; }
  const Grid2& grid() const { return grid_; }
  double safe_radius() const { return safe_; }
  const std::vector<Entry>& entries(std::size_t k) const { return entries_.at(k); }

  // Fraction of spectral energy outside the safe disc.
  double leakage(const SpectralField& s) const {
    double out = 0.0, tot = 0.0;
    const double r2 = safe_ * safe_;
    for (std::size_t gy = 0; gy < grid_.ny; ++gy)
      for (std::size_t gx = 0; gx < grid_.nx; ++gx) {
        const double e = std::norm(s.values[gy * grid_.nx + gx]);
        tot += e;
        const double ex = grid_.xi_x(gx), ey = grid_.xi_y(gy);
        if (ex * ex + ey * ey > r2) out += e;
      }
    return tot > 0.0 ? out / tot : 0.0;
  }

 private:
  std::shared_ptr<const Covering> cov_;
  Grid2 grid_;
  double safe_;
  std::vector<std::vector<Entry>> entries_;
};

struct NormBreakdown {
  std::vector<double> contributions;  // w_i * ||F^{-1}(phi_i g^)||_p, patch order
  std::vector<int> levels;
  std::map<int, double> level_norms;  // l^q aggregate per level
  double norm = 0.0;
  double leakage = 0.0;
};

inline double lq_aggregate(const std::vector<double>& v, double q) {
  if (q == kInf) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(x, q);
  return std::pow(s, 1.0 / q);
}

inline constexpr double kLeakageTolerance = 1e-9;

inline NormBreakdown decomposition_norm(const SpectralField& spec, const SpectralPartition& raster,
                                        const std::vector<double>& weights, double p, double q) {
  if (!(spec.grid == raster.grid())) throw PreconditionError("field grid differs from partition grid");
  if (weights.size() != raster.covering().size()) throw PreconditionError("one weight per index required");
  if (!(p > 0.0) || !(q > 0.0)) throw PreconditionError("p and q must be positive or infinite");
  NormBreakdown out;
  out.leakage = raster.leakage(spec);
  if (out.leakage > kLeakageTolerance) {
    throw PreconditionError("spectral energy beyond the safe region: leakage " +
                            std::to_string(out.leakage));
  }
  const Grid2& g = spec.grid;
  const double cell_x = g.dx() * g.dy(), cell_xi = g.dxi() * g.dxi();
  const std::size_t hx = g.nx / 2, hy = g.ny / 2;
  std::vector<cplx> buf, res;
  const Covering& cov = raster.covering();
  out.contributions.assign(cov.size(), 0.0);
  out.levels.resize(cov.size());
  for (std::size_t k = 0; k < cov.size(); ++k) {
    out.levels[k] = cov.patch(k).level;
    const auto& es = raster.entries(k);
    double nrm = 0.0;
    bool any = false;
    for (const auto& e : es) any = any || spec.values[e.idx] != cplx(0.0);
    if (!any) continue;
    if (p == 2.0) {
      double acc = 0.0;
      for (const auto& e : es) acc += std::norm(e.phi * spec.values[e.idx]);
      nrm = std::sqrt(acc * cell_xi);
    } else {
      buf.assign(g.size(), cplx(0.0));
      for (const auto& e : es) {
        const std::size_t gx = e.idx % g.nx, gy = e.idx / g.nx;
        buf[e.idx] = e.phi * spec.values[e.idx] * detail::parity(gx + gy + hx + hy);
      }
      res.resize(g.size());
      raw_dft2(g.nx, g.ny, buf.data(), res.data(), false);
      // |parity| = 1, so only the overall scale matters for the modulus.
      const double sc = cell_xi;
      for (cplx& z : res) z *= sc;
      nrm = lp_norm_values(res, cell_x, p);
    }
    out.contributions[k] = weights[k] * nrm;
  }
  out.norm = lq_aggregate(out.contributions, q);
  std::map<int, std::vector<double>> per;
  for (std::size_t k = 0; k < cov.size(); ++k) per[out.levels[k]].push_back(out.contributions[k]);
  for (auto& [lvl, v] : per) out.level_norms[lvl] = lq_aggregate(v, q);
  return out;
}

// Covering + partition + raster for one grid; reusable across a field battery.
class NormEngine {
 public:
  NormEngine(std::shared_ptr<const Covering> cov, const Grid2& grid,
             BumpProfile prof = BumpProfile::Exp)
      : part_(std::move(cov), prof), raster_(part_, grid) {}

  const Covering& covering() const { return part_.covering(); }
  const Partition& partition() const { return part_; }
  const SpectralPartition& raster() const { return raster_; }

  std::vector<double> weights(double s) const {
    std::vector<double> w;
    for (const Patch& p : covering().patches()) w.push_back(covering().weight(p, s));
    return w;
  }

  NormBreakdown breakdown(const SpectralField& spec, double p, double q, double s) const {
    return decomposition_norm(spec, raster_, weights(s), p, q);
  }
  double norm(const SpectralField& spec, double p, double q, double s) const {
    return breakdown(spec, p, q, s).norm;
  }
  double norm(const SampledField& f, double p, double q, double s) const {
    return norm(dft_forward(f), p, q, s);
  }

 private:
  Partition part_;
  SpectralPartition raster_;
};

inline double wp_norm(const SampledField& f, const SpaceParams& sp, int j_max,
                      BumpProfile prof = BumpProfile::Exp) {
  sp.validate();
  auto cov = std::make_shared<WavePacketCovering>(CoveringSpec{sp.alpha, sp.beta}, j_max);
  return NormEngine(cov, f.grid, prof).norm(f, sp.p, sp.q, sp.s);
}

inline double besov_norm(const SampledField& f, double p, double q, double s, int n_max,
                         BumpProfile prof = BumpProfile::Exp) {
  return NormEngine(std::make_shared<BesovCovering>(n_max), f.grid, prof).norm(f, p, q, s);
}

inline std::shared_ptr<const Covering> alpha_mod_covering(double alpha, int trunc) {
  if (alpha == 1.0) return std::make_shared<BesovCovering>(trunc);
  return std::make_shared<AlphaModulationCovering>(alpha, trunc);
}

inline double alpha_mod_norm(const SampledField& f, double alpha, double p, double q, double s,
                             int trunc, BumpProfile prof = BumpProfile::Exp) {
  return NormEngine(alpha_mod_covering(alpha, trunc), f.grid, prof).norm(f, p, q, s);
}

// Field whose spectrum is the base bump pulled back to Q_i.
inline SampledField patch_field(const WPIndex& i, const CoveringSpec& sp, const Grid2& g,
                                BumpProfile prof = BumpProfile::Exp) {
  const AffineMap2 inv = affine_map(i, sp).inverse();
  const Shape outer = outer_shape(i, sp), inner = inner_shape(i);
  const Box bb = bounding_box(outer, affine_map(i, sp));
  if (std::max({std::abs(bb.x0), std::abs(bb.x1), std::abs(bb.y0), std::abs(bb.y1)}) >= g.nyquist_radius()) {
    throw PreconditionError("Nyquist violation: patch " + to_string(i) + " exceeds the grid band");
  }
  return dft_inverse(sample_spectrum(g, [&](double x, double y) {
    return cplx(base_bump(outer, inner, inv.apply({x, y}), prof), 0.0);
  }));
}

// ---------------------------------------------------------------------------
// Linear change of variables f -> f o B on the sampling grid

namespace detail {

// Trigonometric interpolant of n samples (spacing h, first sample at t0), extended by
// zero outside [t0, t0 + n h).
class TrigLine {
 public:
  TrigLine(const cplx* v, std::size_t stride, std::uint32_t n, double t0, double h)
      : n_(n), t0_(t0), period_(n * h), spec_(n) {
    std::vector<cplx> in(n);
    for (std::uint32_t k = 0; k < n; ++k) in[k] = v[k * stride] * parity(k);
    raw_dft2(n, 1, in.data(), spec_.data(), true);
    for (cplx& z : spec_) z /= static_cast<double>(n);
  }
  cplx operator()(double t) const {
    const double u = (t - t0_) / period_;
    if (u < 0.0 || u >= 1.0) return 0.0;
    const cplx step = std::polar(1.0, 2.0 * kPi * u);
    cplx w = std::polar(1.0, -kPi * n_ * u);
    cplx acc = 0.0;
    for (std::uint32_t k = 0; k < n_; ++k) {
      acc += spec_[k] * w;
      w *= step;
    }
    return acc;
  }

 private:
  std::uint32_t n_;
  double t0_, period_;
  std::vector<cplx> spec_;
};

// Energy fraction in the outer band |xi|_inf > frac * Nyquist.
inline double edge_energy(const SampledField& f, double frac) {
  const SpectralField s = dft_forward(f);
  const Grid2& g = f.grid;
  const double lim = frac * g.nyquist_radius();
  double out = 0.0, tot = 0.0;
  for (std::size_t gy = 0; gy < g.ny; ++gy)
    for (std::size_t gx = 0; gx < g.nx; ++gx) {
      const double e = std::norm(s.at(gx, gy));
      tot += e;
      if (std::max(std::abs(g.xi_x(gx)), std::abs(g.xi_y(gy))) > lim) out += e;
    }
  return tot > 0.0 ? out / tot : 0.0;
}

inline SampledField transpose(const SampledField& f) {
  SampledField t(Grid2{f.grid.ny, f.grid.nx, f.grid.half_extent});
  for (std::size_t iy = 0; iy < f.grid.ny; ++iy)
    for (std::size_t ix = 0; ix < f.grid.nx; ++ix) t.at(iy, ix) = f.at(ix, iy);
  return t;
}

}  // namespace detail

// Samples x -> f(Bx) using the band-limited interpolant of f, via a column pass and a
// row pass. Throws if an intermediate or the result carries energy near the Nyquist edge.
inline SampledField compose_linear(const SampledField& f, const Mat2& b, double edge_tol = 1e-9) {
  const Grid2& g = f.grid;
  if (g.nx != g.ny) throw PreconditionError("compose_linear requires a square grid");
  if (b.det() == 0.0) throw PreconditionError("B must be invertible");
  if (std::abs(b.a) < 1e-12 * b.op_norm()) {
    // f(Bx) = f~(B'x) with f~ the transpose and B' = [[c, d], [0, b]].
    return compose_linear(detail::transpose(f), Mat2{b.c, b.d, 0.0, b.b}, edge_tol);
  }
  const double h = g.dx();
  const double ca = b.c / b.a, da = b.det() / b.a;
  SampledField mid(g), out(g);
  for (std::size_t ix = 0; ix < g.nx; ++ix) {
    const detail::TrigLine col(&f.samples[ix], g.nx, g.ny, g.y(0), h);
    const double y1 = g.x(ix);
    for (std::size_t iy = 0; iy < g.ny; ++iy) mid.at(ix, iy) = col(ca * y1 + da * g.y(iy));
  }
  if (detail::edge_energy(mid, 0.9) > edge_tol) throw Error("resampling aliasing in column pass");
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    const detail::TrigLine row(&mid.samples[iy * g.nx], 1, g.nx, g.x(0), h);
    const double x2 = g.y(iy);
    for (std::size_t ix = 0; ix < g.nx; ++ix) out.at(ix, iy) = row(b.a * g.x(ix) + b.b * x2);
  }
  if (detail::edge_energy(out, 0.9) > edge_tol) throw Error("resampling aliasing in row pass");
  return out;
}

inline double dilation_ratio(const SampledField& f, const SpaceParams& sp, const Mat2& b, int j_max) {
  sp.validate();
  auto cov = std::make_shared<WavePacketCovering>(CoveringSpec{sp.alpha, sp.beta}, j_max);
  const NormEngine eng(cov, f.grid);
  const double base = eng.norm(f, sp.p, sp.q, sp.s);
  if (b.a == 1.0 && b.b == 0.0 && b.c == 0.0 && b.d == 1.0) return 1.0;
  return eng.norm(compose_linear(f, b), sp.p, sp.q, sp.s) / base;
}

}  // namespace wavepacket
