// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "wavepacket/core.hpp"

namespace wavepacket {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform square-cell grid on [-L, L)^2 and its centred frequency grid.
struct Grid2 {
  std::uint32_t nx = 0, ny = 0;
  double half_extent = 1.0;

  double dx() const { return 2.0 * half_extent / nx; }
  double dy() const { return 2.0 * half_extent / ny; }
  double dxi() const { return 1.0 / (2.0 * half_extent); }
  double x(std::size_t ix) const { return -half_extent + static_cast<double>(ix) * dx(); }
  double y(std::size_t iy) const { return -half_extent + static_cast<double>(iy) * dy(); }
  double xi_x(std::size_t gx) const { return (static_cast<double>(gx) - nx / 2.0) * dxi(); }
  double xi_y(std::size_t gy) const { return (static_cast<double>(gy) - ny / 2.0) * dxi(); }
  // Largest frequency radius fully inside the sampled box.
  double nyquist_radius() const { return std::min(nx, ny) / 2.0 * dxi(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }

  void validate() const {
    auto pow2 = [](std::uint32_t n) { return n >= 2 && std::has_single_bit(n); };
    if (!pow2(nx) || !pow2(ny)) throw PreconditionError("grid sizes must be powers of two >= 2");
    if (!(half_extent > 0.0) || !std::isfinite(half_extent)) {
      throw PreconditionError("half extent must be positive and finite");
    }
  }
  friend bool operator==(const Grid2&, const Grid2&) = default;
};

// Samples, row-major with y outer and x inner.
struct SampledField {
  Grid2 grid;
  std::vector<cplx> samples;

  SampledField() = default;
  explicit SampledField(Grid2 g) : grid(g), samples(g.size()) { g.validate(); }
  cplx& at(std::size_t ix, std::size_t iy) { return samples[iy * grid.nx + ix]; }
  const cplx& at(std::size_t ix, std::size_t iy) const { return samples[iy * grid.nx + ix]; }
};

// Values approximating the continuous transform on the centred frequency grid.
struct SpectralField {
  Grid2 grid;
  std::vector<cplx> values;

  SpectralField() = default;
  explicit SpectralField(Grid2 g) : grid(g), values(g.size()) { g.validate(); }
  cplx& at(std::size_t gx, std::size_t gy) { return values[gy * grid.nx + gx]; }
  const cplx& at(std::size_t gx, std::size_t gy) const { return values[gy * grid.nx + gx]; }
};

namespace detail {

class FftPlans {
 public:
  FftPlans(std::uint32_t nx, std::uint32_t ny) {
    std::vector<fftw_complex> a(std::size_t(nx) * ny), b(std::size_t(nx) * ny);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_2d(int(ny), int(nx), a.data(), b.data(), FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft_2d(int(ny), int(nx), a.data(), b.data(), FFTW_BACKWARD, flags);
    if (!fwd_ || !bwd_) throw Error("FFTW planning failed");
  }
  ~FftPlans() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  void forward(const cplx* in, cplx* out) const { run(fwd_, in, out); }
  void backward(const cplx* in, cplx* out) const { run(bwd_, in, out); }

 private:
  static void run(fftw_plan p, const cplx* in, cplx* out) {
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

// Plans are cached per size; planning is not thread safe in FFTW.
inline const FftPlans& fft_plans(std::uint32_t nx, std::uint32_t ny) {
  static std::mutex mu;
  static std::map<std::pair<std::uint32_t, std::uint32_t>, std::unique_ptr<FftPlans>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nx, ny}];
  if (!slot) slot = std::make_unique<FftPlans>(nx, ny);
  return *slot;
}

inline double parity(std::size_t n) { return (n & 1u) ? -1.0 : 1.0; }

}  // namespace detail

// Unnormalized plain DFT of a row-major nx-by-ny array (exponent sign per `forward`).
inline void raw_dft2(std::uint32_t nx, std::uint32_t ny, const cplx* in, cplx* out, bool forward) {
  const auto& p = detail::fft_plans(nx, ny);
  forward ? p.forward(in, out) : p.backward(in, out);
}

inline SpectralField dft_forward(const SampledField& f) {
  const Grid2& g = f.grid;
  g.validate();
  std::vector<cplx> tmp(g.size());
  for (std::size_t iy = 0; iy < g.ny; ++iy)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      tmp[iy * g.nx + ix] = f.samples[iy * g.nx + ix] * detail::parity(ix + iy);
  SpectralField out(g);
  raw_dft2(g.nx, g.ny, tmp.data(), out.values.data(), true);
  const double scale = g.dx() * g.dy();
  const std::size_t hx = g.nx / 2, hy = g.ny / 2;
  for (std::size_t gy = 0; gy < g.ny; ++gy)
    for (std::size_t gx = 0; gx < g.nx; ++gx)
      out.values[gy * g.nx + gx] *= scale * detail::parity(gx + gy + hx + hy);
  return out;
}

inline SampledField dft_inverse(const SpectralField& s) {
  const Grid2& g = s.grid;
  g.validate();
  const std::size_t hx = g.nx / 2, hy = g.ny / 2;
  std::vector<cplx> tmp(g.size());
  for (std::size_t gy = 0; gy < g.ny; ++gy)
    for (std::size_t gx = 0; gx < g.nx; ++gx)
      tmp[gy * g.nx + gx] = s.values[gy * g.nx + gx] * detail::parity(gx + gy + hx + hy);
  SampledField out(g);
  raw_dft2(g.nx, g.ny, tmp.data(), out.samples.data(), false);
  const double scale = g.dxi() * g.dxi();
  for (std::size_t iy = 0; iy < g.ny; ++iy)
    for (std::size_t ix = 0; ix < g.nx; ++ix)
      out.samples[iy * g.nx + ix] *= scale * detail::parity(ix + iy);
  return out;
}

// Discrete L^p (quasi-)norm of samples with cell area weights; p = kInf for the max.
inline double lp_norm_values(const std::vector<cplx>& v, double cell, double p) {
  if (!(p > 0.0)) throw PreconditionError("p must be positive or infinite");
  if (p == kInf) {
    double m = 0.0;
    for (const cplx& z : v) m = std::max(m, std::abs(z));
    return m;
  }
  double s = 0.0;
  if (p == 2.0) {
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(s * cell);
  }
  if (p == 1.0) {
    for (const cplx& z : v) s += std::abs(z);
    return s * cell;
  }
  for (const cplx& z : v) s += std::pow(std::abs(z), p);
  return std::pow(s * cell, 1.0 / p);
}

// Sums in ascending magnitude, so the result is invariant under any permutation of
// the samples (in particular grid shifts).
inline double lp_norm(const SampledField& f, double p) {
  std::vector<cplx> v = f.samples;
  std::sort(v.begin(), v.end(), [](const cplx& a, const cplx& b) { return std::norm(a) < std::norm(b); });
  return lp_norm_values(v, f.grid.dx() * f.grid.dy(), p);
}

inline double spectral_l2(const SpectralField& s) {
  return lp_norm_values(s.values, s.grid.dxi() * s.grid.dxi(), 2.0);
}

inline double hs_norm_spectrum(const SpectralField& s, double sm) {
  const Grid2& g = s.grid;
  double acc = 0.0;
  for (std::size_t gy = 0; gy < g.ny; ++gy) {
    const double ey = g.xi_y(gy);
    for (std::size_t gx = 0; gx < g.nx; ++gx) {
      const double ex = g.xi_x(gx);
      acc += std::pow(1.0 + ex * ex + ey * ey, sm) * std::norm(s.values[gy * g.nx + gx]);
    }
  }
  return std::sqrt(acc * g.dxi() * g.dxi());
}

inline double hs_norm(const SampledField& f, double sm) { return hs_norm_spectrum(dft_forward(f), sm); }

// ---------------------------------------------------------------------------
// WPF1 file format

namespace detail {

template <typename T>
void put_le(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t off) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + off, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline std::string encode_field(const SampledField& f) {
  std::string out = "WPF1";
  out.reserve(4 + 16 + f.samples.size() * 16);
  detail::put_le<std::uint32_t>(out, f.grid.nx);
  detail::put_le<std::uint32_t>(out, f.grid.ny);
  detail::put_le<double>(out, f.grid.half_extent);
  for (const cplx& z : f.samples) {
    detail::put_le<double>(out, z.real());
    detail::put_le<double>(out, z.imag());
  }
  return out;
}

inline SampledField decode_field(const std::string& in) {
  if (in.size() < 20 || in.compare(0, 4, "WPF1") != 0) throw FormatError("bad WPF1 magic");
  Grid2 g{detail::get_le<std::uint32_t>(in, 4), detail::get_le<std::uint32_t>(in, 8),
          detail::get_le<double>(in, 12)};
  try {
    g.validate();
  } catch (const PreconditionError& e) {
    throw FormatError(std::string("bad WPF1 header: ") + e.what());
  }
  const std::size_t need = 20 + g.size() * 16;
  if (in.size() < need) throw FormatError("truncated WPF1 payload");
  if (in.size() > need) throw FormatError("trailing bytes after WPF1 payload");
  SampledField f(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double re = detail::get_le<double>(in, 20 + 16 * k);
    const double im = detail::get_le<double>(in, 28 + 16 * k);
    if (!std::isfinite(re) || !std::isfinite(im)) throw FormatError("non-finite sample");
    f.samples[k] = {re, im};
  }
  return f;
}

inline void write_field(const SampledField& f, const std::string& path) {
  for (const cplx& z : f.samples) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw FormatError("non-finite sample");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::ios_base::failure("cannot open " + path);
  const std::string data = encode_field(f);
  os.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!os) throw std::ios_base::failure("write failed: " + path);
}

inline SampledField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::ios_base::failure("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_field(data);
}

// ---------------------------------------------------------------------------
// Test fields

// 0 for t <= 0, 1 for t >= 1, C-infinity in between.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

template <typename F>
SampledField sample_field(const Grid2& g, F&& f) {
  SampledField out(g);
  for (std::size_t iy = 0; iy < g.ny; ++iy)
    for (std::size_t ix = 0; ix < g.nx; ++ix) out.at(ix, iy) = f(g.x(ix), g.y(iy));
  return out;
}

template <typename F>
SpectralField sample_spectrum(const Grid2& g, F&& f) {
  SpectralField out(g);
  for (std::size_t gy = 0; gy < g.ny; ++gy)
    for (std::size_t gx = 0; gx < g.nx; ++gx) out.at(gx, gy) = f(g.xi_x(gx), g.xi_y(gy));
  return out;
}

// exp(-pi |x - x0|^2 / s^2)
inline SampledField gaussian_field(const Grid2& g, double s = 1.0, Vec2 x0 = {}) {
  return sample_field(g, [&](double x, double y) {
    const double dx = x - x0.x, dy = y - x0.y;
    return cplx(std::exp(-kPi * (dx * dx + dy * dy) / (s * s)), 0.0);
  });
}

struct BandlimitedOptions {
  double band = 7.0;        // spectrum vanishes for |xi| >= band
  double taper = 1.0;       // width of the smooth radial cutoff
  int packets = 6;
  double width_min = 0.25;  // spectral Gaussian widths
  double width_max = 0.8;
  double shift = 3.0;       // spatial centres drawn from [-shift, shift]^2
  double inner = 0.0;       // packet centres drawn with |xi| in [inner, band]
};

// Sum of modulated Gaussian packets times a compactly supported radial cutoff.
inline SampledField random_bandlimited(const Grid2& g, std::uint64_t seed,
                                       const BandlimitedOptions& o = {}) {
  g.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Packet {
    Vec2 c, x0;
    double w;
    cplx amp;
  };
  std::vector<Packet> ps;
  for (int n = 0; n < o.packets; ++n) {
    const double r = o.inner + (o.band - o.inner) * std::sqrt(u(rng)), t = 2 * kPi * u(rng);
    Packet p;
    p.c = {r * std::cos(t), r * std::sin(t)};
    p.x0 = {o.shift * (2 * u(rng) - 1), o.shift * (2 * u(rng) - 1)};
    p.w = o.width_min + (o.width_max - o.width_min) * u(rng);
    p.amp = std::polar(0.5 + u(rng), 2 * kPi * u(rng));
    ps.push_back(p);
  }
  const SpectralField s = sample_spectrum(g, [&](double ex, double ey) {
    const double cut = smooth_step((o.band - std::hypot(ex, ey)) / o.taper);
    if (cut == 0.0) return cplx(0.0);
    cplx acc = 0.0;
    for (const Packet& p : ps) {
      const double dx = ex - p.c.x, dy = ey - p.c.y;
      const double env = std::exp(-(dx * dx + dy * dy) / (2 * p.w * p.w));
      acc += p.amp * env * std::polar(1.0, -2 * kPi * (p.x0.x * ex + p.x0.y * ey));
    }
    return acc * cut;
  });
  return dft_inverse(s);
}

}  // namespace wavepacket
