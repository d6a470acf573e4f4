// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#include "wavepacket/fields.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

namespace wavepacket {
namespace {

const Grid2 kGrid{256, 256, 8.0};

SampledField random_field(const Grid2& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  SampledField f(g);
  for (auto& z : f.samples) z = {n(rng), n(rng)};
  return f;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TEST(Dft, GaussianPair) {
  const SpectralField s = dft_forward(gaussian_field(kGrid));
  double err = 0.0;
  for (std::size_t gy = 0; gy < kGrid.ny; ++gy)
    for (std::size_t gx = 0; gx < kGrid.nx; ++gx) {
      const double ex = kGrid.xi_x(gx), ey = kGrid.xi_y(gy);
      err = std::max(err, std::abs(s.at(gx, gy) - std::exp(-kPi * (ex * ex + ey * ey))));
    }
  EXPECT_LE(err, 1e-8);
}

TEST(Dft, ShiftedGaussianPhase) {
  // Translation by x0 multiplies the spectrum by exp(-2 pi i <x0, xi>).
  const Vec2 x0{1.25, -0.5};
  const SpectralField s = dft_forward(gaussian_field(kGrid, 1.0, x0));
  double err = 0.0;
  for (std::size_t gy = 0; gy < kGrid.ny; gy += 7)
    for (std::size_t gx = 0; gx < kGrid.nx; gx += 5) {
      const double ex = kGrid.xi_x(gx), ey = kGrid.xi_y(gy);
      const cplx want = std::exp(-kPi * (ex * ex + ey * ey)) *
                        std::polar(1.0, -2 * kPi * (x0.x * ex + x0.y * ey));
      err = std::max(err, std::abs(s.at(gx, gy) - want));
    }
  EXPECT_LE(err, 1e-8);
}

TEST(Dft, RoundTrip) {
  const SampledField f = random_field({64, 32, 3.0}, 1);
  const SampledField r = dft_inverse(dft_forward(f));
  double err = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < f.samples.size(); ++k) {
    err = std::max(err, std::abs(f.samples[k] - r.samples[k]));
    ref = std::max(ref, std::abs(f.samples[k]));
  }
  EXPECT_LE(err, 1e-12 * ref);
}

TEST(Dft, DeltaHasFlatModulus) {
  SampledField f(Grid2{32, 32, 4.0});
  f.at(7, 19) = 1.0;
  const SpectralField s = dft_forward(f);
  const double want = f.grid.dx() * f.grid.dy();
  for (const cplx& z : s.values) EXPECT_NEAR(std::abs(z), want, 1e-15);
}

TEST(Dft, RejectsNonPowerOfTwo) {
  EXPECT_THROW(SampledField(Grid2{48, 32, 1.0}), PreconditionError);
}

TEST(Dft, LinearityAndConjugateSymmetry) {
  const Grid2 g{64, 64, 4.0};
  SampledField a = random_field(g, 2), b = random_field(g, 3), c(g);
  for (std::size_t k = 0; k < g.size(); ++k) c.samples[k] = 2.0 * a.samples[k] - cplx(0, 3) * b.samples[k];
  const auto sa = dft_forward(a), sb = dft_forward(b), sc = dft_forward(c);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(std::abs(sc.values[k] - (2.0 * sa.values[k] - cplx(0, 3) * sb.values[k])), 0.0, 1e-12);
  }
  SampledField r(g);
  for (std::size_t k = 0; k < g.size(); ++k) r.samples[k] = a.samples[k].real();
  const auto sr = dft_forward(r);
  // Frequency -xi sits at index (n - g) mod n.
  for (std::size_t gy = 1; gy < g.ny; ++gy)
    for (std::size_t gx = 1; gx < g.nx; ++gx) {
      EXPECT_NEAR(std::abs(sr.at(gx, gy) - std::conj(sr.at(g.nx - gx, g.ny - gy))), 0.0, 1e-12);
    }
}

TEST(LpNorm, UnitPatch) {
  SampledField f(Grid2{64, 64, 4.0});  // dx = 1/8, 64 cells make area 1
  for (std::size_t iy = 10; iy < 18; ++iy)
    for (std::size_t ix = 20; ix < 28; ++ix) f.at(ix, iy) = 1.0;
  for (double p : {0.5, 1.0, 2.0, 3.0, kInf}) EXPECT_NEAR(lp_norm(f, p), 1.0, 1e-14) << p;
}

TEST(LpNorm, Homogeneity) {
  const SampledField f = random_field({32, 32, 2.0}, 4);
  SampledField g = f;
  for (auto& z : g.samples) z *= 2.0;
  for (double p : {0.5, 1.0, 1.5, 2.0, kInf}) EXPECT_NEAR(lp_norm(g, p), 2 * lp_norm(f, p), 1e-12 * lp_norm(g, p));
  EXPECT_THROW(lp_norm(f, 0.0), PreconditionError);
  EXPECT_THROW(lp_norm(f, -1.0), PreconditionError);
}

TEST(LpNorm, GaussianL2) {
  EXPECT_NEAR(lp_norm(gaussian_field(kGrid), 2.0), std::sqrt(0.5), 1e-8);
}

TEST(LpNorm, ParsevalAndTranslation) {
  const SampledField f = random_field({64, 64, 5.0}, 5);
  EXPECT_NEAR(lp_norm(f, 2.0), spectral_l2(dft_forward(f)), 1e-10 * lp_norm(f, 2.0));
  SampledField t(f.grid);
  for (std::size_t iy = 0; iy < 64; ++iy)
    for (std::size_t ix = 0; ix < 64; ++ix) t.at((ix + 5) % 64, (iy + 9) % 64) = f.at(ix, iy);
  for (double p : {0.7, 1.0, 2.0, kInf}) EXPECT_EQ(lp_norm(t, p), lp_norm(f, p));
}

TEST(HsNorm, Examples) {
  const SampledField gsn = gaussian_field(kGrid);
  EXPECT_NEAR(hs_norm(gsn, 0.0), lp_norm(gsn, 2.0), 1e-10);
  // Radial reduction: pi * int_0^inf (1+t)^2 e^{-2 pi t} dt.
  const double a = 2 * kPi;
  const double want = std::sqrt(kPi * (1 / a + 2 / (a * a) + 2 / (a * a * a)));
  EXPECT_NEAR(hs_norm(gsn, 2.0), want, 1e-6);
}

TEST(HsNorm, LowPassMultiplierBound) {
  BandlimitedOptions o;
  o.band = 2.0;
  o.taper = 0.5;
  const SampledField f = random_bandlimited(kGrid, 9, o);
  for (double s : {1.0, 4.0, 8.0}) {
    EXPECT_LE(hs_norm(f, s), std::pow(1 + 4.0, s / 2) * lp_norm(f, 2.0) * (1 + 1e-12));
  }
}

TEST(FileFormat, RoundTripBitExact) {
  const SampledField f = random_field({16, 8, 2.5}, 6);
  const std::string path = temp_path("wp_roundtrip.wpf");
  write_field(f, path);
  const SampledField g = read_field(path);
  EXPECT_EQ(g.grid, f.grid);
  EXPECT_EQ(encode_field(g), encode_field(f));
  std::remove(path.c_str());
}

TEST(FileFormat, HeaderLayout) {
  SampledField f(Grid2{2, 4, 1.5});
  f.samples[0] = {1.0, -2.0};
  const std::string b = encode_field(f);
  ASSERT_EQ(b.size(), 20u + 8 * 16);
  EXPECT_EQ(b.substr(0, 4), std::string("\x57\x50\x46\x31"));
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 2);
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 4);
  double le;
  std::memcpy(&le, b.data() + 12, 8);
  EXPECT_EQ(le, 1.5);
  std::memcpy(&le, b.data() + 28, 8);
  EXPECT_EQ(le, -2.0);
}

TEST(FileFormat, Errors) {
  SampledField f(Grid2{4, 4, 1.0});
  std::string b = encode_field(f);
  std::string bad = b;
  bad[0] = 'X';
  EXPECT_THROW(decode_field(bad), FormatError);
  EXPECT_THROW(decode_field(b.substr(0, b.size() - 1)), FormatError);
  std::string np = b;
  np[4] = 3;
  EXPECT_THROW(decode_field(np), FormatError);
  std::string nan = b;
  const double q = std::nan("");
  std::memcpy(nan.data() + 20, &q, 8);
  EXPECT_THROW(decode_field(nan), FormatError);
  EXPECT_THROW(read_field("/nonexistent/dir/x.wpf"), std::ios_base::failure);
}

TEST(TestFields, BandlimitedIsBandlimitedAndDeterministic) {
  const SampledField a = random_bandlimited(kGrid, 42);
  const SampledField b = random_bandlimited(kGrid, 42);
  EXPECT_EQ(encode_field(a), encode_field(b));
  const SpectralField s = dft_forward(a);
  double out = 0.0, tot = 0.0;
  for (std::size_t gy = 0; gy < kGrid.ny; ++gy)
    for (std::size_t gx = 0; gx < kGrid.nx; ++gx) {
      const double e = std::norm(s.at(gx, gy));
      tot += e;
      if (std::hypot(kGrid.xi_x(gx), kGrid.xi_y(gy)) > 7.0) out += e;
    }
  EXPECT_LE(out, 1e-24 * tot);
}

}  // namespace
}  // namespace wavepacket
