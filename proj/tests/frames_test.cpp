// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#include "wavepacket/frames.hpp"
#include "wavepacket/frames_io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

namespace wavepacket {
namespace {

const Grid2 kSmall{128, 128, 4.0};
const CoveringSpec kSpec{0.5, 0.3};

double spectral_dot_re(const SpectralField& a, const SpectralField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += (std::conj(a.values[k]) * b.values[k]).real();
  return s;
}

TEST(Kappa, ClosedFormExamples) {
  const KappaSet a = kappa_atomic(1.0, 1.0, 0.0, 1.0, 0.0, 0.0);
  EXPECT_EQ(a.n0, 3);
  EXPECT_DOUBLE_EQ(a.kappa1, 2.0);
  EXPECT_DOUBLE_EQ(a.kappa2, 10.0);
  EXPECT_DOUBLE_EQ(a.kappa0, 6.0);
  EXPECT_DOUBLE_EQ(a.kappa0_prime, 6.0);
  EXPECT_DOUBLE_EQ(a.radial_exponent(), 10.0);
  EXPECT_DOUBLE_EQ(kappa_banach(1.0, 1.0, 0.0, 1.0, 0.0, 0.0).radial_exponent(), 6.0);

  // alpha = 1/2, beta = 3/10, p0 = q0 = omega = 1, s0 = 0
  const KappaSet b = kappa_atomic(1.0, 1.0, 0.0, 1.0, 0.5, 0.3);
  EXPECT_EQ(b.n0, 3);
  EXPECT_NEAR(b.kappa2, 3.0 + 2.0 / 0.7 + 5.0, 1e-12);
  EXPECT_NEAR(b.kappa0, 2.0 * (3.0 + 3.5 + 5.7 + 0.6 / 0.7), 1e-12);
  EXPECT_NEAR(b.kappa0_prime, 2.0 * (3.0 + 1.5 + 5.5 + 2.0 / 0.7), 1e-12);

  // p0 = 1/2, q0 = 1, omega = 1/2
  const KappaSet c = kappa_atomic(0.5, 1.0, 1.0, 0.5, 0.0, 0.0);
  EXPECT_EQ(c.n0, 5);
  EXPECT_DOUBLE_EQ(c.kappa1, 4.0);
  EXPECT_DOUBLE_EQ(c.kappa2, 3.0 + 4.0 + 10.0);
  EXPECT_DOUBLE_EQ(c.kappa0, 4.0 + 6.0);

  EXPECT_THROW(kappa_atomic(1, 1, 0, 1, 1.0, 0.5), PreconditionError);
  EXPECT_THROW(kappa_atomic(1, 1, 0, 1, 0.3, 0.5), PreconditionError);
  EXPECT_THROW(kappa_atomic(1.5, 1, 0, 1, 0.3, 0.2), PreconditionError);
  EXPECT_THROW(kappa_atomic(1, 1, -1, 1, 0.3, 0.2), PreconditionError);
}

TEST(Jet, MatchesFiniteDifferences) {
  const GeneratorPair gen = default_generators();
  const SpectralWindow rational = make_window(
      [](const auto& x, const auto& y) { return jet_const(x, 1.0) / (1.0 + x * x + 2.0 * y * y); }, {});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.1, 1.1);
  const double h = 1e-6;
  for (const SpectralWindow* w : {&gen.gamma_hat, &rational, &gen.phi_hat}) {
    for (int n = 0; n < 40; ++n) {
      const double x = w == &gen.phi_hat ? 5.0 * u(rng) - 0.5 : u(rng);
      const double y = w == &gen.phi_hat ? 3.0 * u(rng) : 2.0 * u(rng) - 1.0;
      const auto jet = [&](double a, double b) { return w->jet(Jet2::var_x(2, x + a), Jet2::var_y(2, y + b)); };
      const Jet2 j = jet(0, 0);
      EXPECT_NEAR(j.value(), w->value(x, y), 1e-14);
      const auto fd = [&](int a, int b, double ex, double ey) {
        return (jet(ex * h, ey * h).derivative(a, b) - jet(-ex * h, -ey * h).derivative(a, b)) / (2 * h);
      };
      const auto close = [](double p, double q) { EXPECT_NEAR(p, q, 1e-5 * (1.0 + std::abs(p))); };
      close(j.derivative(1, 0), fd(0, 0, 1, 0));
      close(j.derivative(0, 1), fd(0, 0, 0, 1));
      close(j.derivative(2, 0), fd(1, 0, 1, 0));
      close(j.derivative(1, 1), fd(1, 0, 0, 1));
      close(j.derivative(0, 2), fd(0, 1, 0, 1));
    }
  }
}

TEST(Generators, ShapeOfDefaults) {
  const GeneratorPair gen = default_generators();
  EXPECT_EQ(gen.gamma_hat({0.5, 0.0}), 1.0);
  EXPECT_EQ(gen.gamma_hat({0.0, -1.0}), 1.0);
  EXPECT_EQ(gen.gamma_hat({1.0, 1.0}), 1.0);
  EXPECT_EQ(gen.gamma_hat({-2.0 / 64, 0.0}), 0.0);
  EXPECT_EQ(gen.gamma_hat({0.5, 1.0 + 2.0 / 64}), 0.0);
  EXPECT_GT(gen.gamma_hat({-1.0 / 64, 0.0}), 0.0);
  EXPECT_EQ(gen.phi_hat({4.0, 0.0}), 1.0);
  EXPECT_EQ(gen.phi_hat({0.0, 5.0}), 0.0);
  EXPECT_GT(gen.phi_hat({4.5, 0.0}), 0.0);
}

TEST(CheckDecay, CompactAndSlowWindows) {
  const KappaSet k = kappa_atomic(1.0, 1.0, 0.0, 1.0, 0.0, 0.0);
  const GeneratorPair gen = default_generators();
  const DecayReport r = check_decay(gen.gamma_hat, k, k.n0);
  EXPECT_TRUE(r.ok);
  EXPECT_GT(r.worst_ratio, 0.0);
  EXPECT_TRUE(std::isfinite(r.worst_ratio));
  EXPECT_TRUE(check_decay(gaussian_window(), kappa_banach(1, 1, 0, 1, 0.5, 0.3), 3).ok);
  EXPECT_THROW(check_decay(gen.gamma_hat, k, 4), PreconditionError);

  // (1 + |xi|^2)^-1 violates the bound: the fitted constant grows with the sample radius.
  const SpectralWindow slow =
      make_window([](const auto& x, const auto& y) { return jet_const(x, 1.0) / (1.0 + x * x + y * y); }, {});
  const double c16 = check_decay(slow, k, 0, {24, 24, 16.0}).worst_ratio;
  const double c64 = check_decay(slow, k, 0, {24, 24, 64.0}).worst_ratio;
  EXPECT_GT(c64, 100.0 * c16);
}

TEST(GeneratorField, NormMatchesReferenceIntegral) {
  // Wide transitions so that grid sums resolve the bumps.
  const GeneratorPair gen = default_generators(0.25);
  const Grid2 g{1024, 1024, 16.0};
  // Independent oracle: midpoint rule in reference coordinates.
  auto ref = [&](const SpectralWindow& w, double x0, double x1, double y0, double y1) {
    const int n = 4000;
    const double hx = (x1 - x0) / n, hy = (y1 - y0) / n;
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double v = w.value(x0 + (a + 0.5) * hx, y0 + (b + 0.5) * hy);
        s += v * v;
      }
    return s * hx * hy;
  };
  const double gamma2 = ref(gen.gamma_hat, -0.5, 1.5, -1.5, 1.5);
  const double phi2 = ref(gen.phi_hat, -5.0, 5.0, -5.0, 5.0);
  for (const WPIndex& i : {WPIndex::zero(), WPIndex{2, 1, 0}, WPIndex{3, 1, 1}}) {
    const SampledField f = generator_field(i, gen, kSpec, g);
    const double n2 = std::pow(lp_norm(f, 2.0), 2);
    EXPECT_NEAR(n2, i.is_zero() ? phi2 : gamma2, 1e-8 * n2) << to_string(i);
  }
  EXPECT_THROW(generator_field(WPIndex{3, 1, 1}, gen, kSpec, Grid2{64, 64, 4.0}), PreconditionError);
}

TEST(FrameSystem, AnalysisSynthesisAdjoint) {
  const FrameSystem fs(default_generators(), kSpec, 2, kSmall);
  BandlimitedOptions o;
  o.band = 1.6;
  o.taper = 0.4;
  o.shift = 1.0;
  const SpectralField f = dft_forward(random_bandlimited(kSmall, 3, o));
  CoefficientTensor c = fs.empty_tensor();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (auto& b : c.blocks)
    for (auto& v : b.values) v = {nd(rng), nd(rng)};
  const CoefficientTensor a = fs.analysis(f);
  cplx lhs = 0.0;
  for (std::size_t n = 0; n < a.blocks.size(); ++n)
    for (std::size_t k = 0; k < a.blocks[n].values.size(); ++k) lhs += a.blocks[n].values[k] * std::conj(c.blocks[n].values[k]);
  const SpectralField s = fs.synthesis_spectrum(c);
  cplx rhs = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) rhs += f.values[k] * std::conj(s.values[k]);
  rhs *= kSmall.dxi() * kSmall.dxi();
  EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-8 * std::abs(lhs));
}

TEST(FrameSystem, FastOperatorMatchesComposition) {
  const FrameSystem fs(default_generators(), kSpec, 2, kSmall, {0.5, 1.0, 3.5});
  BandlimitedOptions o;
  o.band = 3.2;
  o.taper = 0.4;
  o.shift = 1.0;
  const SpectralField f = dft_forward(random_bandlimited(kSmall, 8, o));
  const SpectralField slow = fs.synthesis_spectrum(fs.analysis(f));
  const SpectralField fast = fs.frame_operator(f);
  double err = 0.0, nrm = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    err += std::norm(slow.values[k] - fast.values[k]);
    nrm += std::norm(slow.values[k]);
  }
  EXPECT_LT(std::sqrt(err / nrm), 1e-10);
  EXPECT_GT(spectral_dot_re(f, fast), 0.0);
}

TEST(FrameSystem, OneHotSynthesisIsTheGenerator) {
  const GeneratorPair gen = default_generators();
  const FrameSystem fs(gen, kSpec, 2, kSmall, {0.25, 1.0, 3.5});
  const WPIndex i{2, 0, 0};
  const auto blk = fs.block_of(i);
  ASSERT_TRUE(blk.has_value());
  CoefficientTensor c = fs.empty_tensor();
  c.blocks[*blk].at(0, 0) = 1.0;
  const SpectralField s = fs.synthesis_spectrum(c);
  const SpectralField ref = fs.project(dft_forward(generator_field(i, gen, kSpec, kSmall)));
  for (std::size_t k = 0; k < s.values.size(); ++k) EXPECT_NEAR(std::abs(s.values[k] - ref.values[k]), 0.0, 1e-14);
  EXPECT_EQ(fs.window_edge_fraction(c), 0.0);

  // Self inner product through the analysis operator.
  const CoefficientTensor a = fs.analysis(ref);
  const double n2 = spectral_dot_re(ref, ref) * kSmall.dxi() * kSmall.dxi();
  EXPECT_NEAR(a.blocks[*blk].at(0, 0).real(), n2, 1e-6 * n2);
  EXPECT_NEAR(a.blocks[*blk].at(0, 0).imag(), 0.0, 1e-6 * n2);

  CoefficientTensor e = fs.empty_tensor();
  e.blocks[*blk].at(e.blocks[*blk].k1, 0) = 1.0;
  EXPECT_EQ(fs.window_edge_fraction(e), 1.0);
}

TEST(FrameSystem, ReconstructionConverges) {
  const FrameSystem fs(default_generators(), kSpec, 2, kSmall, {0.25, 1.0, 3.5});
  BandlimitedOptions o;
  o.band = 3.2;
  o.taper = 0.6;
  o.shift = 0.8;
  const SampledField f = random_bandlimited(kSmall, 11, o);
  const ReconstructResult r = fs.reconstruct(f, 200, 1e-10);
  EXPECT_LT(r.rel_error, 1e-8);
  EXPECT_LE(r.iterations, 200);
  EXPECT_THROW(fs.reconstruct(random_bandlimited(kSmall, 1, {}), 10), PreconditionError);
}

TEST(FrameSystem, BandCoverageChecked) {
  EXPECT_THROW(FrameSystem(default_generators(), kSpec, 1, kSmall, {0.25, 1.0, 6.0}), PreconditionError);
  const FrameSystem fs(default_generators(), kSpec, 2, kSmall, {0.25, 1.0, 3.5});
  EXPECT_GE(fs.min_cover(), 1e-3);
  EXPECT_THROW(FrameSystem(default_generators(), kSpec, 2, kSmall, {0.25, 1.0, 9.0}), PreconditionError);
}

TEST(FrameSystem, ZeroFieldAndDominantSelfEntry) {
  const GeneratorPair gen = default_generators();
  const FrameSystem fs(gen, kSpec, 2, kSmall, {0.5, 1.0, 3.5});
  const CoefficientTensor z = fs.analysis(SampledField(kSmall));
  for (const auto& b : z.blocks)
    for (const cplx& v : b.values) EXPECT_EQ(v, cplx(0.0));
  const ReconstructResult r0 = fs.reconstruct(SampledField(kSmall));
  EXPECT_EQ(r0.rel_error, 0.0);

  // Equal-norm high-pass atoms: the self inner product is the largest high-pass coefficient.
  for (const WPIndex& i : {WPIndex{1, 0, 0}, WPIndex{1, 0, 1}, WPIndex{1, 1, 2}}) {
    const auto blk = fs.block_of(i);
    ASSERT_TRUE(blk.has_value());
    CoefficientTensor c = fs.empty_tensor();
    c.blocks[*blk].at(0, 0) = 1.0;
    const CoefficientTensor a = fs.analysis(fs.synthesis_spectrum(c));
    double top = 0.0;
    for (const auto& b : a.blocks)
      if (!b.index.is_zero())
        for (const cplx& v : b.values) top = std::max(top, std::abs(v));
    EXPECT_NEAR(std::abs(a.blocks[*blk].at(0, 0)), top, 1e-12 * top) << to_string(i);
  }
}

TEST(FramesIo, JsonRoundTrip) {
  const FrameSystem fs(default_generators(), kSpec, 2, kSmall, {0.5, 1.0, 3.5});
  CoefficientTensor c = fs.empty_tensor();
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (auto& b : c.blocks)
    for (auto& v : b.values) v = {nd(rng), nd(rng)};
  const auto path = std::filesystem::temp_directory_path() / "wp_frames_io_test.json";
  write_tensor(c, path.string());
  const CoefficientTensor d = read_tensor(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(d.j_max, 2);
  EXPECT_EQ(d.delta, 0.5);
  EXPECT_EQ(d.grid.nx, kSmall.nx);
  ASSERT_EQ(d.blocks.size(), c.blocks.size());
  for (std::size_t n = 0; n < c.blocks.size(); ++n) {
    EXPECT_EQ(d.blocks[n].index, c.blocks[n].index);
    EXPECT_EQ(d.blocks[n].values, c.blocks[n].values);
  }

  nlohmann::json j = tensor_to_json(c);
  EXPECT_EQ(j["blocks"][0]["index"], "zero");
  j["blocks"][1]["payload"] = "AAAA";
  EXPECT_THROW(tensor_from_json(j), FormatError);
  j["blocks"][1]["payload"] = "not base64!";
  EXPECT_THROW(tensor_from_json(j), FormatError);
  j.erase("delta");
  EXPECT_THROW(tensor_from_json(j), FormatError);
}

TEST(CoefficientNorm, HandComputed) {
  CoefficientTensor c;
  c.blocks.push_back({WPIndex::zero(), 0, 0, {}});
  c.blocks[0].values = {3.0, cplx(0.0, 4.0)};
  c.blocks.push_back({WPIndex{2, 0, 0}, 0, 0, {}});
  c.blocks[1].values = {1.0, -1.0};
  // weights 2^{j (s + (alpha + beta)(1/2 - 1/p))}
  SpaceParams sp{0.5, 0.3, 2.0, 2.0, 1.0};
  EXPECT_NEAR(coefficient_norm(c, sp), std::sqrt(25.0 + 16.0 * 2.0), 1e-12);
  sp.p = 1.0;
  sp.q = 1.0;
  EXPECT_NEAR(coefficient_norm(c, sp), 7.0 + std::exp2(2.0 * (1.0 - 0.4)) * 2.0, 1e-12);
  sp.p = kInf;
  sp.q = kInf;
  sp.s = 0.0;
  EXPECT_NEAR(coefficient_norm(c, sp), std::max(4.0, std::exp2(0.8)), 1e-12);
}

}  // namespace
}  // namespace wavepacket
