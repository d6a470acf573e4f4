// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#include "wavepacket/partition.hpp"

#include <gtest/gtest.h>

#include <random>

#include "wavepacket/covering_audit.hpp"

namespace wavepacket {
namespace {

// A disc at the origin claiming a safe radius it does not cover.
class HoleyCovering final : public Covering {
 public:
  HoleyCovering() { patches_.push_back(make_patch({0, 0, 0}, true, 0, {}, Disc{1.0}, Disc{0.5})); }
  std::string name() const override { return "holey"; }
  std::vector<std::size_t> candidates(Vec2, double) const override { return {0}; }
  double safe_radius() const override { return 3.0; }
  double weight(const Patch&, double) const override { return 1.0; }
};

TEST(Bump, OneOnInnerZeroOffOuter) {
  const Shape outer = Rect{-0.5, 1.5, -2.0, 2.0}, inner = Rect{0.0, 1.0, -1.0, 1.0};
  for (BumpProfile prof : {BumpProfile::Exp, BumpProfile::ExpSquared}) {
    for (double x = -0.6; x <= 1.6; x += 0.01)
      for (double y = -2.1; y <= 2.1; y += 0.03) {
        const double v = base_bump(outer, inner, {x, y}, prof);
        if (shape_contains(inner, {x, y}, Membership::Closed)) EXPECT_GE(v, 1.0 - 1e-15);
        if (!shape_contains(outer, {x, y}, Membership::Open)) EXPECT_EQ(v, 0.0);
        EXPECT_GE(v, 0.0);
      }
  }
  EXPECT_NEAR(base_bump(Disc{4.0}, Disc{3.0}, {3.0, 0.0}, BumpProfile::Exp), 1.0, 1e-15);
  EXPECT_EQ(base_bump(Annulus{0.25, 4.0}, Annulus{0.5, 2.0}, {0.0, 0.2}, BumpProfile::Exp), 0.0);
}

TEST(Partition, SumsToOne) {
  for (const CoveringSpec& sp : {CoveringSpec{0.0, 0.0}, CoveringSpec{0.5, 0.3}, CoveringSpec{1.0, 1.0}}) {
    const Partition part(std::make_shared<WavePacketCovering>(sp, 4));
    const DiscSampler s(part.safe_radius(), 7);
    for (int n = 0; n < 4000; ++n) EXPECT_NEAR(part.sum_phi(s(n)), 1.0, 1e-10);
  }
}

TEST(Partition, SupportExactness) {
  auto cov = std::make_shared<WavePacketCovering>(CoveringSpec{0.5, 0.3}, 4);
  const Partition part(cov);
  const DiscSampler s(part.safe_radius(), 9);
  for (int n = 0; n < 3000; ++n) {
    const Vec2 xi = s(n);
    for (std::size_t k = 0; k < cov->size(); k += 5) {
      const double v = part.eval_phi(k, xi);
      if (!patch_contains(cov->patch(k), xi, Which::Outer)) EXPECT_EQ(v, 0.0);
    }
    for (const auto& [k, v] : part.active(xi)) EXPECT_TRUE(patch_contains(cov->patch(k), xi, Which::Outer));
  }
}

TEST(Partition, LowPassIsOneNearOrigin) {
  const Partition part(std::make_shared<WavePacketCovering>(CoveringSpec{0.7, 0.7}, 3));
  for (double r = 0.0; r <= 0.9; r += 0.05)
    for (double t = 0.0; t < 2 * kPi; t += 0.3) {
      const Vec2 xi{r * std::cos(t), r * std::sin(t)};
      EXPECT_EQ(part.eval_phi(0, xi), 1.0);
      EXPECT_EQ(part.active(xi).size(), 1u);
    }
}

TEST(Partition, OutsideSafeRegionRejected) {
  const Partition part(std::make_shared<WavePacketCovering>(CoveringSpec{1.0, 1.0}, 3));
  EXPECT_THROW(part.eval_phi(0, {4.5, 0.0}), PreconditionError);
  EXPECT_THROW(part.sum_phi({0.0, -5.0}), PreconditionError);
}

TEST(Partition, CoverageGapDetected) {
  try {
    Partition part(std::make_shared<HoleyCovering>());
    FAIL() << "expected coverage gap";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("coverage gap"), std::string::npos);
  }
}

TEST(Partition, ProvidersSumToOne) {
  for (const auto& cov : std::vector<std::shared_ptr<const Covering>>{
           std::make_shared<BesovCovering>(4), std::make_shared<AlphaModulationCovering>(0.5, 4),
           std::make_shared<DilatedCovering>(std::make_shared<WavePacketCovering>(CoveringSpec{0.5, 0.3}, 4),
                                             Mat2{1.5, 0.3, -0.2, 0.8})}) {
    const Partition part(cov, BumpProfile::ExpSquared);
    const DiscSampler s(part.safe_radius(), 3);
    for (int n = 0; n < 2000; ++n) EXPECT_NEAR(part.sum_phi(s(n)), 1.0, 1e-10) << cov->name();
  }
}

TEST(DerivativeAudit, PlateauAtBesovCorner) {
  const Partition part(std::make_shared<WavePacketCovering>(CoveringSpec{1.0, 1.0}, 5));
  const DerivativeAudit a = derivative_bound_audit(part, 2);
  EXPECT_TRUE(a.plateau);
  for (int o = 0; o <= 2; ++o) {
    EXPECT_TRUE(std::isfinite(a.overall[o]));
    EXPECT_GE(a.sup[o].size(), 4u);
  }
  EXPECT_LE(a.overall[0], 1.0 + 1e-12);
}

TEST(DerivativeAudit, PlateauAtIntermediateExponents) {
  const Partition part(std::make_shared<WavePacketCovering>(CoveringSpec{0.5, 0.3}, 5));
  const DerivativeAudit a = derivative_bound_audit(part, 2, 2, 32);
  EXPECT_TRUE(a.plateau) << a.growth[1] << " " << a.growth[2];
}

}  // namespace
}  // namespace wavepacket
