// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#include "wavepacket/embeddings.hpp"

#include <gtest/gtest.h>

#include <random>

namespace wavepacket {
namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

Exponents ex(const char* a, const char* b, const char* p, const char* q, const char* s) {
  return {parse_scalar(a), parse_scalar(b), parse_exponent(p), parse_exponent(q), parse_scalar(s)};
}

// Plain double transcriptions of the characterizations, used as oracles away from ties.
double rc(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }
double pos(double x) { return std::max(x, 0.0); }
double conj_d(double p) { return p <= 1 ? kInfD : (std::isinf(p) ? 1.0 : p / (p - 1)); }

struct D {
  double a, b, p, q, s;
};

// Returns lhs - rhs of the s-inequality and whether it is strict; nullopt if p fails.
std::optional<std::pair<double, bool>> oracle_wp_wp(const D& x, const D& y) {
  if (rc(x.p) < rc(y.p)) return std::nullopt;
  const bool up = x.a <= y.a && x.b <= y.b;
  const D& lo = up ? x : y;
  const D& hi = up ? y : x;
  const double kap = up ? pos(1.0 / std::min(y.p, conj_d(y.p)) - rc(x.q))
                        : pos(rc(y.q) - std::min(rc(x.p), 1 - rc(x.p)));
  double rhs = y.s + (rc(x.p) - rc(y.p)) * (lo.a + lo.b) + kap * (hi.a - lo.a + hi.b - lo.b);
  const bool strict = x.q > y.q;
  if (strict) rhs += (2 - hi.a - hi.b) * (rc(y.q) - rc(x.q));
  return std::pair{x.s - rhs, strict};
}

D to_d(const Exponents& e) { return {e.alpha.value(), e.beta.value(), e.p.value(), e.q.value(), e.s.value()}; }

// Random tuple with small-denominator rational entries.
Exponents random_tuple(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, 8), pd(1, 8), sd(-16, 16);
  int a = u(rng), b = u(rng);
  if (b > a) std::swap(a, b);
  auto pexp = [&]() {
    const int k = pd(rng);
    if (k == 8) return ExtExp::inf();
    return ExtExp(Scalar::ratio(pd(rng) + 1, k == 1 ? 1 : 2));
  };
  return {Scalar::ratio(a, 8), Scalar::ratio(b, 8), pexp(), pexp(), Scalar::ratio(sd(rng), 4)};
}

TEST(Scalar, ExactArithmeticAndParsing) {
  EXPECT_EQ(parse_scalar("3/2").str(), "3/2");
  EXPECT_EQ(parse_scalar("0.25").str(), "1/4");
  EXPECT_EQ(parse_scalar("-1.5e1").str(), "-15");
  EXPECT_EQ(parse_scalar("2.5e-1").str(), "1/4");
  EXPECT_TRUE(parse_scalar("0.1").exact());
  EXPECT_EQ(Scalar::ratio(1, 3) + Scalar::ratio(1, 6), Scalar::ratio(1, 2));
  EXPECT_EQ((Scalar::ratio(2, 3) * Scalar::ratio(9, 4)).str(), "3/2");
  EXPECT_THROW(parse_scalar("abc"), FormatError);
  EXPECT_THROW(parse_scalar("1/0"), PreconditionError);
  EXPECT_TRUE(parse_exponent("inf").is_inf());
  EXPECT_THROW(parse_exponent("0"), PreconditionError);
  // Overflow degrades to doubles with fuzzy comparison.
  const Scalar big = Scalar::ratio(INT64_MAX - 1, 3) * Scalar(7);
  EXPECT_FALSE(big.exact());
  EXPECT_EQ(Scalar::real(0.1) + Scalar::real(0.2), Scalar::ratio(3, 10));
  EXPECT_FALSE(Scalar::real(0.3 + 1e-13) > Scalar::ratio(3, 10));
}

TEST(Exponent, ConjugateAndFriends) {
  EXPECT_EQ(conj(ExtExp(2)), ExtExp(2));
  EXPECT_TRUE(conj(ExtExp(1)).is_inf());
  EXPECT_TRUE(conj(ExtExp(Scalar::ratio(1, 2))).is_inf());
  EXPECT_EQ(conj(ExtExp(4)).str(), "4/3");
  EXPECT_EQ(conj(ExtExp::inf()), ExtExp(1));
  EXPECT_EQ(p_star(ExtExp(2)), Scalar::ratio(1, 2));
  EXPECT_EQ(p_dstar(ExtExp::inf()), Scalar(1));
  EXPECT_EQ(p_dstar(ExtExp(Scalar::ratio(1, 2))), Scalar(2));
  EXPECT_EQ(r_down(ExtExp(4)).str(), "4/3");
  EXPECT_EQ(r_down(ExtExp::inf()), ExtExp(1));
  EXPECT_TRUE(q_bracket(ExtExp(1), ExtExp(2)).is_inf());
  EXPECT_EQ(q_bracket(ExtExp::inf(), ExtExp(2)), ExtExp(2));
  EXPECT_EQ(q_bracket(ExtExp(4), ExtExp(2)), ExtExp(4));
}

TEST(WpWp, Examples) {
  const Exponents x = ex("1/2", "1/4", "3/2", "2", "1/3");
  EXPECT_TRUE(embed_wp_wp(x, x).holds());
  EXPECT_TRUE(embed_wp_wp(ex("1/2", "1/2", "2", "2", "0"), ex("1/2", "1/2", "2", "2", "1")).fails());
  const Verdict v = embed_wp_wp(ex("0", "0", "1", "1", "1"), ex("1", "1", "1", "1", "1"));
  EXPECT_TRUE(v.holds());
  EXPECT_EQ(v.branch, "mu");
  EXPECT_EQ(v.reason, "mu = 0");
  ASSERT_EQ(v.trace.size(), 2u);
  EXPECT_FALSE(v.trace[1].strict);
  const Verdict u = embed_wp_wp(ex("1", "0", "2", "2", "0"), ex("1/2", "1/2", "2", "2", "0"));
  EXPECT_EQ(u.state, VerdictState::Unknown);
  EXPECT_NE(u.reason.find("incomparable"), std::string::npos);
  EXPECT_THROW(embed_wp_wp(ex("1/2", "3/4", "2", "2", "0"), x), PreconditionError);
}

TEST(WpWp, MatchesOracleAwayFromTies) {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int n = 0; n < 4000; ++n) {
    const Exponents x = random_tuple(rng), y = random_tuple(rng);
    const Verdict v = embed_wp_wp(x, y);
    const D dx = to_d(x), dy = to_d(y);
    if (!((dx.a <= dy.a && dx.b <= dy.b) || (dy.a <= dx.a && dy.b <= dx.b))) {
      EXPECT_EQ(v.state, VerdictState::Unknown);
      continue;
    }
    const auto o = oracle_wp_wp(dx, dy);
    if (!o) {
      EXPECT_TRUE(v.fails());
      continue;
    }
    if (std::abs(o->first) < 1e-9) continue;
    EXPECT_EQ(v.holds(), o->first > 0) << x.str() << " -> " << y.str();
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(WpWp, ExactTiesRespectStrictness) {
  // q1 <= q2: s1 >= s2 accepts equality.
  EXPECT_TRUE(embed_wp_wp(ex("1/2", "1/2", "2", "1", "1"), ex("1/2", "1/2", "2", "2", "1")).holds());
  EXPECT_TRUE(embed_wp_wp(ex("1/2", "1/2", "2", "1", "1/2"), ex("1/2", "1/2", "2", "2", "1")).fails());
  // q1 > q2: rhs = 1 + (2 - 1)(1 - 1/2) = 3/2, strict.
  EXPECT_TRUE(embed_wp_wp(ex("1/2", "1/2", "2", "2", "3/2"), ex("1/2", "1/2", "2", "1", "1")).fails());
  EXPECT_TRUE(embed_wp_wp(ex("1/2", "1/2", "2", "2", "8/5"), ex("1/2", "1/2", "2", "1", "1")).holds());
}

TEST(WpWp, ReflexiveTransitiveMonotone) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 1000; ++n) {
    const Exponents x = random_tuple(rng);
    EXPECT_TRUE(embed_wp_wp(x, x).holds()) << x.str();
  }
  int chains = 0;
  while (chains < 1000) {
    Exponents a = random_tuple(rng), b = random_tuple(rng), c = random_tuple(rng);
    // Force comparable chains by sorting the (alpha, beta) pairs.
    std::array<std::pair<Scalar, Scalar>, 3> ab{{{a.alpha, a.beta}, {b.alpha, b.beta}, {c.alpha, c.beta}}};
    std::sort(ab.begin(), ab.end(), [](auto& l, auto& r) { return l.first < r.first; });
    if (!(ab[0].second <= ab[1].second && ab[1].second <= ab[2].second)) continue;
    if (rng() % 2) std::reverse(ab.begin(), ab.end());
    std::tie(a.alpha, a.beta) = ab[0];
    std::tie(b.alpha, b.beta) = ab[1];
    std::tie(c.alpha, c.beta) = ab[2];
    ++chains;
    if (embed_wp_wp(a, b).holds() && embed_wp_wp(b, c).holds()) {
      EXPECT_TRUE(embed_wp_wp(a, c).holds()) << a.str() << b.str() << c.str();
    }
    if (embed_wp_wp(a, c).holds()) {
      Exponents a2 = a;
      a2.s = a.s + Scalar::ratio(1, 7);
      EXPECT_TRUE(embed_wp_wp(a2, c).holds());
    }
  }
}

TEST(Coincide, TruthTable) {
  EXPECT_TRUE(coincide(ex("1/2", "1/4", "1", "3", "2"), ex("1/2", "1/4", "1", "3", "2")).holds());
  EXPECT_TRUE(coincide(ex("1/2", "1/2", "2", "2", "3/2"), ex("1", "1", "2", "2", "3/2")).holds());
  EXPECT_TRUE(coincide(ex("1/2", "1/2", "1", "1", "0"), ex("1", "1", "1", "1", "0")).fails());
  EXPECT_TRUE(coincide(ex("1/2", "1/2", "2", "2", "0"), ex("1", "1", "2", "2", "1")).fails());
  EXPECT_TRUE(coincide(ex("1", "1", "2", "1", "0"), ex("1", "1", "2", "2", "0")).fails());
  // Exhaustive over a small lattice: Holds iff the rule says so.
  const char* ab[][2] = {{"0", "0"}, {"1/2", "1/4"}, {"1", "1"}};
  const char* pq[] = {"1", "2", "inf"};
  for (auto& x : ab)
    for (auto& y : ab)
      for (const char* p1 : pq)
        for (const char* q1 : pq)
          for (const char* p2 : pq)
            for (const char* q2 : pq) {
              const Exponents a = ex(x[0], x[1], p1, q1, "1"), b = ex(y[0], y[1], p2, q2, "1");
              const bool same_pq = std::string(p1) == p2 && std::string(q1) == q2;
              const bool l2 = same_pq && std::string(p1) == "2" && std::string(q1) == "2";
              const bool want = same_pq && (l2 || x == y);
              EXPECT_EQ(coincide(a, b).holds(), want);
              if (want) {
                EXPECT_TRUE(embed_wp_wp(a, b).state != VerdictState::Fails);
                if (embed_wp_wp(a, b).state != VerdictState::Unknown) {
                  EXPECT_TRUE(embed_wp_wp(a, b).holds());
                  EXPECT_TRUE(embed_wp_wp(b, a).holds());
                }
              }
            }
}

TEST(Besov, Examples) {
  const ExtExp one(1), two(2);
  for (const char* s : {"-1", "0", "5/2"}) {
    for (auto [p, q] : {std::pair{"1", "1"}, std::pair{"3/2", "inf"}, std::pair{"inf", "1/2"}}) {
      const Exponents x = ex("1", "1", p, q, s);
      EXPECT_TRUE(embed_wp_besov(x, x.p, x.q, x.s).holds());
      EXPECT_TRUE(embed_besov_wp(x.p, x.q, x.s, x).holds());
    }
  }
  const Exponents l2 = ex("0", "0", "2", "2", "1");
  EXPECT_TRUE(embed_wp_besov(l2, two, two, Scalar(1)).holds());
  EXPECT_TRUE(embed_besov_wp(two, two, Scalar(1), l2).holds());
  const Exponents l1 = ex("0", "0", "1", "1", "0");
  const Verdict into = embed_wp_besov(l1, one, one, Scalar(0));
  EXPECT_TRUE(into.holds());
  EXPECT_EQ(into.reason, "mu = 0");
  const Verdict back = embed_besov_wp(one, one, Scalar(0), l1);
  EXPECT_TRUE(back.fails());
  EXPECT_EQ(back.reason, "nu = 1");
  EXPECT_EQ(back.trace[1].rhs, "2");
  EXPECT_TRUE(embed_besov_wp(one, one, Scalar(2), l1).holds());
}

TEST(Besov, ConsistentWithWpAtBesovCorner) {
  std::mt19937_64 rng(17);
  for (int n = 0; n < 1000; ++n) {
    Exponents x = random_tuple(rng), y = random_tuple(rng);
    y.alpha = y.beta = Scalar(1);
    EXPECT_EQ(embed_wp_besov(x, y.p, y.q, y.s).state, embed_wp_wp(x, y).state) << x.str() << y.str();
    EXPECT_EQ(embed_besov_wp(y.p, y.q, y.s, x).state, embed_wp_wp(y, x).state) << y.str() << x.str();
  }
}

TEST(Sobolev, Examples) {
  EXPECT_TRUE(embed_wp_sobolev(ex("1", "1", "2", "2", "1"), 1, ExtExp(2)).holds());
  EXPECT_TRUE(embed_wp_sobolev(ex("1", "1", "1", "1", "2"), 0, ExtExp::inf()).holds());
  EXPECT_TRUE(embed_wp_sobolev(ex("1", "1", "1", "1", "19/10"), 0, ExtExp::inf()).fails());
  EXPECT_THROW(embed_wp_sobolev(ex("1", "1", "1", "1", "2"), 0, ExtExp(Scalar::ratio(1, 2))), PreconditionError);
  // q = 3 > r = 4's r_down = 4/3: sufficient needs s > 0 + 2(1/2 - 1/4) + 0 = 1/2 at alpha=beta=1.
  const Exponents x = ex("1", "1", "2", "3", "1/2");
  const Verdict v = embed_wp_sobolev(x, 0, ExtExp(4));
  EXPECT_EQ(v.state, VerdictState::Unknown);
  EXPECT_EQ(v.branch, "gap");
  // Special condition kills the gap when s is below it.
  EXPECT_TRUE(embed_wp_sobolev(ex("1/2", "0", "1", "3", "1/2"), 0, ExtExp(4)).fails());
}

TEST(Sobolev, SufficientEqualsNecessaryOnCharacterizedRange) {
  std::mt19937_64 rng(23);
  const std::vector<ExtExp> rs = {ExtExp(1), ExtExp(Scalar::ratio(3, 2)), ExtExp(2), ExtExp::inf()};
  for (int n = 0; n < 1000; ++n) {
    const Exponents x = random_tuple(rng);
    const ExtExp& r = rs[n % rs.size()];
    const int k = static_cast<int>(rng() % 3);
    EXPECT_EQ(sobolev_sufficient(x, k, r).state, sobolev_necessary(x, k, r).state) << x.str() << r.str();
    EXPECT_NE(embed_wp_sobolev(x, k, r).state, VerdictState::Unknown);
  }
  // Sufficient implies necessary everywhere.
  for (int n = 0; n < 1000; ++n) {
    const Exponents x = random_tuple(rng);
    const ExtExp r(Scalar::ratio(5 + static_cast<int>(rng() % 20), 2));
    if (sobolev_sufficient(x, 1, r).holds()) EXPECT_TRUE(sobolev_necessary(x, 1, r).holds());
  }
}

}  // namespace
}  // namespace wavepacket
