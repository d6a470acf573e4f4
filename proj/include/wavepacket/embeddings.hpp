// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "wavepacket/core.hpp"

namespace wavepacket {

// Exact rational when possible, double otherwise. Comparisons involving a double use
// a relative fuzz of 1e-12.
class Scalar {
 public:
  static constexpr double kFuzz = 1e-12;

  Scalar() = default;
  Scalar(std::int64_t n) : num_(n) {}  // NOLINT(google-explicit-constructor)
  static Scalar ratio(std::int64_t n, std::int64_t d) {
    if (d == 0) throw PreconditionError("zero denominator");
    return from128(n, d);
  }
  static Scalar real(double v) {
    if (!std::isfinite(v)) throw PreconditionError("non-finite scalar");
    Scalar s;
    s.exact_ = false;
    s.value_ = v;
    return s;
  }

  bool exact() const { return exact_; }
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return exact_ ? static_cast<double>(num_) / static_cast<double>(den_) : value_; }

  std::string str() const {
    if (!exact_) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", value_);
      return buf;
    }
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    if (a.exact_ && b.exact_) {
      return from128(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
    }
    return real(a.value() + b.value());
  }
  friend Scalar operator-(const Scalar& a) {
    if (a.exact_) return from128(-static_cast<__int128>(a.num_), a.den_);
    return real(-a.value_);
  }
  friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    if (a.exact_ && b.exact_) {
      return from128(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }
    return real(a.value() * b.value());
  }
  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    if (b.exact_ ? b.num_ == 0 : b.value_ == 0.0) throw PreconditionError("division by zero");
    if (a.exact_ && b.exact_) {
      return from128(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
    }
    return real(a.value() / b.value());
  }

  // -1, 0, 1; 0 within the fuzz when either side is inexact.
  friend int compare(const Scalar& a, const Scalar& b) {
    if (a.exact_ && b.exact_) {
      const __int128 l = static_cast<__int128>(a.num_) * b.den_, r = static_cast<__int128>(b.num_) * a.den_;
      return l < r ? -1 : (l > r ? 1 : 0);
    }
    const double x = a.value(), y = b.value();
    const double tol = kFuzz * std::max({1.0, std::abs(x), std::abs(y)});
    if (x - y > tol) return 1;
    if (y - x > tol) return -1;
    return 0;
  }
  friend bool operator<(const Scalar& a, const Scalar& b) { return compare(a, b) < 0; }
  friend bool operator<=(const Scalar& a, const Scalar& b) { return compare(a, b) <= 0; }
  friend bool operator>(const Scalar& a, const Scalar& b) { return compare(a, b) > 0; }
  friend bool operator>=(const Scalar& a, const Scalar& b) { return compare(a, b) >= 0; }
  friend bool operator==(const Scalar& a, const Scalar& b) { return compare(a, b) == 0; }

 private:
  static Scalar from128(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 a = n < 0 ? -n : n, b = d;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr __int128 lim = INT64_MAX;
    if (n > lim || -n > lim || d > lim) return real(static_cast<double>(n) / static_cast<double>(d));
    Scalar s;
    s.num_ = static_cast<std::int64_t>(n);
    s.den_ = static_cast<std::int64_t>(d);
    return s;
  }

  bool exact_ = true;
  std::int64_t num_ = 0, den_ = 1;
  double value_ = 0.0;
};

inline Scalar max(const Scalar& a, const Scalar& b) { return a < b ? b : a; }
inline Scalar min(const Scalar& a, const Scalar& b) { return a < b ? a : b; }
inline Scalar positive_part(const Scalar& a) { return max(a, Scalar(0)); }

// Exponent in (0, inf].
class ExtExp {
 public:
  ExtExp() = default;
  ExtExp(Scalar v) : v_(v) {  // NOLINT(google-explicit-constructor)
    if (!(v > Scalar(0))) throw PreconditionError("exponent must be positive: " + v.str());
  }
  ExtExp(std::int64_t v) : ExtExp(Scalar(v)) {}  // NOLINT(google-explicit-constructor)
  static ExtExp inf() {
    ExtExp e;
    e.inf_ = true;
    return e;
  }

  bool is_inf() const { return inf_; }
  const Scalar& finite() const {
    if (inf_) throw PreconditionError("exponent is infinite");
    return v_;
  }
  Scalar recip() const { return inf_ ? Scalar(0) : Scalar(1) / v_; }
  double value() const { return inf_ ? std::numeric_limits<double>::infinity() : v_.value(); }
  std::string str() const { return inf_ ? "inf" : v_.str(); }

  // Ordering through reciprocals; inf is largest.
  friend int compare(const ExtExp& a, const ExtExp& b) { return compare(b.recip(), a.recip()); }
  friend bool operator<(const ExtExp& a, const ExtExp& b) { return compare(a, b) < 0; }
  friend bool operator<=(const ExtExp& a, const ExtExp& b) { return compare(a, b) <= 0; }
  friend bool operator>(const ExtExp& a, const ExtExp& b) { return compare(a, b) > 0; }
  friend bool operator>=(const ExtExp& a, const ExtExp& b) { return compare(a, b) >= 0; }
  friend bool operator==(const ExtExp& a, const ExtExp& b) { return compare(a, b) == 0; }

 private:
  bool inf_ = false;
  Scalar v_ = Scalar(1);
};

inline ExtExp from_recip(const Scalar& r) {
  if (r == Scalar(0)) return ExtExp::inf();
  return ExtExp(Scalar(1) / r);
}

// Parses "3", "-0.25", "3/2", "1e-3", "inf".
inline Scalar parse_scalar(const std::string& text) {
  const std::string t = text;
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    return parse_scalar(t.substr(0, slash)) / parse_scalar(t.substr(slash + 1));
  }
  std::size_t i = 0;
  bool neg = false;
  if (i < t.size() && (t[i] == '+' || t[i] == '-')) neg = t[i++] == '-';
  __int128 mant = 0;
  int scale = 0, digits = 0;
  bool overflow = false;
  for (; i < t.size() && std::isdigit(static_cast<unsigned char>(t[i])); ++i, ++digits) {
    if (mant < (static_cast<__int128>(1) << 100)) mant = mant * 10 + (t[i] - '0');
    else { overflow = true; --scale; }
  }
  if (i < t.size() && t[i] == '.') {
    for (++i; i < t.size() && std::isdigit(static_cast<unsigned char>(t[i])); ++i, ++digits) {
      if (mant < (static_cast<__int128>(1) << 100)) {
        mant = mant * 10 + (t[i] - '0');
        ++scale;
      } else {
        overflow = true;
      }
    }
  }
  int ex = 0;
  if (i < t.size() && (t[i] == 'e' || t[i] == 'E')) {
    std::size_t used = 0;
    try {
      ex = std::stoi(t.substr(i + 1), &used);
    } catch (const std::exception&) {
      throw FormatError("malformed number: " + text);
    }
    i += 1 + used;
  }
  if (digits == 0 || i != t.size()) throw FormatError("malformed number: " + text);
  const int p10 = ex - scale;
  if (overflow || std::abs(p10) > 18) {
    double v = std::stod(t);
    return Scalar::real(v);
  }
  __int128 pw = 1;
  for (int k = 0; k < std::abs(p10); ++k) pw *= 10;
  const __int128 n = neg ? -mant : mant;
  constexpr __int128 lim = INT64_MAX;
  if (p10 >= 0) {
    const __int128 v = n * pw;
    if (v > lim || -v > lim) return Scalar::real(std::stod(t));
    return Scalar(static_cast<std::int64_t>(v));
  }
  __int128 a = mant, b = pw;
  while (b != 0) {
    const __int128 r = a % b;
    a = b;
    b = r;
  }
  const __int128 nn = n / (a ? a : 1), dd = pw / (a ? a : 1);
  if (nn > lim || -nn > lim || dd > lim) return Scalar::real(std::stod(t));
  return Scalar::ratio(static_cast<std::int64_t>(nn), static_cast<std::int64_t>(dd));
}

inline ExtExp parse_exponent(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "Inf" || text == "oo") return ExtExp::inf();
  return ExtExp(parse_scalar(text));
}

// ---------------------------------------------------------------------------
// Exponent arithmetic

inline ExtExp conj(const ExtExp& p) {
  if (p.is_inf()) return ExtExp(1);
  if (p.finite() <= Scalar(1)) return ExtExp::inf();
  return ExtExp(p.finite() / (p.finite() - Scalar(1)));
}

inline Scalar p_star(const ExtExp& p) { return min(p.recip(), Scalar(1) - p.recip()); }

inline Scalar p_dstar(const ExtExp& p) {
  const ExtExp pc = conj(p);
  return (p < pc ? p : pc).recip();
}

inline ExtExp r_down(const ExtExp& r) {
  const ExtExp rc = conj(r);
  return r < rc ? r : rc;
}

// q2 * (q1/q2)' via its reciprocal (1/q2 - 1/q1)_+.
inline ExtExp q_bracket(const ExtExp& q1, const ExtExp& q2) {
  return from_recip(positive_part(q2.recip() - q1.recip()));
}

// ---------------------------------------------------------------------------
// Verdicts

enum class VerdictState { Holds, Fails, Unknown };

inline const char* to_string(VerdictState s) {
  switch (s) {
    case VerdictState::Holds: return "Holds";
    case VerdictState::Fails: return "Fails";
    default: return "Unknown";
  }
}

struct Inequality {
  std::string label;  // e.g. "s1 >= rhs"
  std::string lhs, rhs;
  double lhs_value = 0.0, rhs_value = 0.0;
  bool strict = false;
  bool holds = false;
  double margin() const { return lhs_value - rhs_value; }
};

struct Verdict {
  VerdictState state = VerdictState::Unknown;
  std::vector<Inequality> trace;
  std::string reason;
  std::string branch;  // "mu", "nu", ...

  bool holds() const { return state == VerdictState::Holds; }
  bool fails() const { return state == VerdictState::Fails; }
};

struct Exponents {
  Scalar alpha = Scalar(1), beta = Scalar(1);
  ExtExp p = ExtExp(2), q = ExtExp(2);
  Scalar s = Scalar(0);

  void validate() const {
    if (!(Scalar(0) <= beta && beta <= alpha && alpha <= Scalar(1))) {
      throw PreconditionError("invalid params: need 0 <= beta <= alpha <= 1");
    }
  }
  std::string str() const {
    return "(alpha=" + alpha.str() + ", beta=" + beta.str() + ", p=" + p.str() + ", q=" + q.str() +
           ", s=" + s.str() + ")";
  }
};

namespace detail {

inline Inequality check(std::string label, const Scalar& lhs, const Scalar& rhs, bool strict) {
  Inequality in;
  in.label = std::move(label);
  in.lhs = lhs.str();
  in.rhs = rhs.str();
  in.lhs_value = lhs.value();
  in.rhs_value = rhs.value();
  in.strict = strict;
  in.holds = strict ? lhs > rhs : lhs >= rhs;
  return in;
}

inline Inequality check_exp(std::string label, const ExtExp& lhs, const ExtExp& rhs) {
  Inequality in;
  in.label = std::move(label);
  in.lhs = lhs.str();
  in.rhs = rhs.str();
  in.lhs_value = lhs.value();
  in.rhs_value = rhs.value();
  in.strict = false;
  in.holds = lhs <= rhs;
  return in;
}

// p1 <= p2 and s1 (>|>=) rhs; strict when q1 > q2.
inline Verdict two_part(const ExtExp& p1, const ExtExp& p2, const ExtExp& q1, const ExtExp& q2,
                        const Scalar& s1, const Scalar& rhs, std::string branch) {
  Verdict v;
  v.branch = std::move(branch);
  v.trace.push_back(check_exp("p1 <= p2", p1, p2));
  const bool strict = q1 > q2;
  v.trace.push_back(check(strict ? "s1 > rhs" : "s1 >= rhs", s1, rhs, strict));
  v.state = v.trace[0].holds && v.trace[1].holds ? VerdictState::Holds : VerdictState::Fails;
  return v;
}

}  // namespace detail

// W(src) into W(dst) for componentwise comparable (alpha, beta) pairs.
inline Verdict embed_wp_wp(const Exponents& src, const Exponents& dst) {
  src.validate();
  dst.validate();
  const bool src_low = src.alpha <= dst.alpha && src.beta <= dst.beta;
  const bool dst_low = dst.alpha <= src.alpha && dst.beta <= src.beta;
  if (!src_low && !dst_low) {
    Verdict v;
    v.state = VerdictState::Unknown;
    v.reason = "incomparable (alpha, beta) pairs; no characterization available";
    return v;
  }
  const Exponents& lo = src_low ? src : dst;
  const Exponents& hi = src_low ? dst : src;
  const Scalar kappa = src_low ? positive_part(p_dstar(dst.p) - src.q.recip())
                               : positive_part(dst.q.recip() - p_star(src.p));
  Scalar rhs = dst.s + (src.p.recip() - dst.p.recip()) * (lo.alpha + lo.beta) +
               kappa * (hi.alpha - lo.alpha + hi.beta - lo.beta);
  if (src.q > dst.q) rhs = rhs + (Scalar(2) - hi.alpha - hi.beta) * (dst.q.recip() - src.q.recip());
  Verdict v = detail::two_part(src.p, dst.p, src.q, dst.q, src.s, rhs, src_low ? "mu" : "nu");
  v.reason = (src_low ? "mu = " : "nu = ") + kappa.str();
  return v;
}

inline Verdict embed_wp_besov(const Exponents& src, const ExtExp& p2, const ExtExp& q2, const Scalar& s2) {
  src.validate();
  const Scalar mu = positive_part(p_dstar(p2) - src.q.recip());
  const Scalar ab = src.alpha + src.beta;
  const Scalar rhs = s2 + ab * (src.p.recip() - p2.recip() - mu) + Scalar(2) * mu;
  Verdict v = detail::two_part(src.p, p2, src.q, q2, src.s, rhs, "mu");
  v.reason = "mu = " + mu.str();
  return v;
}

inline Verdict embed_besov_wp(const ExtExp& p1, const ExtExp& q1, const Scalar& s1, const Exponents& dst) {
  dst.validate();
  const Scalar nu = positive_part(dst.q.recip() - p_star(p1));
  const Scalar ab = dst.alpha + dst.beta;
  const Scalar rhs = dst.s + ab * (p1.recip() - dst.p.recip() - nu) + Scalar(2) * nu;
  Verdict v = detail::two_part(p1, dst.p, q1, dst.q, s1, rhs, "nu");
  v.reason = "nu = " + nu.str();
  return v;
}

// W(a) = W(b) as sets with equivalent quasi-norms.
inline Verdict coincide(const Exponents& a, const Exponents& b) {
  a.validate();
  b.validate();
  Verdict v;
  auto eq = [&](const char* name, std::string l, std::string r, bool same) {
    Inequality in;
    in.label = name;
    in.lhs = std::move(l);
    in.rhs = std::move(r);
    in.holds = same;
    v.trace.push_back(in);
    return same;
  };
  bool ok = eq("p1 == p2", a.p.str(), b.p.str(), a.p == b.p);
  ok = eq("q1 == q2", a.q.str(), b.q.str(), a.q == b.q) && ok;
  ok = eq("s1 == s2", a.s.str(), b.s.str(), a.s == b.s) && ok;
  const bool l2 = a.p == ExtExp(2) && a.q == ExtExp(2);
  if (ok && l2) {
    v.branch = "L2-Sobolev";
  } else {
    ok = eq("alpha1 == alpha2", a.alpha.str(), b.alpha.str(), a.alpha == b.alpha) && ok;
    ok = eq("beta1 == beta2", a.beta.str(), b.beta.str(), a.beta == b.beta) && ok;
    v.branch = "rigidity";
  }
  v.state = ok ? VerdictState::Holds : VerdictState::Fails;
  return v;
}

// Sufficient condition for W(src) into W^{k,r}, evaluated with r_down(r).
inline Verdict sobolev_sufficient(const Exponents& src, int k, const ExtExp& r) {
  const ExtExp rd = r_down(r);
  const Scalar ab = src.alpha + src.beta;
  Scalar rhs = Scalar(k) + ab * (src.p.recip() - r.recip());
  const bool strict = src.q > rd;
  if (strict) rhs = rhs + (Scalar(2) - ab) * (rd.recip() - src.q.recip());
  Verdict v;
  v.branch = "sufficient";
  v.trace.push_back(detail::check_exp("p <= r", src.p, r));
  v.trace.push_back(detail::check(strict ? "s > rhs" : "s >= rhs", src.s, rhs, strict));
  v.state = v.trace[0].holds && v.trace[1].holds ? VerdictState::Holds : VerdictState::Fails;
  return v;
}

// Necessary condition; for r = inf the sufficient condition is itself necessary.
inline Verdict sobolev_necessary(const Exponents& src, int k, const ExtExp& r) {
  if (r.is_inf()) {
    Verdict v = sobolev_sufficient(src, k, r);
    v.branch = "necessary";
    return v;
  }
  const Scalar ab = src.alpha + src.beta;
  Scalar rhs = Scalar(k) + ab * (src.p.recip() - r.recip());
  const bool strict = src.q > r;
  if (strict) rhs = rhs + (Scalar(2) - ab) * (r.recip() - src.q.recip());
  Verdict v;
  v.branch = "necessary";
  v.trace.push_back(detail::check_exp("p <= r", src.p, r));
  v.trace.push_back(detail::check(strict ? "s > rhs" : "s >= rhs", src.s, rhs, strict));
  if (ExtExp(2) < r) {
    Scalar sp = Scalar(k) + ab * positive_part(src.p.recip() - Scalar::ratio(1, 2));
    const bool st = src.q > ExtExp(2);
    if (st) sp = sp + (Scalar(2) - ab) * (Scalar::ratio(1, 2) - src.q.recip());
    v.trace.push_back(detail::check(st ? "s > special" : "s >= special", src.s, sp, st));
  }
  bool ok = true;
  for (const auto& in : v.trace) ok = ok && in.holds;
  v.state = ok ? VerdictState::Holds : VerdictState::Fails;
  return v;
}

inline Verdict embed_wp_sobolev(const Exponents& src, int k, const ExtExp& r) {
  src.validate();
  if (k < 0) throw PreconditionError("k must be a nonnegative integer");
  if (r < ExtExp(1)) throw PreconditionError("r must be >= 1");
  const Verdict suf = sobolev_sufficient(src, k, r);
  if (suf.holds()) return suf;
  const Verdict nec = sobolev_necessary(src, k, r);
  if (nec.fails()) {
    Verdict v = nec;
    v.trace.insert(v.trace.begin(), suf.trace.begin(), suf.trace.end());
    return v;
  }
  Verdict v;
  v.state = VerdictState::Unknown;
  v.branch = "gap";
  v.reason = "characterization gap for 2 < r < inf";
  v.trace = suf.trace;
  v.trace.insert(v.trace.end(), nec.trace.begin(), nec.trace.end());
  return v;
}

}  // namespace wavepacket
