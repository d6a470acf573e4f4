// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <cmath>
#include <vector>

#include "wavepacket/core.hpp"

namespace wavepacket {

// Truncated bivariate Taylor expansion: c(a, b) = d^a_x d^b_y f / (a! b!), a + b <= order.
class Jet2 {
 public:
  Jet2() = default;
  Jet2(int order, double value) : n_(order), c_((order + 1) * (order + 1), 0.0) { c_[0] = value; }

  static Jet2 var_x(int order, double x) {
    Jet2 j(order, x);
    if (order >= 1) j(1, 0) = 1.0;
    return j;
  }
  static Jet2 var_y(int order, double y) {
    Jet2 j(order, y);
    if (order >= 1) j(0, 1) = 1.0;
    return j;
  }

  int order() const { return n_; }
  double value() const { return c_[0]; }
  double& operator()(int a, int b) { return c_[a * (n_ + 1) + b]; }
  double operator()(int a, int b) const { return c_[a * (n_ + 1) + b]; }

  // Partial derivative d^a_x d^b_y.
  double derivative(int a, int b) const {
    double f = (*this)(a, b);
    for (int k = 2; k <= a; ++k) f *= k;
    for (int k = 2; k <= b; ++k) f *= k;
    return f;
  }

  friend Jet2 operator+(Jet2 x, const Jet2& y) {
    for (std::size_t k = 0; k < x.c_.size(); ++k) x.c_[k] += y.c_[k];
    return x;
  }
  friend Jet2 operator-(Jet2 x, const Jet2& y) {
    for (std::size_t k = 0; k < x.c_.size(); ++k) x.c_[k] -= y.c_[k];
    return x;
  }
  friend Jet2 operator-(Jet2 x) {
    for (double& v : x.c_) v = -v;
    return x;
  }
  friend Jet2 operator+(Jet2 x, double s) {
    x.c_[0] += s;
    return x;
  }
  friend Jet2 operator+(double s, Jet2 x) { return x + s; }
  friend Jet2 operator-(Jet2 x, double s) {
    x.c_[0] -= s;
    return x;
  }
  friend Jet2 operator-(double s, const Jet2& x) { return -x + s; }
  friend Jet2 operator*(Jet2 x, double s) {
    for (double& v : x.c_) v *= s;
    return x;
  }
  friend Jet2 operator*(double s, Jet2 x) { return x * s; }
  friend Jet2 operator/(Jet2 x, double s) { return x * (1.0 / s); }

  friend Jet2 operator*(const Jet2& x, const Jet2& y) {
    const int n = x.n_;
    Jet2 z(n, 0.0);
    for (int a = 0; a <= n; ++a)
      for (int b = 0; a + b <= n; ++b) {
        double s = 0.0;
        for (int i = 0; i <= a; ++i)
          for (int j = 0; j <= b; ++j) s += x(i, j) * y(a - i, b - j);
        z(a, b) = s;
      }
    return z;
  }

  friend Jet2 operator/(const Jet2& x, const Jet2& y) {
    const int n = x.n_;
    if (y.value() == 0.0) throw PreconditionError("jet division by zero");
    Jet2 z(n, 0.0);
    for (int d = 0; d <= n; ++d)
      for (int a = 0; a <= d; ++a) {
        const int b = d - a;
        double s = x(a, b);
        for (int i = 0; i <= a; ++i)
          for (int j = 0; j <= b; ++j)
            if (i + j > 0) s -= y(i, j) * z(a - i, b - j);
        z(a, b) = s / y.value();
      }
    return z;
  }

  friend Jet2 exp(const Jet2& x) {
    const int n = x.n_;
    Jet2 e(n, std::exp(x.value()));
    for (int d = 1; d <= n; ++d)
      for (int a = 0; a <= d; ++a) {
        const int b = d - a;
        double s = 0.0;
        if (a >= 1) {
          for (int i = 1; i <= a; ++i)
            for (int j = 0; j <= b; ++j) s += i * x(i, j) * e(a - i, b - j);
          e(a, b) = s / a;
        } else {
          for (int j = 1; j <= b; ++j) s += j * x(0, j) * e(0, b - j);
          e(0, b) = s / b;
        }
      }
    return e;
  }

 private:
  int n_ = 0;
  std::vector<double> c_ = {0.0};
};

inline double jet_value(double x) { return x; }
inline double jet_value(const Jet2& x) { return x.value(); }

// Constant of the same type as `like`.
inline double jet_const(double, double v) { return v; }
inline Jet2 jet_const(const Jet2& like, double v) { return Jet2(like.order(), v); }

}  // namespace wavepacket
