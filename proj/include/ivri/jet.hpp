#pragma once

// Univariate truncated Taylor arithmetic.
//
// A Jet of order K stores the Taylor coefficients c_0..c_K of a scalar
// function about an expansion point; the k-th derivative is k! * c_k.
// Coefficients (not raw derivatives) are stored so that Cauchy products stay
// well scaled at order 8.

#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <string>

#include "ivri/errors.hpp"

namespace ivri {

class Jet {
 public:
  static constexpr int kMaxOrder = 8;

  Jet() = default;

  /// Jet of the constant function `value`.
  static Jet constant(double value, int order) {
    Jet j(order);
    j.c_[0] = value;
    return j;
  }

  /// Jet of the identity function expanded at `x0` (the seed variable).
  static Jet variable(double x0, int order) {
    if (order < 1) throw DomainError("Jet::variable: order must be >= 1");
    Jet j(order);
    j.c_[0] = x0;
    j.c_[1] = 1.0;
    return j;
  }

  int order() const noexcept { return order_; }
  double value() const noexcept { return c_[0]; }
  double coeff(int k) const { return k <= order_ ? c_[check(k)] : 0.0; }
  double& coeff_ref(int k) { return c_[check(k)]; }

  /// k-th derivative at the expansion point.
  double derivative(int k) const {
    if (k > order_) return 0.0;
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f * c_[check(k)];
  }

  std::span<const double> coeffs() const noexcept {
    return {c_.data(), static_cast<std::size_t>(order_ + 1)};
  }

  bool all_finite() const noexcept {
    for (int k = 0; k <= order_; ++k)
      if (!std::isfinite(c_[k])) return false;
    return true;
  }

  Jet operator-() const {
    Jet r(*this);
    for (int k = 0; k <= order_; ++k) r.c_[k] = -r.c_[k];
    return r;
  }

  Jet& operator+=(const Jet& b) {
    same_order(b);
    for (int k = 0; k <= order_; ++k) c_[k] += b.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& b) {
    same_order(b);
    for (int k = 0; k <= order_; ++k) c_[k] -= b.c_[k];
    return *this;
  }
  Jet& operator*=(const Jet& b) {
    same_order(b);
    Jet r(order_);
    for (int k = 0; k <= order_; ++k) {
      double s = 0.0;
      for (int j = 0; j <= k; ++j) s += c_[j] * b.c_[k - j];
      r.c_[k] = s;
    }
    return *this = r;
  }
  Jet& operator/=(const Jet& b) {
    same_order(b);
    if (b.c_[0] == 0.0)
      throw DomainError("Jet division by a jet with zero constant term");
    Jet q(order_);
    for (int k = 0; k <= order_; ++k) {
      double s = c_[k];
      for (int j = 1; j <= k; ++j) s -= b.c_[j] * q.c_[k - j];
      q.c_[k] = s / b.c_[0];
    }
    return *this = q;
  }

  Jet& operator+=(double s) { c_[0] += s; return *this; }
  Jet& operator-=(double s) { c_[0] -= s; return *this; }
  Jet& operator*=(double s) {
    for (int k = 0; k <= order_; ++k) c_[k] *= s;
    return *this;
  }
  Jet& operator/=(double s) {
    if (s == 0.0) throw DomainError("Jet division by zero scalar");
    for (int k = 0; k <= order_; ++k) c_[k] /= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
  friend Jet operator/(Jet a, const Jet& b) { return a /= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(double s, const Jet& a) { return constant(s, a.order_) / a; }

  friend Jet exp(const Jet& a) {
    Jet e(a.order_);
    e.c_[0] = std::exp(a.c_[0]);
    for (int k = 1; k <= a.order_; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += j * a.c_[j] * e.c_[k - j];
      e.c_[k] = s / k;
    }
    return e;
  }

  /// exp(a) - 1 with the constant term taken from std::expm1.
  friend Jet expm1(const Jet& a) {
    Jet e = exp(a);
    e.c_[0] = std::expm1(a.c_[0]);
    return e;
  }

 private:
  explicit Jet(int order) : order_(order) {
    if (order < 0 || order > kMaxOrder)
      throw DomainError("Jet order must lie in [0, " + std::to_string(kMaxOrder) + "]");
  }

  static int check(int k) {
    if (k < 0 || k > kMaxOrder) throw DomainError("Jet coefficient index out of range");
    return k;
  }

  void same_order(const Jet& b) const {
    if (b.order_ != order_) throw DomainError("Jet operands have different orders");
  }

  int order_ = 0;
  std::array<double, kMaxOrder + 1> c_{};
};

namespace detail {

// Maclaurin coefficients of u / (e^u - 1): B_j / j!. Odd entries beyond j = 1
// vanish. The series converges for |u| < 2*pi.
inline constexpr std::array<double, 41> kBernoulliOverFactorial = {
    1.00000000000000000e+00,  -5.00000000000000000e-01, 8.33333333333333287e-02,
    0.0, -1.38888888888888894e-03, 0.0, 3.30687830687830710e-05, 0.0,
    -8.26719576719576754e-07, 0.0, 2.08767569878681002e-08, 0.0,
    -5.28419013868749322e-10, 0.0, 1.33825365306846789e-11, 0.0,
    -3.38968029632258272e-13, 0.0, 8.58606205627784517e-15, 0.0,
    -2.17486869855806192e-16, 0.0, 5.50900282836022953e-18, 0.0,
    -1.39544646858125223e-19, 0.0, 3.53470703962946728e-21, 0.0,
    -8.95351742703754628e-23, 0.0, 2.26795245233768293e-24, 0.0,
    -5.74479066887220246e-26, 0.0, 1.45517247561486496e-27, 0.0,
    -3.68599494066531029e-29, 0.0, 9.33673425709504507e-31, 0.0,
    -2.36502241570062995e-32};

}  // namespace detail

/// |u| below which u/(e^u - 1) is evaluated from its Maclaurin series.
/// The quotient recurrence loses about k*log10(1/|u|) digits in the k-th
/// coefficient, so the switch sits well away from the removable singularity.
inline constexpr double kExpm1RatioSwitch = 1.0;

inline double expm1_ratio(double u) {
  return u == 0.0 ? 1.0 : u / std::expm1(u);
}

/// Series branch of g(u) = u / (e^u - 1): Taylor coefficients of g about
/// u.value() summed from the Maclaurin series, composed with u - u.value().
inline Jet expm1_ratio_series(const Jet& u) {
  const auto& b = detail::kBernoulliOverFactorial;
  const int order = u.order();
  const double u0 = u.value();
  const int top = static_cast<int>(b.size()) - 1;

  std::array<double, Jet::kMaxOrder + 1> taylor{};
  for (int k = 0; k <= order; ++k) {
    // sum_{j>=k} b_j * C(j,k) * u0^(j-k), Horner in u0
    double s = 0.0;
    for (int j = top; j >= k; --j) {
      double binom = 1.0;
      for (int i = 1; i <= k; ++i) binom = binom * (j - k + i) / i;
      s = s * u0 + b[j] * binom;
    }
    taylor[k] = s;
  }

  Jet w = u - u0;
  Jet r = Jet::constant(taylor[order], order);
  for (int k = order - 1; k >= 0; --k) r = r * w + taylor[k];
  return r;
}

/// Quotient branch of g(u) = u / (e^u - 1).
inline Jet expm1_ratio_quotient(const Jet& u) { return u / expm1(u); }

/// Jet of g(u) = u / (e^u - 1), smooth through the removable singularity at 0.
inline Jet expm1_ratio(const Jet& u) {
  return std::abs(u.value()) < kExpm1RatioSwitch ? expm1_ratio_series(u)
                                                 : expm1_ratio_quotient(u);
}

}  // namespace ivri
