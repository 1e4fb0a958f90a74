#pragma once

// Scalar random input of the neuron: Ornstein-Uhlenbeck or Cox-Ingersoll-Ross
// type, mean-reverting towards a deterministic signal S(t):
//
//   dxi = tau (S(t) - xi) dt + gamma q(xi) sqrt(tau) dW
//
// q = 1 for OU (U = R), q(x) = sqrt((x + K) v 0) for CIR (U = (-K, inf)).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "ivri/errors.hpp"

namespace ivri {

/// Deterministic signal carried by the input. Constant, sinusoidal and ramp
/// signals have factories; any smooth callable can be wrapped directly.
struct Signal {
  std::function<double(double)> value;
  double sup_abs = 0.0;  ///< sup_t |S(t)| over the horizon of interest
  std::string label;

  double operator()(double t) const { return value(t); }

  static Signal constant(double s0) {
    return {[s0](double) { return s0; }, std::abs(s0), "constant"};
  }

  /// S(t) = mean + amplitude * sin(2 pi t / period)
  static Signal sinusoid(double mean, double amplitude, double period) {
    if (!(period > 0.0)) throw DomainError("sinusoidal signal needs period > 0");
    return {[=](double t) {
              return mean + amplitude * std::sin(2.0 * std::numbers::pi * t / period);
            },
            std::abs(mean) + std::abs(amplitude), "sinusoid"};
  }

  /// S(t) = s0 + slope * t. sup_abs is evaluated on [0, horizon].
  static Signal ramp(double s0, double slope, double horizon) {
    return {[=](double t) { return s0 + slope * t; },
            std::max(std::abs(s0), std::abs(s0 + slope * horizon)), "ramp"};
  }
};

enum class NoiseKind { OrnsteinUhlenbeck, CoxIngersollRoss };

inline const char* to_string(NoiseKind k) {
  return k == NoiseKind::OrnsteinUhlenbeck ? "ou" : "cir";
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::OrnsteinUhlenbeck;
  double tau = 1.0;    ///< mean-reversion rate (1/ms)
  double gamma = 0.5;  ///< spread
  double shift = 0.0;  ///< K, CIR only
  Signal signal = Signal::constant(0.0);

  /// gamma = 0 is accepted: the input then degenerates to a deterministic
  /// relaxation towards S, which the zero-noise consistency checks rely on.
  void validate() const {
    if (!(tau > 0.0)) throw DomainError("noise: tau must be > 0");
    if (!(gamma >= 0.0)) throw DomainError("noise: gamma must be >= 0");
    if (kind == NoiseKind::CoxIngersollRoss) {
      const double lower = 0.5 * gamma * gamma + signal.sup_abs;
      if (!(shift > lower))
        throw DomainError("noise: CIR shift K must exceed gamma^2/2 + sup|S| = " +
                          std::to_string(lower));
    }
  }

  /// Open admissible interval U of the input.
  std::pair<double, double> admissible() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (kind == NoiseKind::CoxIngersollRoss) return {-shift, inf};
    return {-inf, inf};
  }

  bool in_admissible(double x) const {
    auto [lo, hi] = admissible();
    return x > lo && x < hi;
  }

  double drift(double t, double x) const { return tau * (signal(t) - x); }

  double diffusion(double x) const {
    const double scale = gamma * std::sqrt(tau);
    if (kind == NoiseKind::OrnsteinUhlenbeck) return scale;
    return scale * std::sqrt(std::max(x + shift, 0.0));
  }

  /// d sigma / dx; zero for OU. Infinite at (and undefined below) the CIR barrier.
  double diffusion_derivative(double x) const {
    if (kind == NoiseKind::OrnsteinUhlenbeck) return 0.0;
    const double y = x + shift;
    if (y <= 0.0) return std::numeric_limits<double>::infinity();
    return gamma * std::sqrt(tau) / (2.0 * std::sqrt(y));
  }

  /// Standard deviation of the stationary law for a constant signal; used to
  /// scale the input coordinate in hitting-ball metrics.
  double stationary_spread() const {
    if (kind == NoiseKind::OrnsteinUhlenbeck) return gamma / std::sqrt(2.0);
    return gamma * std::sqrt(std::max(shift + signal(0.0), 0.0) / 2.0);
  }
};

}  // namespace ivri
