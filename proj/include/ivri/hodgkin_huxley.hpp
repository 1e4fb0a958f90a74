#pragma once

// Hodgkin-Huxley membrane model with the shifted-voltage convention (resting
// potential near 0 mV). Units: mV, ms, mS/cm^2, uA/cm^2.
//
// The rate functions are templated on the scalar type so that the same code
// yields values (double) and truncated Taylor expansions (Jet). alpha_n and
// alpha_m are written through g(u) = u / (e^u - 1), which removes the 0/0 at
// v = 10 and v = 25.

#include <array>
#include <cmath>
#include <span>
#include <sstream>
#include <string>

#include "ivri/errors.hpp"
#include "ivri/jet.hpp"
#include "ivri/model.hpp"
#include "ivri/noise.hpp"

namespace ivri::hh {

struct HHParams {
  double g_k = 36.0;
  double g_na = 120.0;
  double g_l = 0.3;
  double e_k = -12.0;
  double e_na = 120.0;
  double e_l = 10.6;

  void validate() const {
    if (!(g_k > 0.0 && g_na > 0.0 && g_l > 0.0))
      throw DomainError("HH conductances must be > 0");
  }
};

enum class Gate { N = 0, M = 1, H = 2 };
inline constexpr std::array<Gate, 3> kGates = {Gate::N, Gate::M, Gate::H};

inline const char* gate_name(Gate g) {
  switch (g) {
    case Gate::N: return "n";
    case Gate::M: return "m";
    case Gate::H: return "h";
  }
  return "?";
}

template <class T>
struct AlphaBeta {
  T alpha;
  T beta;
};

template <class T> T alpha_n(const T& v) { return 0.1 * expm1_ratio(1.0 - 0.1 * v); }
template <class T> T beta_n(const T& v) { using std::exp; return 0.125 * exp(-v / 80.0); }
template <class T> T alpha_m(const T& v) { return expm1_ratio(2.5 - 0.1 * v); }
template <class T> T beta_m(const T& v) { using std::exp; return 4.0 * exp(-v / 18.0); }
template <class T> T alpha_h(const T& v) { using std::exp; return 0.07 * exp(-v / 20.0); }
template <class T> T beta_h(const T& v) { using std::exp; return 1.0 / (exp(3.0 - 0.1 * v) + 1.0); }

template <class T>
AlphaBeta<T> rate(Gate g, const T& v) {
  switch (g) {
    case Gate::N: return {alpha_n(v), beta_n(v)};
    case Gate::M: return {alpha_m(v), beta_m(v)};
    case Gate::H: return {alpha_h(v), beta_h(v)};
  }
  throw DomainError("unknown gate");
}

/// Rates as jets of the given order expanded at v.
inline AlphaBeta<Jet> rate_jet(Gate g, double v, int order) {
  return rate(g, Jet::variable(v, order));
}

/// Coefficients in the internal-variable form: a = alpha + beta, b = alpha.
template <class T>
RatePair<T> gate_coefficients(Gate g, const T& v) {
  auto r = rate(g, v);
  return {r.alpha + r.beta, r.alpha};
}

/// Steady state alpha / (alpha + beta) of a gate with the potential frozen at v.
template <class T>
T gate_infty(Gate g, const T& v) {
  auto r = rate(g, v);
  return r.alpha / (r.alpha + r.beta);
}

/// Membrane drift F(v, n, m, h) = -(I_K + I_Na + I_L).
template <class T>
T membrane_drift(const HHParams& p, const T& v, double n, double m, double h) {
  const double n4 = n * n * n * n;
  const double m3h = m * m * m * h;
  return -((v - p.e_k) * (p.g_k * n4) + (v - p.e_na) * (p.g_na * m3h) + (v - p.e_l) * p.g_l);
}

/// dF/dv, constant in v: -(g_K n^4 + g_Na m^3 h + g_L).
inline double membrane_drift_dv(const HHParams& p, double n, double m, double h) {
  return -(p.g_k * n * n * n * n + p.g_na * m * m * m * h + p.g_l);
}

/// Constant input current c whose equilibrium has potential v:
/// c = -F(v, n_inf(v), m_inf(v), h_inf(v)). Strictly increasing on (-15, 30).
template <class T>
T f_infinity(const HHParams& p, const T& v) {
  const T n = gate_infty(Gate::N, v);
  const T m = gate_infty(Gate::M, v);
  const T h = gate_infty(Gate::H, v);
  const T n4 = n * n * n * n;
  const T m3h = m * m * m * h;
  return (v - p.e_k) * (p.g_k * n4) + (v - p.e_na) * (p.g_na * m3h) + (v - p.e_l) * p.g_l;
}

/// The monotonicity interval on which equilibrium_v is defined.
inline constexpr double kBranchLo = -15.0;
inline constexpr double kBranchHi = 30.0;

/// Unique v in (-15, 30) with f_infinity(v) = c: bracketing bisection, then
/// Newton steps using the jet derivative. Residual target 1e-10.
inline double equilibrium_v(const HHParams& p, double c) {
  double lo = kBranchLo, hi = kBranchHi;
  const double f_lo = f_infinity(p, lo), f_hi = f_infinity(p, hi);
  if (!(c > f_lo && c < f_hi)) {
    std::ostringstream os;
    os.precision(17);
    os << "equilibrium_v: input c = " << c << " outside (" << f_lo << ", " << f_hi
       << "), the image of the monotonicity interval (-15, 30)";
    throw DomainError(os.str());
  }
  constexpr int kMaxIterations = 200;
  constexpr double kResidual = 1e-10;
  int it = 0;
  for (; it < kMaxIterations && hi - lo > 1e-6; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f_infinity(p, mid) < c ? lo : hi) = mid;
  }
  double v = 0.5 * (lo + hi);
  for (; it < kMaxIterations; ++it) {
    const Jet fj = f_infinity(p, Jet::variable(v, 1));
    const double r = fj.value() - c;
    if (std::abs(r) <= kResidual) return v;
    double next = v - r / fj.coeff(1);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // keep the bracket
    (f_infinity(p, next) < c ? lo : hi) = next;
    v = next;
  }
  if (std::abs(f_infinity(p, v) - c) <= kResidual) return v;
  throw NumericError("equilibrium_v: no convergence to residual 1e-10");
}

/// Equilibrium state (v, n_inf, m_inf, h_inf) of the 4D system.
inline std::array<double, 4> branch_state(double v) {
  return {v, gate_infty(Gate::N, v), gate_infty(Gate::M, v), gate_infty(Gate::H, v)};
}

/// Right-hand side of the deterministic 4D system with input current I.
inline void rhs(const HHParams& p, double input_current, std::span<const double> x,
                std::span<double> dx) {
  const double v = x[0];
  dx[0] = input_current + membrane_drift(p, v, x[1], x[2], x[3]);
  for (Gate g : kGates) {
    const int i = static_cast<int>(g) + 1;
    const auto r = rate(g, v);
    dx[i] = r.alpha * (1.0 - x[i]) - r.beta * x[i];
  }
}

/// Vector field (t, x, dx) of the 4D system driven by the input I(t).
template <class Input>
auto vector_field(const HHParams& p, Input input) {
  return [p, input](double t, std::span<const double> x, std::span<double> dx) {
    rhs(p, input(t), x, dx);
  };
}

/// The 5D stochastic model: gates (n, m, h) as internal variables, the input
/// xi as last coordinate.
inline IvriModel make_model(const HHParams& p, const NoiseSpec& noise) {
  p.validate();
  IvriModel model;
  model.name = "hodgkin-huxley";
  model.dimension = 5;
  model.f = [p](std::span<const double> x) {
    return membrane_drift(p, x[0], x[1], x[2], x[3]);
  };
  model.f_jet = [p](const Jet& v, std::span<const double> x) {
    return membrane_drift(p, v, x[1], x[2], x[3]);
  };
  for (Gate g : kGates) {
    model.gates.push_back({gate_name(g),
                           [g](double v) { return gate_coefficients(g, v); },
                           [g](const Jet& v) { return gate_coefficients(g, v); }});
  }
  model.input = InputProcess::from(noise);
  return model;
}

}  // namespace ivri::hh
