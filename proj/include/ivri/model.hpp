#pragma once

// SDEs with internal variables and random input (m >= 3 coordinates):
//
//   dX_1 = F(X_1, ..., X_{m-1}) dt + dX_m
//   dX_i = (-a_i(X_1) X_i + b_i(X_1)) dt,          i = 2..m-1
//   dX_m = b_m(t, X_m) dt + sigma(X_m) dW
//
// Coordinates are 0-based in code: x[0] is X_1, x[m-1] is X_m.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ivri/errors.hpp"
#include "ivri/jet.hpp"
#include "ivri/noise.hpp"

namespace ivri {

template <class T>
struct RatePair {
  T a;  ///< decay coefficient a_i
  T b;  ///< source coefficient b_i
};

/// Coefficients of one internal variable as functions of the first coordinate.
struct GateCoefficients {
  std::string name;
  std::function<RatePair<double>(double)> rates;
  std::function<RatePair<Jet>(const Jet&)> rates_jet;
};

/// Autonomous scalar input dX_m = b_m(t, X_m) dt + sigma(X_m) dW on the open
/// interval U = (lower, upper).
struct InputProcess {
  std::function<double(double, double)> drift;
  std::function<double(double)> diffusion;
  std::function<double(double)> diffusion_derivative;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x > lower && x < upper; }
  bool whole_line() const { return std::isinf(lower) && std::isinf(upper); }

  static InputProcess from(const NoiseSpec& noise) {
    noise.validate();
    InputProcess p;
    p.drift = [noise](double t, double x) { return noise.drift(t, x); };
    p.diffusion = [noise](double x) { return noise.diffusion(x); };
    p.diffusion_derivative = [noise](double x) { return noise.diffusion_derivative(x); };
    std::tie(p.lower, p.upper) = noise.admissible();
    return p;
  }
};

struct IvriModel {
  std::string name;
  int dimension = 0;  ///< m
  /// F evaluated on the first m-1 coordinates.
  std::function<double(std::span<const double>)> f;
  /// F as a jet in the first coordinate, remaining coordinates frozen at x.
  std::function<Jet(const Jet&, std::span<const double>)> f_jet;
  std::vector<GateCoefficients> gates;  ///< m-2 entries, coordinates 1..m-2
  InputProcess input;

  std::size_t size() const { return static_cast<std::size_t>(dimension); }
  std::size_t input_index() const { return size() - 1; }

  void validate() const {
    if (dimension < 3) throw DomainError("IvriModel: dimension must be >= 3");
    if (gates.size() != size() - 2)
      throw DomainError("IvriModel: expected dimension-2 gate coefficient pairs");
    if (!f || !f_jet || !input.drift || !input.diffusion)
      throw DomainError("IvriModel: missing evaluator");
  }

  /// J_i(x) of the determinant criterion: J_1 = F, J_i = -a_i x_i + b_i.
  double internal_drift(std::size_t i, std::span<const double> x) const {
    if (i == 0) return f(x.first(size() - 1));
    const auto r = gates[i - 1].rates(x[0]);
    return -r.a * x[i] + r.b;
  }

  /// Drift of the deterministic subsystem with input current I (first m-1
  /// coordinates): dz_1 = F + I, dz_i = -a_i z_i + b_i.
  void deterministic_rhs(double input_current, std::span<const double> z,
                         std::span<double> dz) const {
    dz[0] = f(z.first(size() - 1)) + input_current;
    for (std::size_t i = 1; i + 1 < size(); ++i) {
      const auto r = gates[i - 1].rates(z[0]);
      dz[i] = -r.a * z[i] + r.b;
    }
  }

  /// Ito drift b(t, x) of the full m-dimensional system.
  void drift(double t, std::span<const double> x, std::span<double> out) const {
    const double bm = input.drift(t, x[input_index()]);
    deterministic_rhs(bm, x, out);
    out[input_index()] = bm;
  }

  /// Stratonovich drift b_i - 1/2 sum_k sigma_k d sigma_i / dx_k. Only
  /// coordinates 1 and m carry sigma(x_m), so the correction is
  /// -1/2 sigma sigma' on both.
  void stratonovich_drift(double t, std::span<const double> x,
                          std::span<double> out) const {
    drift(t, x, out);
    const double xm = x[input_index()];
    const double sigma = input.diffusion(xm);
    const double dsigma = input.diffusion_derivative ? input.diffusion_derivative(xm) : 0.0;
    const double corr = sigma == 0.0 ? 0.0 : 0.5 * sigma * dsigma;
    out[0] -= corr;
    out[input_index()] -= corr;
  }

  /// Diffusion vector (sigma(x_m), 0, ..., 0, sigma(x_m)).
  void diffusion(std::span<const double> x, std::span<double> out) const {
    const double s = input.diffusion(x[input_index()]);
    for (auto& o : out) o = 0.0;
    out[0] = s;
    out[input_index()] = s;
  }

  /// True if x lies in R x [0,1]^{m-2} x U.
  bool in_state_space(std::span<const double> x) const {
    if (x.size() != size() || !std::isfinite(x[0])) return false;
    for (std::size_t i = 1; i + 1 < size(); ++i)
      if (!(x[i] >= 0.0 && x[i] <= 1.0)) return false;
    return input.contains(x[input_index()]);
  }
};

}  // namespace ivri
