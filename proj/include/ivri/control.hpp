#pragma once

// Cameron-Martin controls for IVRI models. Replacing dW by hdot(s) ds turns
// the Stratonovich SDE into the ODE
//
//   x' = b~(s, x) + sigma(x_m) hdot(s) (e_1 + e_m),   b~ = b - 1/2 sigma sigma' (e_1 + e_m)
//
// Two controls are built here: one steering x_1 along a smooth bridge to a
// target level (accessibility), and one making x_m follow x_m(0) + int I
// (imitation of a deterministic input I).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "ivri/errors.hpp"
#include "ivri/model.hpp"
#include "ivri/ode.hpp"
#include "ivri/trajectory.hpp"

namespace ivri {

/// Quintic smoothstep from x1 (s = 0) to z1 (s >= 1); first and second
/// derivatives vanish at both ends.
struct Bridge {
  double x1 = 0.0;
  double z1 = 0.0;

  double operator()(double s) const {
    if (s <= 0.0) return x1;
    if (s >= 1.0) return z1;
    return x1 + (z1 - x1) * s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  }
  double derivative(double s) const {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double u = s * (1.0 - s);
    return (z1 - x1) * 30.0 * u * u;
  }
};

inline Bridge smooth_bridge(double x1, double z1) { return {x1, z1}; }

/// Deterministic path Z started at x: Z_1 follows the bridge, the internal
/// variables are driven by it, and Z_m = x_m - x_1 + gamma(s) - int_0^s F(Z).
struct AccessibilityPath {
  Bridge bridge;
  Trajectory path;
};

/// RK4 with step dt on the augmented system (Z_2..Z_{m-1}, int F). Requires
/// t > 1 and an input living on the whole real line.
inline AccessibilityPath accessibility_path(const IvriModel& model, std::span<const double> x,
                                            double z1, double t, double dt = 0.01) {
  model.validate();
  if (!(t > 1.0)) throw DomainError("accessibility_path: horizon t must exceed 1");
  if (!model.input.whole_line())
    throw DomainError("accessibility_path: only defined for inputs with U = R (use OU noise)");
  if (x.size() != model.size()) throw DomainError("accessibility_path: state dimension mismatch");
  const std::size_t m = model.size(), last = m - 1;
  const Bridge g = smooth_bridge(x[0], z1);

  // y = (Z_2, ..., Z_{m-1}, int F)
  std::vector<double> y0(x.begin() + 1, x.begin() + static_cast<std::ptrdiff_t>(last));
  y0.push_back(0.0);
  std::vector<double> z(m - 1);
  auto rhs = [&](double s, std::span<const double> y, std::span<double> dy) {
    const double v = g(s);
    z[0] = v;
    for (std::size_t i = 1; i < last; ++i) z[i] = y[i - 1];
    for (std::size_t i = 1; i < last; ++i) {
      const auto r = model.gates[i - 1].rates(v);
      dy[i - 1] = -r.a * y[i - 1] + r.b;
    }
    dy[last - 1] = model.f(z);
  };
  const Trajectory aug = integrate_ode(rhs, y0, 0.0, t, dt, 1, model.name);

  AccessibilityPath out{g, Trajectory(m, {model.name, "rk4", dt})};
  out.path.reserve(aug.size());
  std::vector<double> row(m);
  for (std::size_t k = 0; k < aug.size(); ++k) {
    const double s = aug.time(k);
    const auto y = aug.state(k);
    row[0] = g(s);
    for (std::size_t i = 1; i < last; ++i) row[i] = y[i - 1];
    row[last] = x[last] - x[0] + g(s) - y[last - 1];
    out.path.push_back(s, row);
  }
  return out;
}

/// Per internal variable: distance to its equilibrium b_i/a_i at the target
/// level, at s = 1 and at the horizon, and the exponential bound
/// |Z_i(1) - y_inf| exp(-a_i(z1)(t - 1)) the horizon distance must respect.
struct GatingRelaxation {
  std::vector<double> distance_at_1;
  std::vector<double> distance_at_t;
  std::vector<double> bound;

  bool within(double slack) const {
    for (std::size_t i = 0; i < bound.size(); ++i)
      if (distance_at_t[i] > bound[i] + slack) return false;
    return true;
  }
};

inline GatingRelaxation gating_relaxation(const IvriModel& model, const AccessibilityPath& acc) {
  const auto& p = acc.path;
  const auto& ts = p.times();
  std::size_t i1 = 0;
  while (i1 + 1 < ts.size() && ts[i1] < 1.0 - 1e-12) ++i1;
  if (std::abs(ts[i1] - 1.0) > 1e-9)
    throw DomainError("gating_relaxation: s = 1 is not a grid point of the path");
  const double horizon = ts.back();
  GatingRelaxation rep;
  for (std::size_t i = 1; i + 1 < model.size(); ++i) {
    const auto r = model.gates[i - 1].rates(acc.bridge.z1);
    const double y_inf = r.b / r.a;
    const double d1 = std::abs(p.state(i1)[i] - y_inf);
    rep.distance_at_1.push_back(d1);
    rep.distance_at_t.push_back(std::abs(p.back()[i] - y_inf));
    rep.bound.push_back(d1 * std::exp(-r.a * (horizon - 1.0)));
  }
  return rep;
}

/// hdot sampled on a uniform grid, with the paths it is meant to reproduce.
struct ControlPath {
  double grid_step = 0.0;
  std::vector<double> times;
  std::vector<double> hdot;
  Trajectory target;
  Trajectory generated;
  double sup_error = 0.0;        ///< generated vs target
  double reference_error = 0.0;  ///< generated vs a solution with 8x finer step

  /// hdot at a grid time; off-grid requests are an error.
  double operator()(double s) const {
    const double j = std::round(s / grid_step);
    if (j < 0.0 || j >= static_cast<double>(hdot.size()) ||
        std::abs(s - j * grid_step) > 1e-9 * (1.0 + std::abs(s)))
      throw DomainError("ControlPath: time is not on the control grid");
    return hdot[static_cast<std::size_t>(j)];
  }
};

namespace detail {

inline double checked_sigma(const IvriModel& model, double xm, double s) {
  if (!model.input.contains(xm)) {
    std::ostringstream os;
    os.precision(17);
    os << "control: input coordinate " << xm << " leaves U at s = " << s;
    throw DomainError(os.str());
  }
  const double sigma = model.input.diffusion(xm);
  if (!(sigma > 0.0)) throw DomainError("control: sigma must be strictly positive on U");
  return sigma;
}

/// hdot making the input coordinate move with velocity `velocity` at xm.
inline double input_control(const IvriModel& model, double s, double xm, double velocity) {
  const double sigma = checked_sigma(model, xm, s);
  const double dsigma = model.input.diffusion_derivative ? model.input.diffusion_derivative(xm) : 0.0;
  return (velocity - model.input.drift(s, xm) + 0.5 * sigma * dsigma) / sigma;
}

inline std::size_t grid_points(double t, double step) {
  const double n = t / step;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, n))
    throw DomainError("control: horizon must be a multiple of the grid step");
  return static_cast<std::size_t>(r) + 1;
}

}  // namespace detail

/// hdot reproducing the accessibility path: the input coordinate must move
/// as Z_m' = gamma'(s) - F(Z_s). Sampled at the path's own time grid, which
/// must be uniform.
inline ControlPath control_for_accessibility(const IvriModel& model, const AccessibilityPath& acc) {
  model.validate();
  const auto& p = acc.path;
  if (p.size() < 2) throw DomainError("control_for_accessibility: path too short");
  ControlPath c;
  c.grid_step = p.time(1) - p.time(0);
  c.target = p;
  const std::size_t last = model.input_index();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double s = p.time(k);
    if (std::abs(s - static_cast<double>(k) * c.grid_step) > 1e-9 * (1.0 + s))
      throw DomainError("control_for_accessibility: path grid is not uniform");
    const auto z = p.state(k);
    const double velocity = acc.bridge.derivative(s) - model.f(z.first(last));
    c.times.push_back(s);
    c.hdot.push_back(detail::input_control(model, s, z[last], velocity));
  }
  return c;
}

/// Cumulative integral of `input` on the grid k * step, k < n, by three-point
/// Gauss-Legendre on each cell.
inline std::vector<double> cumulative_integral(const std::function<double(double)>& input,
                                               double step, std::size_t n) {
  static constexpr std::array<double, 3> node = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> weight = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double mid = (static_cast<double>(k) - 0.5) * step;
    double cell = 0.0;
    for (std::size_t q = 0; q < 3; ++q) cell += weight[q] * input(mid + 0.5 * step * node[q]);
    out[k] = out[k - 1] + 0.5 * step * cell;
  }
  return out;
}

/// hdot making the input coordinate follow xm0 + int_0^s I on [0, t], sampled
/// every `grid_step`.
inline ControlPath control_for_imitation(const IvriModel& model,
                                         const std::function<double(double)>& input, double xm0,
                                         double t, double grid_step) {
  model.validate();
  if (!(t > 0.0) || !(grid_step > 0.0))
    throw DomainError("control_for_imitation: need t > 0 and grid_step > 0");
  const std::size_t n = detail::grid_points(t, grid_step);
  const auto integral = cumulative_integral(input, grid_step, n);
  ControlPath c;
  c.grid_step = grid_step;
  c.times.resize(n);
  c.hdot.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) * grid_step;
    c.times[k] = s;
    c.hdot[k] = detail::input_control(model, s, xm0 + integral[k], input(s));
  }
  return c;
}

/// RK4 on x' = b~(s, x) + sigma(x_m) hdot(s) (e_1 + e_m). `hdot` is queried
/// at the stage times k dt, k dt + dt/2.
template <class Control>
Trajectory integrate_controlled(const IvriModel& model, std::span<const double> x0,
                                const Control& hdot, double t, double dt) {
  model.validate();
  if (x0.size() != model.size()) throw DomainError("integrate_controlled: state dimension mismatch");
  const std::size_t last = model.input_index();
  auto rhs = [&](double s, std::span<const double> x, std::span<double> dx) {
    model.stratonovich_drift(s, x, dx);
    const double push = model.input.diffusion(x[last]) * hdot(s);
    dx[0] += push;
    dx[last] += push;
  };
  Trajectory out = integrate_ode(rhs, x0, 0.0, t, dt, 1, model.name);
  out.metadata().integrator = "rk4-controlled";
  return out;
}

/// Max over shared sample times and all coordinates of |a - b|. `b` may be
/// sampled on a finer grid that contains every time of `a`.
inline double sup_distance(const Trajectory& a, const Trajectory& b) {
  double err = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a.time(i);
    while (j < b.size() && b.time(j) < t - 1e-9 * (1.0 + std::abs(t))) ++j;
    if (j == b.size() || std::abs(b.time(j) - t) > 1e-9 * (1.0 + std::abs(t)))
      throw DomainError("sup_distance: sample times do not match");
    for (std::size_t k = 0; k < a.dimension(); ++k)
      err = std::max(err, std::abs(a.state(i)[k] - b.state(j)[k]));
  }
  return err;
}

/// Number of reference sub-steps per control step in the verifications.
inline constexpr int kReferenceRefinement = 8;

/// Imitation round trip on [0, t]. The control is sampled every dt/8 and the
/// controlled flow integrated with step dt. The target is the input-driven
/// system (z' = F(z) + I, internal variables, x_m' = I) solved with the same
/// step; the reference error compares with that system solved at dt/8.
inline ControlPath verify_imitation(const IvriModel& model, const std::function<double(double)>& input,
                                    std::span<const double> x0, double t, double dt) {
  if (x0.size() != model.size()) throw DomainError("verify_imitation: state dimension mismatch");
  const double fine = dt / kReferenceRefinement;
  const std::size_t last = model.input_index();
  ControlPath c = control_for_imitation(model, input, x0[last], t, fine);

  auto direct = [&](double s, std::span<const double> x, std::span<double> dx) {
    const double drive = input(s);
    model.deterministic_rhs(drive, x, dx);
    dx[last] = drive;
  };
  c.target = integrate_ode(direct, x0, 0.0, t, dt, 1, model.name);
  c.generated = integrate_controlled(model, x0, c, t, dt);
  c.sup_error = sup_distance(c.generated, c.target);
  c.reference_error =
      sup_distance(c.generated, integrate_ode(direct, x0, 0.0, t, fine, 1, model.name));
  return c;
}

/// Accessibility round trip: Z from the bridge to z1 with step dt/8 (the
/// target), the matching control, and the controlled flow with step dt.
inline ControlPath verify_accessibility(const IvriModel& model, std::span<const double> x,
                                        double z1, double t, double dt) {
  const auto acc = accessibility_path(model, x, z1, t, dt / kReferenceRefinement);
  ControlPath c = control_for_accessibility(model, acc);
  c.generated = integrate_controlled(model, x, c, t, dt);
  c.sup_error = sup_distance(c.generated, c.target);
  c.reference_error = c.sup_error;
  return c;
}

}  // namespace ivri
