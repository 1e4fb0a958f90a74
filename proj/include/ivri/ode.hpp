#pragma once

// Fixed-step classical Runge-Kutta integration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ivri/errors.hpp"
#include "ivri/trajectory.hpp"

namespace ivri {

/// Scratch buffers for rk4_step, sized once per integration.
struct Rk4Workspace {
  explicit Rk4Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
  std::vector<double> k1, k2, k3, k4, tmp;
};

/// One RK4 step of size h from (t, x) into out. `rhs(t, x, dx)`.
template <class Rhs>
void rk4_step(Rhs& rhs, double t, std::span<const double> x, double h,
              std::span<double> out, Rk4Workspace& w) {
  const std::size_t n = x.size();
  rhs(t, x, std::span<double>(w.k1));
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + 0.5 * h * w.k1[i];
  rhs(t + 0.5 * h, std::span<const double>(w.tmp), std::span<double>(w.k2));
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + 0.5 * h * w.k2[i];
  rhs(t + 0.5 * h, std::span<const double>(w.tmp), std::span<double>(w.k3));
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + h * w.k3[i];
  rhs(t + h, std::span<const double>(w.tmp), std::span<double>(w.k4));
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] + h / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
}

/// Number of steps of nominal size dt covering [t0, t1]; the last one may be
/// shorter so that the grid lands exactly on t1.
inline std::size_t step_count(double t0, double t1, double dt) {
  const double n = (t1 - t0) / dt;
  const double r = std::round(n);
  if (std::abs(n - r) <= 1e-9 * std::max(1.0, n)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(n));
}

/// Grid time of step k on [t0, t1] with nominal step dt.
inline double grid_time(double t0, double t1, double dt, std::size_t k, std::size_t n) {
  return k >= n ? t1 : t0 + static_cast<double>(k) * dt;
}

/// Integrates x' = rhs(t, x) with RK4 from t0 to t1. Every `record_every`-th
/// state is stored, plus the final one. A non-finite state raises
/// NumericError naming the last good time.
template <class Rhs>
Trajectory integrate_ode(Rhs rhs, std::span<const double> x0, double t0, double t1, double dt,
                         std::size_t record_every = 1, std::string model = {}) {
  if (!(dt > 0.0)) throw DomainError("integrate_ode: dt must be > 0");
  if (!(t1 > t0)) throw DomainError("integrate_ode: t1 must exceed t0");
  if (record_every == 0) record_every = 1;
  const std::size_t n = step_count(t0, t1, dt);
  Trajectory traj(x0.size(), {std::move(model), "rk4", dt});
  traj.reserve(n / record_every + 2);
  traj.push_back(t0, x0);

  Rk4Workspace w(x0.size());
  std::vector<double> x(x0.begin(), x0.end()), next(x0.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid_time(t0, t1, dt, k, n);
    const double t_next = grid_time(t0, t1, dt, k + 1, n);
    rk4_step(rhs, t, x, t_next - t, next, w);
    for (double v : next) {
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os.precision(17);
        os << "integrate_ode: non-finite state after t = " << t << " (last good time)";
        throw NumericError(os.str());
      }
    }
    x.swap(next);
    if ((k + 1) % record_every == 0 || k + 1 == n) traj.push_back(t_next, x);
  }
  return traj;
}

}  // namespace ivri
