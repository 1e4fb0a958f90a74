#pragma once

// Euler-Maruyama simulation of an IvriModel. The single Brownian increment
// drives the input coordinate, and the first coordinate receives exactly the
// realized input increment on top of F dt.

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "ivri/errors.hpp"
#include "ivri/model.hpp"
#include "ivri/ode.hpp"
#include "ivri/random.hpp"
#include "ivri/trajectory.hpp"

namespace ivri {

/// Increment of one Euler-Maruyama step of length h with Brownian
/// increment dw. dx[0] == F*h + dx[m-1] holds exactly.
inline void euler_maruyama_increment(const IvriModel& model, double t, std::span<const double> x,
                                     double h, double dw, std::span<double> dx) {
  const std::size_t last = model.input_index();
  const double xm = x[last];
  dx[last] = model.input.drift(t, xm) * h + model.input.diffusion(xm) * dw;
  dx[0] = model.f(x.first(last)) * h + dx[last];
  for (std::size_t i = 1; i < last; ++i) {
    const auto r = model.gates[i - 1].rates(x[0]);
    dx[i] = (-r.a * x[i] + r.b) * h;
  }
}

struct SdeCounters {
  std::size_t steps = 0;
  std::size_t clamp_events = 0;        ///< gate values pulled back into [0, 1]
  std::size_t barrier_violations = 0;  ///< input at or beyond the lower end of U
};

struct SdeResult {
  Trajectory path;
  SdeCounters counters;
};

namespace detail {

template <class Record>
SdeCounters run_euler_maruyama(const IvriModel& model, std::span<const double> x0, double t0,
                               double t1, double dt, RngSeed seed, std::vector<double>& x,
                               Record&& record) {
  model.validate();
  if (!(dt > 0.0)) throw DomainError("simulate_sde: dt must be > 0");
  if (!(t1 > t0)) throw DomainError("simulate_sde: t1 must exceed t0");
  if (!model.in_state_space(x0))
    throw DomainError("simulate_sde: x0 must lie in R x [0,1]^(m-2) x U");

  const std::size_t m = model.size(), last = m - 1;
  const std::size_t n = step_count(t0, t1, dt);
  x.assign(x0.begin(), x0.end());
  std::vector<double> dx(m);
  NormalStream normal(seed);
  SdeCounters c;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid_time(t0, t1, dt, k, n);
    const double t_next = grid_time(t0, t1, dt, k + 1, n);
    const double h = t_next - t;
    euler_maruyama_increment(model, t, x, h, std::sqrt(h) * normal(k), dx);
    for (std::size_t i = 0; i < m; ++i) x[i] += dx[i];
    for (std::size_t i = 1; i < last; ++i) {
      if (x[i] < 0.0) { x[i] = 0.0; ++c.clamp_events; }
      else if (x[i] > 1.0) { x[i] = 1.0; ++c.clamp_events; }
    }
    if (!std::isfinite(x[0]) || !std::isfinite(x[last])) {
      std::ostringstream os;
      os.precision(17);
      os << "simulate_sde: non-finite state after t = " << t << " (last good time)";
      throw NumericError(os.str());
    }
    ++c.steps;
    record(k + 1, n, t_next, x, c);
  }
  return c;
}

}  // namespace detail

/// Euler-Maruyama path on [t0, t1]. Every `record_every`-th state is stored
/// plus the last one; barrier violations are counted at stored times.
inline SdeResult simulate_sde(const IvriModel& model, std::span<const double> x0, double t0,
                              double t1, double dt, RngSeed seed,
                              std::size_t record_every = 1) {
  if (record_every == 0) record_every = 1;
  SdeResult res{Trajectory(model.size(), {model.name, "euler-maruyama", dt}), {}};
  res.path.push_back(t0, x0);
  std::vector<double> x;
  const double lower = model.input.lower;
  std::size_t violations = 0;
  res.counters = detail::run_euler_maruyama(
      model, x0, t0, t1, dt, seed, x,
      [&](std::size_t k, std::size_t n, double t, const std::vector<double>& state,
          const SdeCounters&) {
        if (k % record_every == 0 || k == n) {
          res.path.push_back(t, state);
          if (!(state.back() > lower)) ++violations;
        }
      });
  res.counters.barrier_violations = violations;
  return res;
}

/// Final state only; `out` receives x(t1).
inline SdeCounters simulate_sde_endpoint(const IvriModel& model, std::span<const double> x0,
                                         double t0, double t1, double dt, RngSeed seed,
                                         std::vector<double>& out) {
  auto c = detail::run_euler_maruyama(model, x0, t0, t1, dt, seed, out,
                                      [](std::size_t, std::size_t, double,
                                         const std::vector<double>&, const SdeCounters&) {});
  if (!(out.back() > model.input.lower)) c.barrier_violations = 1;
  return c;
}

}  // namespace ivri
