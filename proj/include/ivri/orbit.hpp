#pragma once

// Equilibria and the attracting limit cycle of the deterministic 4D
// Hodgkin-Huxley system under constant input c.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ivri/errors.hpp"
#include "ivri/hodgkin_huxley.hpp"
#include "ivri/hormander.hpp"
#include "ivri/ode.hpp"
#include "ivri/trajectory.hpp"

namespace ivri::hh {

using State4 = std::array<double, 4>;

struct StabilityReport {
  double input = 0.0;
  State4 equilibrium{};
  std::array<double, 16> jacobian{};  ///< row-major d(rhs_i)/d(x_j)
  std::vector<std::complex<double>> eigenvalues;
  double max_real_part = 0.0;
  double rhs_residual = 0.0;
  bool unstable = false;
};

inline constexpr double kJacobianStep = 1e-6;
inline constexpr double kUnstableThreshold = 1e-8;
inline constexpr int kQrMaxIterations = 10000;

/// Central-difference Jacobian of the 4D right-hand side at x.
inline std::array<double, 16> jacobian(const HHParams& p, double c, const State4& x,
                                       double step = kJacobianStep) {
  std::array<double, 16> jac{};
  State4 xp, xm, fp, fm;
  for (std::size_t j = 0; j < 4; ++j) {
    xp = x;
    xm = x;
    xp[j] += step;
    xm[j] -= step;
    rhs(p, c, xp, fp);
    rhs(p, c, xm, fm);
    for (std::size_t i = 0; i < 4; ++i) jac[i * 4 + j] = (fp[i] - fm[i]) / (2.0 * step);
  }
  return jac;
}

/// Eigenvalues of a row-major 4x4 matrix (Hessenberg reduction + shifted QR).
inline std::vector<std::complex<double>> eigenvalues4(const std::array<double, 16>& a) {
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = a[static_cast<std::size_t>(i * 4 + j)];
  Eigen::EigenSolver<Eigen::Matrix4d> solver;
  solver.setMaxIterations(kQrMaxIterations);
  solver.compute(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigenvalues: QR iteration did not converge");
  std::vector<std::complex<double>> ev(4);
  for (int i = 0; i < 4; ++i) ev[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return ev;
}

inline StabilityReport classify_equilibrium(const HHParams& p, double c) {
  StabilityReport rep;
  rep.input = c;
  rep.equilibrium = branch_state(equilibrium_v(p, c));
  State4 f;
  rhs(p, c, rep.equilibrium, f);
  for (double v : f) rep.rhs_residual = std::max(rep.rhs_residual, std::abs(v));
  if (rep.rhs_residual > 1e-9)
    throw NumericError("classify_equilibrium: right-hand side residual above 1e-9");
  rep.jacobian = jacobian(p, c, rep.equilibrium);
  rep.eigenvalues = eigenvalues4(rep.jacobian);
  rep.max_real_part = -std::numeric_limits<double>::infinity();
  for (const auto& z : rep.eigenvalues) rep.max_real_part = std::max(rep.max_real_part, z.real());
  rep.unstable = rep.max_real_part > kUnstableThreshold;
  return rep;
}

/// Times where the sampled signal crosses `level` upwards (values[i] < level
/// <= values[i+1]), located by linear interpolation.
inline std::vector<double> upcrossings(std::span<const double> times,
                                       std::span<const double> values, double level) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i] < level && values[i + 1] >= level) {
      const double s = (level - values[i]) / (values[i + 1] - values[i]);
      out.push_back(times[i] + s * (times[i + 1] - times[i]));
    }
  }
  return out;
}

/// Cubic Hermite interpolation of a 4D trajectory using the vector field for
/// the end-point slopes; fourth-order consistent with the RK4 samples.
class DenseOrbit {
 public:
  DenseOrbit(const Trajectory& traj, const HHParams& p, double c)
      : traj_(&traj), p_(p), c_(c) {}

  State4 operator()(double t) const {
    const auto& ts = traj_->times();
    if (t <= ts.front()) return to_state(traj_->state(0));
    if (t >= ts.back()) return to_state(traj_->back());
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const auto i = static_cast<std::size_t>(it - ts.begin()) - 1;
    const double t0 = ts[i], h = ts[i + 1] - t0, s = (t - t0) / h;
    const State4 x0 = to_state(traj_->state(i)), x1 = to_state(traj_->state(i + 1));
    State4 f0, f1, out;
    rhs(p_, c_, x0, f0);
    rhs(p_, c_, x1, f1);
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    for (std::size_t k = 0; k < 4; ++k)
      out[k] = h00 * x0[k] + h10 * h * f0[k] + h01 * x1[k] + h11 * h * f1[k];
    return out;
  }

 private:
  static State4 to_state(std::span<const double> x) { return {x[0], x[1], x[2], x[3]}; }

  const Trajectory* traj_;
  HHParams p_;
  double c_;
};

/// Distance used to compare loops: v is divided by 100.
inline double scaled_distance(const State4& a, const State4& b) {
  return std::max({std::abs(a[0] - b[0]) / 100.0, std::abs(a[1] - b[1]),
                   std::abs(a[2] - b[2]), std::abs(a[3] - b[3])});
}

struct OrbitResult {
  double input = 0.0;
  double period = 0.0;
  double diagnostic = 0.0;               ///< sup scaled distance of the last two loops
  std::vector<double> crossing_times;    ///< v = 0 up-crossings after the transient
  std::vector<State4> section_states;    ///< states at those crossings
  Trajectory orbit;                      ///< last complete loop, time measured from its start
  double orbit_start = 0.0;              ///< absolute time of the loop's first crossing
};

inline constexpr std::size_t kOrbitPhasePoints = 256;
inline constexpr std::size_t kMinCrossings = 6;

/// Integrates from the equilibrium displaced by +1 mV (or `perturbation`),
/// discards [0, t_transient], and extracts the limit cycle from the v = 0
/// up-crossings of [t_transient, t_transient + t_window]. The period is the
/// mean spacing of the last five crossings.
inline OrbitResult find_stable_orbit(const HHParams& p, double c, double t_transient = 150.0,
                                     double dt = 0.01, double t_window = 100.0,
                                     State4 perturbation = {1.0, 0.0, 0.0, 0.0}) {
  if (!(t_transient >= 0.0)) throw DomainError("find_stable_orbit: t_transient must be >= 0");
  const auto stab = classify_equilibrium(p, c);
  if (!stab.unstable)
    throw DomainError("find_stable_orbit: the equilibrium for this input is stable");
  State4 x0 = stab.equilibrium;
  for (std::size_t k = 0; k < 4; ++k) x0[k] += perturbation[k];

  const auto field = vector_field(p, [c](double) { return c; });
  const Trajectory traj = integrate_ode(field, x0, 0.0, t_transient + t_window, dt, 1, "hh");

  std::vector<double> crossings;
  {
    const auto v = traj.component(0);
    for (double t : upcrossings(traj.times(), v, 0.0))
      if (t >= t_transient) crossings.push_back(t);
  }
  if (crossings.size() < kMinCrossings)
    throw NumericError("find_stable_orbit: fewer than 6 up-crossings of v = 0 after the transient");

  OrbitResult res;
  res.input = c;
  res.crossing_times = crossings;

  // Section states by linear interpolation between the bracketing samples.
  const auto& ts = traj.times();
  for (double tc : crossings) {
    const auto i = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), tc) - ts.begin()) - 1;
    const double s = (tc - ts[i]) / (ts[i + 1] - ts[i]);
    State4 x{};
    for (std::size_t k = 0; k < 4; ++k)
      x[k] = traj.state(i)[k] + s * (traj.state(i + 1)[k] - traj.state(i)[k]);
    res.section_states.push_back(x);
  }

  const std::size_t nc = crossings.size();
  res.period = (crossings[nc - 1] - crossings[nc - 5]) / 4.0;

  const DenseOrbit dense(traj, p, c);
  const double a0 = crossings[nc - 3], a1 = crossings[nc - 2], b1 = crossings[nc - 1];
  for (std::size_t j = 0; j <= kOrbitPhasePoints; ++j) {
    const double phase = static_cast<double>(j) / static_cast<double>(kOrbitPhasePoints);
    res.diagnostic = std::max(res.diagnostic, scaled_distance(dense(a0 + phase * (a1 - a0)),
                                                              dense(a1 + phase * (b1 - a1))));
  }

  res.orbit_start = a1;
  res.orbit = Trajectory(4, {"hh", "rk4", dt});
  res.orbit.push_back(0.0, res.section_states[nc - 2]);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.time(i);
    if (t > a1 + 1e-12 && t < b1 - 1e-12) res.orbit.push_back(t - a1, traj.state(i));
  }
  res.orbit.push_back(b1 - a1, res.section_states[nc - 1]);
  return res;
}

/// The state (0, n*, m*, h*) where the last complete loop starts.
inline State4 section_point(const OrbitResult& orbit) {
  if (orbit.section_states.size() < 2) throw DomainError("section_point: invalid orbit");
  return orbit.section_states[orbit.section_states.size() - 2];
}

/// The loop re-integrated from its section point, sampled at `count` + 1
/// equidistant times over one period (both ends included).
inline Trajectory resample_orbit(const HHParams& p, const OrbitResult& orbit,
                                 std::size_t count = kOrbitPhasePoints, double dt = 0.01) {
  const double c = orbit.input;
  const State4 start = section_point(orbit);
  const auto field = vector_field(p, [c](double) { return c; });
  const Trajectory fine = integrate_ode(field, start, 0.0, orbit.period, dt, 1, "hh");
  const DenseOrbit dense(fine, p, c);
  Trajectory out(4, {"hh", "rk4+hermite", orbit.period / static_cast<double>(count)});
  for (std::size_t j = 0; j <= count; ++j) {
    const double t = orbit.period * static_cast<double>(j) / static_cast<double>(count);
    out.push_back(t, dense(t));
  }
  return out;
}

/// Sign structure of Delta along the stable orbit.
struct DeltaOrbitSummary {
  double arc_begin = 0.0;           ///< up-crossing of v = -2 (orbit time)
  double arc_end = 0.0;             ///< next up-crossing of v = +5
  bool arc_negative = false;        ///< Delta < 0 at every sample of the arc
  double arc_min_abs = 0.0;         ///< min |Delta| on the arc
  std::size_t complement_sign_changes = 0;
  double peak_time = 0.0;           ///< time of max v
  double post_peak_min_abs = 0.0;   ///< min |Delta| over [peak, peak + post_peak_window]
  double max_abs = 0.0;             ///< max |Delta| over one period
  std::vector<hh::DeltaSample> samples;  ///< Delta over two periods from the section point
};

/// Integrates two periods from the section point and locates the arc between
/// the first up-crossing of `arc_lo` and the following up-crossing of
/// `arc_hi`, then counts sign changes on the rest of the period starting at
/// the arc end.
inline DeltaOrbitSummary analyze_delta_on_orbit(const HHParams& p, const OrbitResult& orbit,
                                                double dt = 0.01, double arc_lo = -2.0,
                                                double arc_hi = 5.0,
                                                double post_peak_window = 5.0) {
  const double c = orbit.input, period = orbit.period;
  const auto field = vector_field(p, [c](double) { return c; });
  const Trajectory traj = integrate_ode(field, section_point(orbit), 0.0, 2.0 * period, dt, 1, "hh");
  DeltaOrbitSummary s;
  s.samples = delta_along(traj);
  const auto v = traj.component(0);
  const auto& ts = traj.times();

  const auto lo_cross = upcrossings(ts, v, arc_lo);
  if (lo_cross.empty()) throw NumericError("analyze_delta_on_orbit: v never up-crosses arc_lo");
  s.arc_begin = lo_cross.front();
  const auto hi_cross = upcrossings(ts, v, arc_hi);
  const auto hi_it = std::upper_bound(hi_cross.begin(), hi_cross.end(), s.arc_begin);
  if (hi_it == hi_cross.end()) throw NumericError("analyze_delta_on_orbit: arc does not close");
  s.arc_end = *hi_it;
  if (s.arc_end - s.arc_begin >= period)
    throw NumericError("analyze_delta_on_orbit: arc longer than a period");

  s.arc_negative = true;
  s.arc_min_abs = std::numeric_limits<double>::infinity();
  for (const auto& d : s.samples) {
    if (d.t >= s.arc_begin && d.t <= s.arc_end) {
      s.arc_negative = s.arc_negative && d.delta < 0.0;
      s.arc_min_abs = std::min(s.arc_min_abs, std::abs(d.delta));
    }
  }

  // complement: (arc_end, arc_begin + period)
  int prev = 0;
  for (const auto& d : s.samples) {
    if (d.t <= s.arc_end || d.t >= s.arc_begin + period) continue;
    const int sign = d.delta > 0.0 ? 1 : (d.delta < 0.0 ? -1 : 0);
    if (sign != 0) {
      if (prev != 0 && sign != prev) ++s.complement_sign_changes;
      prev = sign;
    }
  }

  std::size_t ipk = 0;
  for (std::size_t i = 0; i < traj.size() && ts[i] <= period; ++i)
    if (v[i] > v[ipk]) ipk = i;
  s.peak_time = ts[ipk];
  s.post_peak_min_abs = std::numeric_limits<double>::infinity();
  for (const auto& d : s.samples) {
    if (d.t <= period) s.max_abs = std::max(s.max_abs, std::abs(d.delta));
    if (d.t >= s.peak_time && d.t <= s.peak_time + post_peak_window)
      s.post_peak_min_abs = std::min(s.post_peak_min_abs, std::abs(d.delta));
  }
  return s;
}

}  // namespace ivri::hh
