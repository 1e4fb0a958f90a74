#pragma once

// Determinant criteria for the weak Hormander condition of systems with
// internal variables and random input.
//
// D(x) = det( d^k/dx_1^k J_i(x) ),  i, k = 1..m-1,
//   J_1 = F,  J_i = -a_i(x_1) x_i + b_i(x_1).
// D != 0 at x suffices for the local weak Hormander condition at x. For the
// Hodgkin-Huxley instance F is affine in v, so D = dF/dv * Delta with Delta
// the 3x3 determinant of orders 2..4 of d_n, d_m, d_h.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ivri/errors.hpp"
#include "ivri/hodgkin_huxley.hpp"
#include "ivri/jet.hpp"
#include "ivri/model.hpp"
#include "ivri/trajectory.hpp"

namespace ivri {

/// Determinant of a row-major n x n matrix by LU with partial pivoting.
inline double lu_determinant(std::vector<double> a, std::size_t n) {
  if (a.size() != n * n) throw DomainError("lu_determinant: size mismatch");
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (a[piv * n + col] == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[piv * n + k], a[col * n + k]);
      det = -det;
    }
    const double p = a[col * n + col];
    det *= p;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / p;
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
    }
  }
  return det;
}

struct DeterminantReport {
  std::vector<double> point;    ///< coordinates the determinant was evaluated at
  std::size_t size = 0;         ///< matrix dimension
  std::vector<double> entries;  ///< row-major, rows J_i, columns derivative order
  double value = 0.0;
  double tolerance = 0.0;
  bool nonzero = false;

  double entry(std::size_t row, std::size_t col) const { return entries[row * size + col]; }
};

/// Relative threshold on |det| against the Hadamard bound prod_i |row_i|.
inline constexpr double kNonzeroRelTol = 1e-12;

namespace detail {

inline DeterminantReport finish_report(std::vector<double> point, std::size_t n,
                                       std::vector<double> entries) {
  DeterminantReport rep;
  rep.point = std::move(point);
  rep.size = n;
  rep.entries = std::move(entries);
  for (double e : rep.entries)
    if (!std::isfinite(e)) throw NumericError("determinant: non-finite matrix entry");
  rep.value = lu_determinant(rep.entries, n);
  double hadamard = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += rep.entries[i * n + k] * rep.entries[i * n + k];
    hadamard *= std::sqrt(s);
  }
  rep.tolerance = kNonzeroRelTol * hadamard;
  rep.nonzero = std::abs(rep.value) > rep.tolerance;
  return rep;
}

}  // namespace detail

/// D(x) for a general model. Only the first m-1 coordinates of x are used.
inline DeterminantReport d_general(const IvriModel& model, std::span<const double> x) {
  model.validate();
  const std::size_t n = model.size() - 1;
  if (x.size() < n) throw DomainError("d_general: state too short");
  if (static_cast<int>(n) > Jet::kMaxOrder)
    throw DomainError("d_general: dimension exceeds the maximum jet order");
  const int order = static_cast<int>(n);
  const Jet x1 = Jet::variable(x[0], order);

  std::vector<double> entries(n * n);
  auto fill_row = [&](std::size_t row, const Jet& j) {
    for (std::size_t k = 1; k <= n; ++k) entries[row * n + (k - 1)] = j.derivative(static_cast<int>(k));
  };
  fill_row(0, model.f_jet(x1, x.first(n)));
  for (std::size_t i = 1; i < n; ++i) {
    const auto r = model.gates[i - 1].rates_jet(x1);
    fill_row(i, -r.a * x[i] + r.b);
  }
  return detail::finish_report({x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)}, n,
                               std::move(entries));
}

namespace hh {

/// Delta(v, n, m, h): rows d_n, d_m, d_h with d_g = -a_g(v) g + b_g(v);
/// columns are the v-derivatives of order 2, 3, 4.
inline DeterminantReport delta(double v, double n, double m, double h) {
  const Jet vj = Jet::variable(v, 4);
  const std::array<double, 3> gate_values = {n, m, h};
  std::vector<double> entries(9);
  for (Gate g : kGates) {
    const auto i = static_cast<std::size_t>(g);
    const auto c = gate_coefficients(g, vj);
    const Jet d = -c.a * gate_values[i] + c.b;
    for (int k = 2; k <= 4; ++k) entries[i * 3 + static_cast<std::size_t>(k - 2)] = d.derivative(k);
  }
  return detail::finish_report({v, n, m, h}, 3, std::move(entries));
}

inline DeterminantReport delta(std::span<const double> x) {
  return delta(x[0], x[1], x[2], x[3]);
}

/// Delta on the equilibrium branch v -> (v, n_inf(v), m_inf(v), h_inf(v)).
inline double delta_on_branch(double v) {
  const auto s = branch_state(v);
  return delta(s).value;
}

/// Zeros of delta_on_branch in [lo, hi]: sign scan on a grid of spacing
/// `grid`, each bracket refined by bisection to width `tol`. Ascending.
inline std::vector<double> find_delta_zeros(double lo, double hi, double grid = 1e-2,
                                            double tol = 1e-6) {
  if (!(lo < hi) || lo < kBranchLo || hi > kBranchHi)
    throw DomainError("find_delta_zeros: need lo < hi within [-15, 30]");
  if (!(grid > 0.0) || !(tol > 0.0)) throw DomainError("find_delta_zeros: bad grid/tol");
  std::vector<double> roots;
  const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / grid));
  double a = lo, fa = delta_on_branch(a);
  if (fa == 0.0) roots.push_back(a);
  for (std::size_t i = 1; i <= steps; ++i) {
    const double b = i == steps ? hi : lo + static_cast<double>(i) * grid;
    const double fb = delta_on_branch(b);
    if (fb == 0.0) {
      roots.push_back(b);
    } else if (fa != 0.0 && (fa < 0.0) != (fb < 0.0)) {
      double l = a, r = b, fl = fa;
      while (r - l > tol) {
        const double mid = 0.5 * (l + r);
        const double fm = delta_on_branch(mid);
        if (fm == 0.0) { l = r = mid; break; }
        if ((fm < 0.0) == (fl < 0.0)) { l = mid; fl = fm; } else { r = mid; }
      }
      roots.push_back(0.5 * (l + r));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

struct DeltaSample {
  double t;
  double delta;
};

/// Delta at every stored state of a trajectory whose first four components
/// are (v, n, m, h).
inline std::vector<DeltaSample> delta_along(const Trajectory& traj) {
  if (traj.dimension() < 4) throw DomainError("delta_along: need >= 4 components");
  std::vector<DeltaSample> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    out.push_back({traj.time(i), delta(traj.state(i)).value});
  return out;
}

}  // namespace hh

// ---------------------------------------------------------------------------
// Vector fields on [0, inf) x R^m, coordinate 0 being time.

using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

/// A_0 = d/dt + Stratonovich drift.
inline VectorField drift_field(const IvriModel& model) {
  return [model](std::span<const double> p, std::span<double> out) {
    out[0] = 1.0;
    model.stratonovich_drift(p[0], p.subspan(1), out.subspan(1));
  };
}

/// A_1 = sigma(x_m) (d/dx_1 + d/dx_m).
inline VectorField diffusion_field(const IvriModel& model) {
  return [model](std::span<const double> p, std::span<double> out) {
    out[0] = 0.0;
    model.diffusion(p.subspan(1), out.subspan(1));
  };
}

/// Default finite-difference step 1e-5 (1 + |point|).
inline double default_bracket_step(std::span<const double> point) {
  double s = 0.0;
  for (double v : point) s += v * v;
  return 1e-5 * (1.0 + std::sqrt(s));
}

/// [A, B]_i = sum_j A_j dB_i/dx_j - B_j dA_i/dx_j, with both directional
/// derivatives taken by central differences along the unit direction of the
/// other field. Coordinate 0 is time.
inline std::vector<double> lie_bracket_numeric(const VectorField& a, const VectorField& b,
                                               std::span<const double> point,
                                               double fd_step = 0.0) {
  if (fd_step < 0.0) throw DomainError("lie_bracket_numeric: fd_step must be > 0");
  if (fd_step == 0.0) fd_step = default_bracket_step(point);
  const std::size_t n = point.size();
  std::vector<double> fa(n), fb(n), plus(n), minus(n), p(n), q(n), out(n, 0.0);
  a(point, fa);
  b(point, fb);

  // d/ds G(point + s * dir) at s = 0
  auto directional = [&](const VectorField& g, const std::vector<double>& dir, double sign) {
    double norm = 0.0;
    for (double d : dir) norm += d * d;
    norm = std::sqrt(norm);
    if (norm == 0.0) return;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = point[i] + fd_step * dir[i] / norm;
      q[i] = point[i] - fd_step * dir[i] / norm;
    }
    g(p, plus);
    g(q, minus);
    for (std::size_t i = 0; i < n; ++i)
      out[i] += sign * norm * (plus[i] - minus[i]) / (2.0 * fd_step);
  };
  directional(b, fa, +1.0);
  directional(a, fb, -1.0);
  return out;
}

}  // namespace ivri
