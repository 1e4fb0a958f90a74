#pragma once

// Monte Carlo probes of transition probabilities: hitting frequencies of
// scaled balls around target states, and Gaussian kernel density estimates
// of the law of X_t.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ivri/errors.hpp"
#include "ivri/hodgkin_huxley.hpp"
#include "ivri/model.hpp"
#include "ivri/noise.hpp"
#include "ivri/orbit.hpp"
#include "ivri/random.hpp"
#include "ivri/sde.hpp"

namespace ivri {

using State5 = std::array<double, 5>;

/// Start and target of a probe; the two share their first four coordinates.
struct TargetPair {
  State5 x{};
  State5 x_prime{};
};

/// Noise signal under which the noise-free input coordinate follows
/// zeta + int_0^t I, i.e. feeds the current I into the membrane equation:
/// S(t) = zeta + int_0^t I + I(t) / tau.
inline Signal tracking_signal(std::function<double(double)> current,
                              std::function<double(double)> integral, double zeta, double tau,
                              double horizon, std::string label) {
  Signal s;
  s.value = [=](double t) { return zeta + integral(t) + current(t) / tau; };
  s.label = std::move(label);
  constexpr int kSamples = 1000;
  for (int k = 0; k <= kSamples; ++k)
    s.sup_abs = std::max(s.sup_abs, std::abs(s.value(horizon * k / kSamples)));
  return s;
}

/// Signal feeding the constant current c: S(t) = zeta + c/tau + c t.
inline Signal constant_current_signal(double c, double zeta, double tau, double horizon) {
  return Signal::ramp(zeta + c / tau, c, horizon);
}

/// I(t) = a (1 + sin(2 pi t / T)) and its integral a t + a T (1 - cos(2 pi t / T)) / (2 pi).
inline std::function<double(double)> oscillating_current(double a, double period) {
  return [=](double t) { return a * (1.0 + std::sin(2.0 * std::numbers::pi * t / period)); };
}
inline std::function<double(double)> oscillating_current_integral(double a, double period) {
  return [=](double t) {
    return a * t + a * period * (1.0 - std::cos(2.0 * std::numbers::pi * t / period)) /
                       (2.0 * std::numbers::pi);
  };
}

namespace detail {

inline void require_in_input_domain(const NoiseSpec& noise, double value, const char* what) {
  if (!noise.in_admissible(value))
    throw DomainError(std::string("make_target: ") + what + " leaves the admissible input interval");
}

}  // namespace detail

/// x = (v_c, n_inf, m_inf, h_inf, zeta), x' = same with zeta + c t.
inline TargetPair make_target(const hh::HHParams& p, const NoiseSpec& noise, double c,
                              double zeta, double t) {
  if (!(t >= 0.0)) throw DomainError("make_target: t must be >= 0");
  // the input path zeta + c s is monotone: checking the ends covers [0, t]
  detail::require_in_input_domain(noise, zeta, "zeta");
  detail::require_in_input_domain(noise, zeta + c * t, "zeta + c t");
  const auto e = hh::branch_state(hh::equilibrium_v(p, c));
  TargetPair tp;
  tp.x = {e[0], e[1], e[2], e[3], zeta};
  tp.x_prime = {e[0], e[1], e[2], e[3], zeta + c * t};
  return tp;
}

/// Oscillating input I(t) = a (1 + sin(2 pi t / T)) over one period:
/// x = (0, n*, m*, h*, zeta) at the orbit's section point, x' = same with
/// zeta + a T.
inline TargetPair make_target(const NoiseSpec& noise, const hh::OrbitResult& orbit, double a,
                              double period, double zeta) {
  if (!(period > 0.0)) throw DomainError("make_target: period must be > 0");
  const auto integral = oscillating_current_integral(a, period);
  constexpr int kSamples = 1000;
  for (int k = 0; k <= kSamples; ++k)
    detail::require_in_input_domain(noise, zeta + integral(period * k / kSamples),
                                    "zeta + int I");
  const auto s = hh::section_point(orbit);
  TargetPair tp;
  tp.x = {s[0], s[1], s[2], s[3], zeta};
  tp.x_prime = {s[0], s[1], s[2], s[3], zeta + a * period};
  return tp;
}

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Wilson score interval for `hits` successes out of `n` trials.
inline Interval wilson_interval(std::size_t hits, std::size_t n, double z = kWilsonZ95) {
  if (n == 0) throw DomainError("wilson_interval: n must be >= 1");
  if (hits > n) throw DomainError("wilson_interval: hits > n");
  const double nn = static_cast<double>(n), p = static_cast<double>(hits) / nn, z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  // the end points are exact when all or none of the trials succeed
  return {hits == 0 ? 0.0 : std::max(0.0, centre - half), hits == n ? 1.0 : std::min(1.0, centre + half)};
}

/// Law of the OU input at time t for a constant signal s0, started at xi0:
/// normal with mean s0 + (xi0 - s0) e^{-tau t} and variance
/// gamma^2 (1 - e^{-2 tau t}) / 2.
struct GaussianLaw {
  double mean = 0.0;
  double sd = 0.0;

  /// P(|X - centre| <= half_width)
  double interval_probability(double centre, double half_width) const {
    if (sd == 0.0) return std::abs(mean - centre) <= half_width ? 1.0 : 0.0;
    const double r = 1.0 / (sd * std::numbers::sqrt2);
    return 0.5 * (std::erfc((centre - half_width - mean) * r) -
                  std::erfc((centre + half_width - mean) * r));
  }
};

inline GaussianLaw ou_marginal(const NoiseSpec& noise, double xi0, double t) {
  if (noise.kind != NoiseKind::OrnsteinUhlenbeck)
    throw DomainError("ou_marginal: requires OU noise");
  const double s0 = noise.signal(0.0);
  const double decay = std::exp(-noise.tau * t);
  return {s0 + (xi0 - s0) * decay,
          noise.gamma * std::sqrt((1.0 - decay * decay) / 2.0)};
}

/// Scaling of each coordinate in ball metrics: v / 100, gates as they are,
/// the input by its stationary spread.
inline State5 default_scales(const NoiseSpec& noise) {
  return {100.0, 1.0, 1.0, 1.0, noise.stationary_spread()};
}

/// Euclidean distance in scaled coordinates; an infinite scale drops the
/// coordinate.
inline double scaled_norm(std::span<const double> a, std::span<const double> b,
                          std::span<const double> scales) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::isinf(scales[k])) continue;
    const double d = (a[k] - b[k]) / scales[k];
    s += d * d;
  }
  return std::sqrt(s);
}

struct HitProbeSpec {
  State5 start{};
  State5 centre{};
  double radius = 0.15;
  State5 scales{100.0, 1.0, 1.0, 1.0, 1.0};
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool keep_final_states = false;
};

struct HitProbe {
  HitProbeSpec spec;
  std::size_t hits = 0;
  double estimate = 0.0;
  Interval interval;
  SdeCounters counters;               ///< summed over paths
  std::vector<double> final_states;   ///< n_paths x 5, row-major, if requested
  std::vector<double> distances;      ///< scaled distance of each final state
  double runtime_s = 0.0;
};

namespace detail {

/// Final states of n paths, path i using RNG stream i. Work is split into
/// contiguous blocks, one per thread; results do not depend on the split.
inline SdeCounters simulate_endpoints(const IvriModel& model, std::span<const double> x0,
                                      double t, double dt, std::uint64_t seed, std::size_t n,
                                      unsigned threads, std::vector<double>& finals) {
  const std::size_t m = model.size();
  finals.assign(n * m, 0.0);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<SdeCounters> counters(threads);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w) {
    try {
      const std::size_t begin = n * w / threads, end = n * (w + 1) / threads;
      std::vector<double> out;
      for (std::size_t i = begin; i < end; ++i) {
        const auto c = simulate_sde_endpoint(model, x0, 0.0, t, dt, {seed, i}, out);
        std::copy(out.begin(), out.end(), finals.begin() + static_cast<std::ptrdiff_t>(i * m));
        counters[w].steps += c.steps;
        counters[w].clamp_events += c.clamp_events;
        counters[w].barrier_violations += c.barrier_violations;
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  SdeCounters total;
  for (unsigned w = 0; w < threads; ++w) {
    if (errors[w]) std::rethrow_exception(errors[w]);
    total.steps += counters[w].steps;
    total.clamp_events += counters[w].clamp_events;
    total.barrier_violations += counters[w].barrier_violations;
  }
  return total;
}

}  // namespace detail

/// Fraction of Euler-Maruyama paths from `start` whose state at `horizon`
/// lies in the scaled ball of radius `radius` around `centre`.
inline HitProbe mc_hitting(const IvriModel& model, const HitProbeSpec& spec) {
  if (spec.n_paths == 0) throw DomainError("mc_hitting: n_paths must be >= 1");
  if (!(spec.radius > 0.0)) throw DomainError("mc_hitting: radius must be > 0");
  if (model.size() != 5) throw DomainError("mc_hitting: expects a 5-dimensional model");
  for (double s : spec.scales)
    if (!(s > 0.0)) throw DomainError("mc_hitting: scales must be > 0");
  const auto t0 = std::chrono::steady_clock::now();

  HitProbe res;
  res.spec = spec;
  std::vector<double> finals;
  res.counters = detail::simulate_endpoints(model, spec.start, spec.horizon, spec.dt, spec.seed,
                                            spec.n_paths, spec.threads, finals);
  res.distances.resize(spec.n_paths);
  for (std::size_t i = 0; i < spec.n_paths; ++i) {
    res.distances[i] =
        scaled_norm(std::span<const double>(finals).subspan(i * 5, 5), spec.centre, spec.scales);
    if (res.distances[i] <= spec.radius) ++res.hits;
  }
  res.estimate = static_cast<double>(res.hits) / static_cast<double>(spec.n_paths);
  res.interval = wilson_interval(res.hits, spec.n_paths);
  if (spec.keep_final_states) res.final_states = std::move(finals);
  res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

/// Hit count of an existing probe for another radius (same paths).
inline std::size_t hits_within(const HitProbe& probe, double radius) {
  return static_cast<std::size_t>(std::count_if(
      probe.distances.begin(), probe.distances.end(), [radius](double d) { return d <= radius; }));
}

/// Gaussian product-kernel density estimate of X_t. Data are scaled per
/// coordinate before smoothing; densities are returned in original units.
struct KdeResult {
  std::size_t n_paths = 0;
  State5 scales{};
  State5 bandwidth{};                ///< per coordinate, in scaled units
  std::vector<double> samples;       ///< scaled final states, row-major n x 5
  std::vector<double> densities;     ///< at the requested evaluation points
  SdeCounters counters;

  /// Density at x (original units).
  double operator()(std::span<const double> x) const {
    double norm = 1.0;
    for (std::size_t k = 0; k < 5; ++k) norm *= scales[k] * bandwidth[k] * std::sqrt(2.0 * std::numbers::pi);
    double sum = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
      double e = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        const double d = (x[k] / scales[k] - samples[i * 5 + k]) / bandwidth[k];
        e += d * d;
      }
      sum += std::exp(-0.5 * e);
    }
    return sum / (static_cast<double>(n_paths) * norm);
  }

  /// Midpoint-rule integral of the estimate over the box [lo, hi] with
  /// `cells` cells per axis. The product kernel factorizes, so the cost is
  /// n * 5 * cells.
  double grid_integral(const State5& lo, const State5& hi, std::size_t cells) const {
    if (cells == 0) throw DomainError("grid_integral: cells must be >= 1");
    double total = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
      double prod = 1.0;
      for (std::size_t k = 0; k < 5; ++k) {
        const double a = lo[k] / scales[k], b = hi[k] / scales[k];
        const double w = (b - a) / static_cast<double>(cells);
        double s = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
          const double g = a + (static_cast<double>(c) + 0.5) * w;
          const double d = (g - samples[i * 5 + k]) / bandwidth[k];
          s += std::exp(-0.5 * d * d);
        }
        prod *= s * w / (bandwidth[k] * std::sqrt(2.0 * std::numbers::pi));
      }
      total += prod;
    }
    return total / static_cast<double>(n_paths);
  }
};

/// Scott's rule: sd_k * n^(-1/(d+4)) on the scaled data.
inline State5 scott_bandwidth(std::span<const double> scaled, std::size_t n) {
  if (n < 2) throw DomainError("scott_bandwidth: need at least 2 samples");
  State5 h{};
  const double factor = std::pow(static_cast<double>(n), -1.0 / 9.0);
  for (std::size_t k = 0; k < 5; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += scaled[i * 5 + k];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (scaled[i * 5 + k] - mean) * (scaled[i * 5 + k] - mean);
    var /= static_cast<double>(n - 1);
    if (!(var > 0.0)) throw NumericError("scott_bandwidth: coordinate has zero spread");
    h[k] = std::sqrt(var) * factor;
  }
  return h;
}

/// Simulates n_paths from x0 to t and evaluates the kernel estimate at
/// `eval_points` (each of length 5). An empty `bandwidth` selects Scott's
/// rule; otherwise it is taken per coordinate in scaled units.
inline KdeResult kde_density(const IvriModel& model, std::span<const double> x0, double t,
                             double dt, std::span<const State5> eval_points, std::size_t n_paths,
                             std::span<const double> bandwidth, std::uint64_t seed,
                             const State5& scales, unsigned threads = 1) {
  if (model.size() != 5) throw DomainError("kde_density: expects a 5-dimensional model");
  if (n_paths < 2) throw DomainError("kde_density: n_paths must be >= 2");
  if (!bandwidth.empty() && bandwidth.size() != 5)
    throw DomainError("kde_density: bandwidth needs 5 entries");
  for (double b : bandwidth)
    if (!(b > 0.0)) throw DomainError("kde_density: bandwidth must be > 0");
  for (double s : scales)
    if (!(s > 0.0) || std::isinf(s)) throw DomainError("kde_density: scales must be finite and > 0");

  KdeResult r;
  r.n_paths = n_paths;
  r.scales = scales;
  r.counters = detail::simulate_endpoints(model, x0, t, dt, seed, n_paths, threads, r.samples);
  for (std::size_t i = 0; i < n_paths; ++i)
    for (std::size_t k = 0; k < 5; ++k) r.samples[i * 5 + k] /= scales[k];
  if (bandwidth.empty()) {
    r.bandwidth = scott_bandwidth(r.samples, n_paths);
  } else {
    std::copy(bandwidth.begin(), bandwidth.end(), r.bandwidth.begin());
  }
  for (const auto& x : eval_points) r.densities.push_back(r(x));
  return r;
}

}  // namespace ivri
