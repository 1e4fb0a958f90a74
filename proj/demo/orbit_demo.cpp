// Equilibrium, stable orbit and the determinant along it for a constant
// input current (default 15), followed by a small hitting probe.
//
//   demo_orbit [c]

#include <cstdio>
#include <cstdlib>
#include <span>

#include "ivri/ivri.hpp"

namespace hh = ivri::hh;

int main(int argc, char** argv) {
  const double c = argc > 1 ? std::atof(argv[1]) : 15.0;
  const hh::HHParams p;
  try {
    const auto eq = hh::classify_equilibrium(p, c);
    std::printf("c = %g: equilibrium v = %.6f, max Re = %.4g (%s)\n", c, eq.equilibrium[0],
                eq.max_real_part, eq.unstable ? "unstable" : "stable");
    if (!eq.unstable) return 0;

    const auto orbit = hh::find_stable_orbit(p, c);
    std::printf("period %.6f ms, loop diagnostic %.2e\n", orbit.period, orbit.diagnostic);
    const auto x = hh::section_point(orbit);
    std::printf("section point (v = 0 up-crossing): n = %.6f m = %.6f h = %.6f\n", x[1], x[2], x[3]);

    const auto s = hh::analyze_delta_on_orbit(p, orbit);
    std::printf("Delta < 0 on [%.3f, %.3f] ms: %s; %zu sign changes elsewhere\n", s.arc_begin,
                s.arc_end, s.arc_negative ? "yes" : "no", s.complement_sign_changes);
    std::printf("min |Delta| within 5 ms after the spike: %.3g of the orbit maximum\n",
                s.post_peak_min_abs / s.max_abs);

    ivri::NoiseSpec noise;
    noise.signal = ivri::tracking_signal(ivri::oscillating_current(c, orbit.period),
                                         ivri::oscillating_current_integral(c, orbit.period), 0.0,
                                         noise.tau, orbit.period, "oscillating");
    const auto tp = ivri::make_target(noise, orbit, c, orbit.period, 0.0);
    ivri::HitProbeSpec spec;
    spec.start = tp.x;
    spec.centre = tp.x_prime;
    spec.scales = ivri::default_scales(noise);
    spec.horizon = orbit.period;
    spec.n_paths = 2000;
    const auto r = ivri::mc_hitting(hh::make_model(p, noise), spec);
    std::printf("one period of a(1 + sin): %zu/%zu paths within %.2f, 95%% interval [%.4f, %.4f]\n",
                r.hits, spec.n_paths, spec.radius, r.interval.lo, r.interval.hi);
  } catch (const ivri::DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return 2;
  } catch (const ivri::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  }
  return 0;
}
