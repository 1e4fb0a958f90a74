// ivri: command-line front end.
//
// Exit codes: 0 success, 2 domain error (bad input or configuration),
// 3 numeric error (non-convergence, non-finite state), 1 anything else.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ivri/config.hpp"
#include "ivri/ivri.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ivri::io::CsvWriter;
using ivri::io::format_double;

namespace {

struct Context {
  ivri::RunConfig cfg;
  fs::path out;
  std::string hash;
  std::string summary;
};

template <class T>
void apply(std::optional<T>& flag, T& dst) {
  if (flag) dst = *flag;
}

std::string fmt(double v) { return format_double(v); }

std::string join(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s + "]";
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ivri::DomainError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

const std::vector<std::string> kStateColumns5 = {"v", "n", "m", "h", "xi"};

// Rows of `fine` at the sample times of `coarse`.
std::vector<std::size_t> matching_rows(const ivri::Trajectory& coarse, const ivri::Trajectory& fine) {
  std::vector<std::size_t> idx;
  std::size_t j = 0;
  for (double t : coarse.times()) {
    while (j < fine.size() && fine.time(j) < t - 1e-9 * (1.0 + std::abs(t))) ++j;
    if (j == fine.size()) throw ivri::DomainError("time grids do not match");
    idx.push_back(j);
  }
  return idx;
}

// ---------------------------------------------------------------------------

struct Equilibrium {
  double c = 15.0;

  void add(CLI::App& sub) { sub.add_option("--c", c, "constant input current"); }
  json params() const { return {{"c", c}}; }

  void run(Context& ctx) const {
    const auto rep = ivri::hh::classify_equilibrium(ctx.cfg.model, c);
    const auto& e = rep.equilibrium;
    CsvWriter w(ctx.out / "equilibrium.csv", ctx.hash,
                {"c", "v", "n", "m", "h", "rhs_residual", "max_real_part", "unstable"});
    w.row({c, e[0], e[1], e[2], e[3], rep.rhs_residual, rep.max_real_part, rep.unstable ? 1.0 : 0.0});
    CsvWriter ev(ctx.out / "eigenvalues.csv", ctx.hash, {"re", "im"});
    for (const auto& z : rep.eigenvalues) ev.row({z.real(), z.imag()});
    ctx.summary = "equilibrium c=" + fmt(c) + " v_c=" + fmt(e[0]) +
                  " max_re=" + fmt(rep.max_real_part) + (rep.unstable ? " unstable" : " stable");
  }
};

struct DeltaScan {
  double lo = ivri::hh::kBranchLo, hi = ivri::hh::kBranchHi, grid = 1e-2, tol = 1e-6, csv_step = 0.05;

  void add(CLI::App& sub) {
    sub.add_option("--lo", lo, "left end of the scan (mV)");
    sub.add_option("--hi", hi, "right end of the scan (mV)");
    sub.add_option("--grid", grid, "sign-scan spacing (mV)");
    sub.add_option("--tol", tol, "bisection width (mV)");
    sub.add_option("--csv-step", csv_step, "spacing of the tabulated scan (mV)");
  }
  json params() const {
    return {{"lo", lo}, {"hi", hi}, {"grid", grid}, {"tol", tol}, {"csv_step", csv_step}};
  }

  void run(Context& ctx) const {
    if (!(csv_step > 0.0)) throw ivri::DomainError("delta-scan: --csv-step must be > 0");
    const auto roots = ivri::hh::find_delta_zeros(lo, hi, grid, tol);
    CsvWriter w(ctx.out / "delta_scan.csv", ctx.hash, {"v", "delta", "n_inf", "m_inf", "h_inf"});
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / csv_step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) {
      const double v = lo + static_cast<double>(k) * csv_step;
      const auto s = ivri::hh::branch_state(v);
      w.row({v, ivri::hh::delta(s).value, s[1], s[2], s[3]});
    }
    CsvWriter r(ctx.out / "delta_roots.csv", ctx.hash, {"v"});
    for (double v : roots) r.row({v});
    ctx.summary = "delta-scan roots=" + std::to_string(roots.size()) + " v=" + join(roots);
  }
};

struct Orbit {
  double c = 15.0, t_transient = 150.0;
  std::optional<double> dt;
  std::size_t samples = ivri::hh::kOrbitPhasePoints;

  void add(CLI::App& sub, bool with_samples) {
    sub.add_option("--c", c, "constant input current");
    sub.add_option("--t-transient", t_transient, "discarded transient (ms)");
    sub.add_option("--dt", dt, "RK4 step (ms)");
    if (with_samples) sub.add_option("--samples", samples, "equidistant samples per orbit");
  }
  double step(const Context& ctx) const { return dt.value_or(ctx.cfg.integrator.dt_ode); }
  json params(bool with_samples) const {
    json j{{"c", c}, {"t_transient", t_transient}, {"dt", dt ? json(*dt) : json(nullptr)}};
    if (with_samples) j["samples"] = samples;
    return j;
  }

  void run_orbit(Context& ctx) const {
    if (samples < 2) throw ivri::DomainError("orbit: --samples must be >= 2");
    const double h = step(ctx);
    const auto stab = ivri::hh::classify_equilibrium(ctx.cfg.model, c);
    const auto o = ivri::hh::find_stable_orbit(ctx.cfg.model, c, t_transient, h);
    const auto loop = ivri::hh::resample_orbit(ctx.cfg.model, o, samples, h);
    CsvWriter w(ctx.out / "orbit.csv", ctx.hash, {"t", "v", "n", "m", "h", "delta"});
    CsvWriter ph(ctx.out / "phase.csv", ctx.hash, {"v", "n"});
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const auto x = loop.state(i);
      w.row({loop.time(i), x[0], x[1], x[2], x[3], ivri::hh::delta(x).value});
      ph.row({x[0], x[1]});
    }
    CsvWriter sec(ctx.out / "sections.csv", ctx.hash, {"t", "v", "n", "m", "h"});
    for (std::size_t i = 0; i < o.crossing_times.size(); ++i) {
      const auto& s = o.section_states[i];
      sec.row({o.crossing_times[i], s[0], s[1], s[2], s[3]});
    }
    ctx.summary = "orbit c=" + fmt(c) + " period_ms=" + fmt(o.period) +
                  " diagnostic=" + fmt(o.diagnostic) +
                  " equilibrium=" + (stab.unstable ? "unstable" : "stable");
  }

  void run_delta(Context& ctx) const {
    const double h = step(ctx);
    const auto o = ivri::hh::find_stable_orbit(ctx.cfg.model, c, t_transient, h);
    const auto s = ivri::hh::analyze_delta_on_orbit(ctx.cfg.model, o, h);
    const auto field = ivri::hh::vector_field(ctx.cfg.model, [c = c](double) { return c; });
    const auto start = ivri::hh::section_point(o);
    const auto traj = ivri::integrate_ode(field, start, 0.0, 2.0 * o.period, h, 1, "hh");
    CsvWriter w(ctx.out / "delta_orbit.csv", ctx.hash, {"t", "v", "n", "m", "h", "delta"});
    for (std::size_t i = 0; i < traj.size() && traj.time(i) <= o.period; ++i) {
      const auto x = traj.state(i);
      w.row({traj.time(i), x[0], x[1], x[2], x[3], s.samples[i].delta});
    }
    ctx.summary = "delta-orbit c=" + fmt(c) + " period_ms=" + fmt(o.period) +
                  " arc=[" + fmt(s.arc_begin) + "," + fmt(s.arc_end) + "]" +
                  " arc_negative=" + (s.arc_negative ? "yes" : "no") +
                  " arc_min_abs=" + fmt(s.arc_min_abs) +
                  " complement_sign_changes=" + std::to_string(s.complement_sign_changes) +
                  " post_peak_ratio=" + fmt(s.post_peak_min_abs / s.max_abs);
  }
};

struct Simulate {
  double c = 0.0, t1 = 50.0, xi0 = 0.0;
  std::optional<double> v0, dt;
  std::size_t record_every = 1;
  bool binary = false;
  bool c_given = false;

  void add(CLI::App& sub) {
    sub.add_option("--c", c, "constant input current");
    sub.add_option("--t1", t1, "end time (ms)");
    sub.add_option("--v0", v0, "initial potential; gates start at their steady state");
    sub.add_option("--xi0", xi0, "initial input coordinate");
    sub.add_option("--dt", dt, "time step (ms)");
    sub.add_option("--record-every", record_every, "store every k-th step");
    sub.add_flag("--binary", binary, "also write trajectory.bin");
  }
  json params() const {
    return {{"c", c}, {"t1", t1}, {"xi0", xi0}, {"v0", v0 ? json(*v0) : json(nullptr)},
            {"dt", dt ? json(*dt) : json(nullptr)}, {"record_every", record_every},
            {"binary", binary}, {"c_given", c_given}};
  }
  std::vector<double> start() const {
    const auto s = ivri::hh::branch_state(v0.value_or(0.0));
    return {s[0], s[1], s[2], s[3], xi0};
  }

  void write(Context& ctx, const ivri::Trajectory& traj) const {
    ivri::io::write_trajectory_csv(ctx.out / "trajectory.csv", traj, kStateColumns5, ctx.hash);
    if (binary) ivri::io::write_trajectory_binary(ctx.out / "trajectory.bin", traj);
  }

  static std::string endpoint(const ivri::Trajectory& traj) {
    const auto x = traj.back();
    return "t=" + fmt(traj.times().back()) + " v=" + fmt(x[0]) + " n=" + fmt(x[1]) +
           " m=" + fmt(x[2]) + " h=" + fmt(x[3]) + " xi=" + fmt(x[4]);
  }

  // The deterministic system with constant current c; the fifth column
  // carries the accumulated input xi0 + c t.
  void run_ode(Context& ctx) const {
    const auto p = ctx.cfg.model;
    auto rhs = [&](double, std::span<const double> x, std::span<double> dx) {
      ivri::hh::rhs(p, c, x.first(4), dx.first(4));
      dx[4] = c;
    };
    const auto traj = ivri::integrate_ode(rhs, start(), 0.0, t1, dt.value_or(ctx.cfg.integrator.dt_ode),
                                          record_every, "hh");
    write(ctx, traj);
    ctx.summary = "simulate-ode c=" + fmt(c) + " " + endpoint(traj);
  }

  void run_sde(Context& ctx) const {
    auto noise = ctx.cfg.noise.build(t1);
    // A given current c is fed in through the ramp signal xi0 + c/tau + c t.
    if (c_given) noise.signal = ivri::constant_current_signal(c, xi0, noise.tau, t1);
    noise.validate();
    const auto model = ivri::hh::make_model(ctx.cfg.model, noise);
    const auto res = ivri::simulate_sde(model, start(), 0.0, t1, dt.value_or(ctx.cfg.integrator.dt_sde),
                                        {ctx.cfg.seed, 0}, record_every);
    write(ctx, res.path);
    ctx.summary = "simulate-sde noise=" + std::string(ivri::to_string(noise.kind)) +
                  " gamma=" + fmt(noise.gamma) + " " + endpoint(res.path) +
                  " clamp_events=" + std::to_string(res.counters.clamp_events) +
                  " barrier_violations=" + std::to_string(res.counters.barrier_violations);
  }
};

struct ControlVerify {
  std::string mode = "imitation", input = "constant";
  double c = 15.0, a = 15.0, period = 12.56, t = 25.0, dt = 0.01, v0 = 0.0, xi0 = 0.0, z1 = 5.0;

  void add(CLI::App& sub) {
    sub.add_option("--mode", mode, "imitation | accessibility")
        ->check(CLI::IsMember({"imitation", "accessibility"}));
    sub.add_option("--input", input, "imitated input: constant | oscillating")
        ->check(CLI::IsMember({"constant", "oscillating"}));
    sub.add_option("--c", c, "constant imitated current");
    sub.add_option("--a", a, "oscillating input a (1 + sin(2 pi t / T))");
    sub.add_option("--period", period, "oscillating input period T (ms)");
    sub.add_option("--t", t, "horizon (ms)");
    sub.add_option("--dt", dt, "RK4 step of the controlled flow (ms)");
    sub.add_option("--v0", v0, "initial potential; gates at their steady state");
    sub.add_option("--xi0", xi0, "initial input coordinate");
    sub.add_option("--z1", z1, "accessibility: target potential");
  }
  json params() const {
    return {{"mode", mode}, {"input", input}, {"c", c}, {"a", a}, {"period", period}, {"t", t},
            {"dt", dt}, {"v0", v0}, {"xi0", xi0}, {"z1", z1}};
  }

  void run(Context& ctx) const {
    auto noise = ctx.cfg.noise.build(t);
    const auto model = ivri::hh::make_model(ctx.cfg.model, noise);
    const auto s = ivri::hh::branch_state(v0);
    const std::vector<double> x0 = {s[0], s[1], s[2], s[3], xi0};
    ivri::ControlPath cp;
    if (mode == "imitation") {
      std::function<double(double)> drive;
      if (input == "constant") drive = [c = c](double) { return c; };
      else drive = ivri::oscillating_current(a, period);
      cp = ivri::verify_imitation(model, drive, x0, t, dt);
    } else {
      cp = ivri::verify_accessibility(model, x0, z1, t, dt);
    }
    std::vector<std::string> cols{"t", "hdot"};
    for (const auto& n : kStateColumns5) cols.push_back("target_" + n);
    for (const auto& n : kStateColumns5) cols.push_back("gen_" + n);
    cols.push_back("err");
    CsvWriter w(ctx.out / "control.csv", ctx.hash, cols);
    const auto rows = matching_rows(cp.generated, cp.target);
    std::vector<double> row(cols.size());
    for (std::size_t i = 0; i < cp.generated.size(); ++i) {
      const double ti = cp.generated.time(i);
      const auto g = cp.generated.state(i), z = cp.target.state(rows[i]);
      row[0] = ti;
      row[1] = cp(ti);
      double err = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        row[2 + k] = z[k];
        row[7 + k] = g[k];
        err = std::max(err, std::abs(g[k] - z[k]));
      }
      row[12] = err;
      w.row(row);
    }
    ctx.summary = "control-verify mode=" + mode + (mode == "imitation" ? " input=" + input : "") +
                  " dt=" + fmt(dt) + " sup_error=" + fmt(cp.sup_error) +
                  " reference_error=" + fmt(cp.reference_error);
  }
};

struct Positivity {
  std::string target = "constant";
  double c = 5.0, a = 15.0, period = 12.56, eps = 0.15, zeta = 0.0, s0 = 0.0;
  std::optional<double> t, dt;
  std::size_t n_paths = 10000;
  bool dump = false;

  void add(CLI::App& sub) {
    sub.add_option("--target", target, "constant | oscillating | xi-marginal")
        ->check(CLI::IsMember({"constant", "oscillating", "xi-marginal"}));
    sub.add_option("--c", c, "constant input current (constant target)");
    sub.add_option("--a", a, "oscillating input amplitude a");
    sub.add_option("--period", period, "oscillating input period T (ms)");
    sub.add_option("--t", t, "horizon (ms); defaults: 10, T, 2");
    sub.add_option("--eps", eps, "scaled ball radius");
    sub.add_option("--zeta", zeta, "initial input coordinate");
    sub.add_option("--s0", s0, "constant signal (xi-marginal target)");
    sub.add_option("--dt", dt, "Euler-Maruyama step (ms)");
    sub.add_option("--n-paths", n_paths, "number of paths");
    sub.add_flag("--dump-states", dump, "write final_states.csv");
  }
  json params() const {
    return {{"target", target}, {"c", c}, {"a", a}, {"period", period}, {"eps", eps},
            {"zeta", zeta}, {"s0", s0}, {"t", t ? json(*t) : json(nullptr)},
            {"dt", dt ? json(*dt) : json(nullptr)}, {"n_paths", n_paths}, {"dump_states", dump}};
  }

  void run(Context& ctx) const {
    const auto& p = ctx.cfg.model;
    ivri::HitProbeSpec spec;
    spec.radius = eps;
    spec.n_paths = n_paths;
    spec.dt = dt.value_or(ctx.cfg.integrator.dt_sde);
    spec.seed = ctx.cfg.seed;
    spec.threads = ctx.cfg.threads;
    spec.keep_final_states = dump;
    json extra;
    ivri::NoiseSpec noise = ctx.cfg.noise.build(1.0);

    if (target == "constant") {
      spec.horizon = t.value_or(10.0);
      noise.signal = ivri::constant_current_signal(c, zeta, noise.tau, spec.horizon);
      const auto tp = ivri::make_target(p, noise, c, zeta, spec.horizon);
      spec.start = tp.x;
      spec.centre = tp.x_prime;
      extra["delta_at_target"] = ivri::hh::delta(std::span<const double>(tp.x_prime).first(4)).value;
    } else if (target == "oscillating") {
      spec.horizon = t.value_or(period);
      noise.signal = ivri::tracking_signal(ivri::oscillating_current(a, period),
                                           ivri::oscillating_current_integral(a, period), zeta,
                                           noise.tau, spec.horizon, "oscillating");
      const auto orbit = ivri::hh::find_stable_orbit(p, a, 150.0, ctx.cfg.integrator.dt_ode);
      const auto tp = ivri::make_target(noise, orbit, a, period, zeta);
      spec.start = tp.x;
      spec.centre = tp.x_prime;
      extra["delta_at_target"] = ivri::hh::delta(std::span<const double>(tp.x_prime).first(4)).value;
    } else {
      spec.horizon = t.value_or(2.0);
      if (noise.kind != ivri::NoiseKind::OrnsteinUhlenbeck)
        throw ivri::DomainError("positivity: xi-marginal target requires OU noise");
      noise.signal = ivri::Signal::constant(s0);
      const auto e = ivri::hh::branch_state(0.0);
      spec.start = {e[0], e[1], e[2], e[3], zeta};
      const auto law = ivri::ou_marginal(noise, zeta, spec.horizon);
      spec.centre = spec.start;
      spec.centre[4] = law.mean;
      extra["exact_probability"] = law.interval_probability(law.mean, eps * noise.stationary_spread());
    }
    noise.validate();
    spec.scales = ivri::default_scales(noise);
    if (target == "xi-marginal") {
      constexpr double inf = std::numeric_limits<double>::infinity();
      spec.scales = {inf, inf, inf, inf, noise.stationary_spread()};
    }
    const auto model = ivri::hh::make_model(p, noise);
    const auto res = ivri::mc_hitting(model, spec);

    json report{
        {"target", target},
        {"start", spec.start},
        {"centre", spec.centre},
        {"scales", {spec.scales[0], spec.scales[1], spec.scales[2], spec.scales[3],
                    std::isinf(spec.scales[4]) ? json("inf") : json(spec.scales[4])}},
        {"radius", eps},
        {"horizon", spec.horizon},
        {"dt", spec.dt},
        {"n_paths", n_paths},
        {"seed", spec.seed},
        {"noise", {{"kind", ivri::to_string(noise.kind)}, {"tau", noise.tau}, {"gamma", noise.gamma}}},
        {"hits", res.hits},
        {"p_hat", res.estimate},
        {"wilson95", {res.interval.lo, res.interval.hi}},
        {"clamp_events", res.counters.clamp_events},
        {"barrier_violations", res.counters.barrier_violations},
        {"config_hash", ctx.hash}};
    for (auto& [k, v] : extra.items()) report[k] = v;
    for (auto& s : report["scales"])
      if (s.is_number() && std::isinf(s.get<double>())) s = "inf";
    write_json(ctx.out / "positivity.json", report);
    write_json(ctx.out / "positivity_runtime.json", {{"runtime_s", res.runtime_s}});
    if (dump) {
      CsvWriter w(ctx.out / "final_states.csv", ctx.hash, kStateColumns5);
      for (std::size_t i = 0; i < n_paths; ++i)
        w.row(std::span<const double>(res.final_states).subspan(i * 5, 5));
    }
    ctx.summary = "positivity target=" + target + " hits=" + std::to_string(res.hits) + "/" +
                  std::to_string(n_paths) + " p_hat=" + fmt(res.estimate) + " wilson95=[" +
                  fmt(res.interval.lo) + "," + fmt(res.interval.hi) + "]" +
                  " runtime_s=" + fmt(res.runtime_s);
  }
};

struct LieCheck {
  double v = 3.7, n = 0.4, m = 0.1, h = 0.5, xi = 0.3, t = 0.0, fd_step = 0.0;

  void add(CLI::App& sub) {
    sub.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
    sub.add_option("--v", v, "potential");
    sub.add_option("--n", n, "gate n");
    sub.add_option("--m", m, "gate m");
    sub.add_option("--h", h, "gate h");
    sub.add_option("--xi", xi, "input coordinate");
    sub.add_option("--t", t, "time");
    sub.add_option("--fd-step", fd_step, "finite-difference step (0 = default)");
  }
  json params() const {
    return {{"v", v}, {"n", n}, {"m", m}, {"h", h}, {"xi", xi}, {"t", t}, {"fd_step", fd_step}};
  }

  void run(Context& ctx) const {
    const auto noise = ctx.cfg.noise.build(std::max(1.0, t));
    const auto model = ivri::hh::make_model(ctx.cfg.model, noise);
    const std::vector<double> point = {t, v, n, m, h, xi};
    if (!model.in_state_space(std::span<const double>(point).subspan(1)))
      throw ivri::DomainError("lie-check: point outside the state space");
    const auto a0 = ivri::drift_field(model), a1 = ivri::diffusion_field(model);
    const auto l1 = ivri::lie_bracket_numeric(a1, a0, point, fd_step);
    const auto self = ivri::lie_bracket_numeric(a1, a1, point, fd_step);

    // [A_1, A_0] on the internal variables: sigma(x_m) dJ_i/dx_1.
    const double sigma = model.input.diffusion(xi);
    std::vector<double> formula(point.size(), std::numeric_limits<double>::quiet_NaN());
    formula[0] = 0.0;
    const std::vector<double> x = {v, n, m, h, xi};
    for (std::size_t i = 1; i + 1 < model.size(); ++i) {
      const auto r = model.gates[i - 1].rates_jet(ivri::Jet::variable(v, 1));
      formula[i + 1] = sigma * (-r.a * x[i] + r.b).derivative(1);
    }
    CsvWriter w(ctx.out / "lie_check.csv", ctx.hash,
                {"component", "bracket_a1_a0", "formula", "bracket_a1_a1"});
    double worst = 0.0;
    for (std::size_t k = 0; k < point.size(); ++k) {
      w.row({static_cast<double>(k), l1[k], formula[k], self[k]});
      if (k >= 2 && k + 1 < point.size())
        worst = std::max(worst, std::abs(l1[k] - formula[k]) / std::abs(formula[k]));
    }
    double self_norm = 0.0;
    for (double s : self) self_norm = std::max(self_norm, std::abs(s));
    ctx.summary = "lie-check max_rel_err_internal=" + fmt(worst) + " time_component=" + fmt(l1[0]) +
                  " self_bracket_max=" + fmt(self_norm);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hodgkin-Huxley neuron with random input: equilibria, orbits, "
               "Hormander determinants, SDE simulation, control paths and positivity probes"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::string> noise_kind;
  std::optional<double> tau, gamma, shift;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--noise", noise_kind, "input noise kind: ou | cir");
  app.add_option("--tau", tau, "noise rate tau (1/ms)");
  app.add_option("--gamma", gamma, "noise spread gamma");
  app.add_option("--shift", shift, "CIR shift K");

  Equilibrium equilibrium;
  DeltaScan delta_scan;
  Orbit delta_orbit, orbit;
  Simulate sim_ode, sim_sde;
  ControlVerify control;
  Positivity positivity;
  LieCheck lie;

  struct Command {
    CLI::App* app;
    std::function<json()> params;
    std::function<void(Context&)> run;
  };
  std::vector<Command> commands;
  auto add = [&](const char* name, const char* help, auto&& setup, std::function<json()> params,
                 std::function<void(Context&)> run) {
    CLI::App* sub = app.add_subcommand(name, help);
    setup(*sub);
    commands.push_back({sub, std::move(params), std::move(run)});
  };
  add("equilibrium", "equilibrium for a constant input and its stability",
      [&](CLI::App& s) { equilibrium.add(s); }, [&] { return equilibrium.params(); },
      [&](Context& c) { equilibrium.run(c); });
  add("delta-scan", "zeros of the 3x3 determinant along the equilibrium branch",
      [&](CLI::App& s) { delta_scan.add(s); }, [&] { return delta_scan.params(); },
      [&](Context& c) { delta_scan.run(c); });
  add("delta-orbit", "the determinant along the stable orbit",
      [&](CLI::App& s) { delta_orbit.add(s, false); }, [&] { return delta_orbit.params(false); },
      [&](Context& c) { delta_orbit.run_delta(c); });
  add("orbit", "stable orbit for a constant input",
      [&](CLI::App& s) { orbit.add(s, true); }, [&] { return orbit.params(true); },
      [&](Context& c) { orbit.run_orbit(c); });
  add("simulate-ode", "RK4 integration of the deterministic system",
      [&](CLI::App& s) { sim_ode.add(s); }, [&] { return sim_ode.params(); },
      [&](Context& c) { sim_ode.run_ode(c); });
  CLI::App* sde_app = nullptr;
  add("simulate-sde", "Euler-Maruyama simulation with OU or CIR input",
      [&](CLI::App& s) { sim_sde.add(s); sde_app = &s; }, [&] { return sim_sde.params(); },
      [&](Context& c) { sim_sde.run_sde(c); });
  add("control-verify", "build a control path and check the controlled flow",
      [&](CLI::App& s) { control.add(s); }, [&] { return control.params(); },
      [&](Context& c) { control.run(c); });
  add("positivity", "Monte Carlo hitting probability of a target ball",
      [&](CLI::App& s) { positivity.add(s); }, [&] { return positivity.params(); },
      [&](Context& c) { positivity.run(c); });
  add("lie-check", "numeric Lie bracket [A_1, A_0] against its closed form",
      [&](CLI::App& s) { lie.add(s); }, [&] { return lie.params(); },
      [&](Context& c) { lie.run(c); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    const std::string name = cmd.app->get_name();
    try {
      Context ctx;
      if (!config_path.empty()) ctx.cfg = ivri::RunConfig::load(config_path);
      apply(seed, ctx.cfg.seed);
      apply(out, ctx.cfg.out);
      apply(threads, ctx.cfg.threads);
      apply(noise_kind, ctx.cfg.noise.kind);
      apply(tau, ctx.cfg.noise.tau);
      apply(gamma, ctx.cfg.noise.gamma);
      apply(shift, ctx.cfg.noise.shift);
      ctx.cfg.validate();
      if (cmd.app == sde_app) sim_sde.c_given = sde_app->count("--c") > 0;

      json identity = ctx.cfg.to_json();
      identity.erase("out");
      identity.erase("threads");
      identity["command"] = name;
      identity["params"] = cmd.params();
      ctx.hash = ivri::io::hex64(ivri::io::fnv1a64(identity.dump()));
      ctx.out = ctx.cfg.out;
      fs::create_directories(ctx.out);

      cmd.run(ctx);
      std::cout << ctx.summary << '\n';
      return 0;
    } catch (const ivri::DomainError& e) {
      std::cerr << name << ": domain error: " << e.what() << '\n';
      std::cout << name << " failed: domain error\n";
      return 2;
    } catch (const ivri::NumericError& e) {
      std::cerr << name << ": numeric error: " << e.what() << '\n';
      std::cout << name << " failed: numeric error\n";
      return 3;
    } catch (const std::exception& e) {
      std::cerr << name << ": " << e.what() << '\n';
      std::cout << name << " failed\n";
      return 1;
    }
  }
  return 1;
}
