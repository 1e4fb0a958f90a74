#pragma once

// Run configuration read from a single JSON file. Unknown keys are rejected
// at every level.
//
//   {
//     "model":      {"g_k": 36, "g_na": 120, "g_l": 0.3, "e_k": -12, "e_na": 120, "e_l": 10.6},
//     "noise":      {"kind": "ou", "tau": 1, "gamma": 0.5, "shift": 0,
//                    "signal": {"type": "constant", "value": 0}},
//     "integrator": {"dt_ode": 0.01, "dt_sde": 0.001},
//     "seed": 0,
//     "out": "out",
//     "threads": 1
//   }
//
// Signal types: constant {value}, sinusoid {mean, amplitude, period},
// ramp {s0, slope}.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ivri/errors.hpp"
#include "ivri/hodgkin_huxley.hpp"
#include "ivri/noise.hpp"

namespace ivri {

struct SignalConfig {
  std::string type = "constant";
  double value = 0.0;
  double mean = 0.0;
  double amplitude = 0.0;
  double period = 1.0;
  double s0 = 0.0;
  double slope = 0.0;

  Signal build(double horizon) const {
    if (type == "constant") return Signal::constant(value);
    if (type == "sinusoid") return Signal::sinusoid(mean, amplitude, period);
    if (type == "ramp") return Signal::ramp(s0, slope, horizon);
    throw DomainError("config: unknown signal type '" + type + "'");
  }
};

struct NoiseConfig {
  std::string kind = "ou";
  double tau = 1.0;
  double gamma = 0.5;
  double shift = 0.0;
  SignalConfig signal;

  /// `horizon` bounds the time range used for sup|S|.
  NoiseSpec build(double horizon) const {
    NoiseSpec n;
    if (kind == "ou") n.kind = NoiseKind::OrnsteinUhlenbeck;
    else if (kind == "cir") n.kind = NoiseKind::CoxIngersollRoss;
    else throw DomainError("config: noise kind must be 'ou' or 'cir'");
    n.tau = tau;
    n.gamma = gamma;
    n.shift = shift;
    n.signal = signal.build(horizon);
    n.validate();
    return n;
  }
};

struct IntegratorConfig {
  double dt_ode = 0.01;
  double dt_sde = 1e-3;
};

struct RunConfig {
  hh::HHParams model;
  NoiseConfig noise;
  IntegratorConfig integrator;
  std::uint64_t seed = 0;
  std::string out = "out";
  unsigned threads = 1;

  nlohmann::json to_json() const {
    using nlohmann::json;
    return json{
        {"model", {{"g_k", model.g_k}, {"g_na", model.g_na}, {"g_l", model.g_l},
                   {"e_k", model.e_k}, {"e_na", model.e_na}, {"e_l", model.e_l}}},
        {"noise", {{"kind", noise.kind}, {"tau", noise.tau}, {"gamma", noise.gamma},
                   {"shift", noise.shift},
                   {"signal", {{"type", noise.signal.type}, {"value", noise.signal.value},
                               {"mean", noise.signal.mean}, {"amplitude", noise.signal.amplitude},
                               {"period", noise.signal.period}, {"s0", noise.signal.s0},
                               {"slope", noise.signal.slope}}}}},
        {"integrator", {{"dt_ode", integrator.dt_ode}, {"dt_sde", integrator.dt_sde}}},
        {"seed", seed},
        {"out", out},
        {"threads", threads}};
  }

  /// Overlays the keys present in `j` on this configuration.
  void merge(const nlohmann::json& j) {
    try {
      expect_keys(j, "", {"model", "noise", "integrator", "seed", "out", "threads"});
      if (j.contains("model")) {
        const auto& m = j.at("model");
        expect_keys(m, "model", {"g_k", "g_na", "g_l", "e_k", "e_na", "e_l"});
        read(m, "g_k", model.g_k);
        read(m, "g_na", model.g_na);
        read(m, "g_l", model.g_l);
        read(m, "e_k", model.e_k);
        read(m, "e_na", model.e_na);
        read(m, "e_l", model.e_l);
      }
      if (j.contains("noise")) {
        const auto& n = j.at("noise");
        expect_keys(n, "noise", {"kind", "tau", "gamma", "shift", "signal"});
        read(n, "kind", noise.kind);
        read(n, "tau", noise.tau);
        read(n, "gamma", noise.gamma);
        read(n, "shift", noise.shift);
        if (n.contains("signal")) {
          const auto& s = n.at("signal");
          expect_keys(s, "noise.signal", {"type", "value", "mean", "amplitude", "period", "s0", "slope"});
          read(s, "type", noise.signal.type);
          read(s, "value", noise.signal.value);
          read(s, "mean", noise.signal.mean);
          read(s, "amplitude", noise.signal.amplitude);
          read(s, "period", noise.signal.period);
          read(s, "s0", noise.signal.s0);
          read(s, "slope", noise.signal.slope);
        }
      }
      if (j.contains("integrator")) {
        const auto& i = j.at("integrator");
        expect_keys(i, "integrator", {"dt_ode", "dt_sde"});
        read(i, "dt_ode", integrator.dt_ode);
        read(i, "dt_sde", integrator.dt_sde);
      }
      read(j, "seed", seed);
      read(j, "out", out);
      read(j, "threads", threads);
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(std::string("config: ") + e.what());
    }
    validate();
  }

  void validate() const {
    model.validate();
    if (!(integrator.dt_ode > 0.0) || !(integrator.dt_sde > 0.0))
      throw DomainError("config: integrator steps must be > 0");
    if (threads == 0) throw DomainError("config: threads must be >= 1");
  }

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    c.merge(j);
    return c;
  }

  static RunConfig load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DomainError("config: cannot open " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(std::string("config: ") + e.what());
    }
    return from_json(j);
  }

 private:
  static void expect_keys(const nlohmann::json& j, std::string_view where,
                          std::initializer_list<std::string_view> allowed) {
    if (!j.is_object())
      throw DomainError("config: " + std::string(where.empty() ? "top level" : where) +
                        " must be an object");
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) {
        const std::string path = where.empty() ? key : std::string(where) + "." + key;
        throw DomainError("config: unknown key '" + path + "'");
      }
    }
  }

  template <class T>
  static void read(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
  }
};

}  // namespace ivri
