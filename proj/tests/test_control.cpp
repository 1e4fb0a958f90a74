#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "ivri/control.hpp"
#include "ivri/hodgkin_huxley.hpp"

namespace hh = ivri::hh;
using ivri::NoiseKind;
using ivri::NoiseSpec;
using ivri::Signal;

namespace {

NoiseSpec ou(double tau, double gamma, Signal s = Signal::constant(0.0)) {
  NoiseSpec n;
  n.tau = tau;
  n.gamma = gamma;
  n.signal = std::move(s);
  return n;
}

ivri::IvriModel hh_ou(double tau = 1.0, double gamma = 0.5, Signal s = Signal::constant(0.0)) {
  return hh::make_model({}, ou(tau, gamma, std::move(s)));
}

std::vector<double> state5(double v, double n, double m, double h, double xi) {
  return {v, n, m, h, xi};
}

}  // namespace

TEST(Bridge, Constant) {
  const auto g = ivri::smooth_bridge(3.0, 3.0);
  for (double s : {-1.0, 0.0, 0.3, 1.0, 7.0}) {
    EXPECT_EQ(g(s), 3.0);
    EXPECT_EQ(g.derivative(s), 0.0);
  }
}

TEST(Bridge, InterpolationConditions) {
  const auto g = ivri::smooth_bridge(-2.0, 15.0);
  EXPECT_EQ(g(0.0), -2.0);
  EXPECT_EQ(g(1.0), 15.0);
  EXPECT_EQ(g(4.0), 15.0);
  EXPECT_EQ(g.derivative(0.0), 0.0);
  EXPECT_EQ(g.derivative(1.0), 0.0);
  // vanishing second derivative at the ends: gamma'(h) = O(h^2)
  for (double h : {1e-3, 1e-4}) {
    EXPECT_NEAR(g.derivative(h) / (h * h), 30.0 * 17.0, 30.0 * 17.0 * 3 * h);
    EXPECT_NEAR(g.derivative(1.0 - h) / (h * h), 30.0 * 17.0, 30.0 * 17.0 * 3 * h);
  }
  // derivative against central differences
  for (double s = 0.05; s < 1.0; s += 0.05)
    EXPECT_NEAR(g.derivative(s), (g(s + 1e-6) - g(s - 1e-6)) / 2e-6, 1e-5 * 17.0);
}

TEST(Bridge, MonotoneOnUnitInterval) {
  const auto up = ivri::smooth_bridge(0.0, 10.0);
  const auto down = ivri::smooth_bridge(10.0, 0.0);
  double prev = up(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double s = i / 1000.0;
    EXPECT_GE(up.derivative(s), 0.0);
    EXPECT_LE(down.derivative(s), 0.0);
    EXPECT_GE(up(s), prev);
    prev = up(s);
  }
}

TEST(Accessibility, StartAtFixedPoint) {
  const double z1 = 5.0;
  const auto b = hh::branch_state(z1);
  const auto model = hh_ou();
  const auto acc = ivri::accessibility_path(model, state5(b[0], b[1], b[2], b[3], 0.3), z1, 10.0);
  const auto rel = ivri::gating_relaxation(model, acc);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LE(rel.distance_at_t[i], 1e-9);
    EXPECT_LE(rel.distance_at_1[i], 1e-9);
  }
}

TEST(Accessibility, GatingRelaxesExponentially) {
  const auto model = hh_ou();
  const auto acc = ivri::accessibility_path(model, state5(-3.0, 0.2, 0.7, 0.1, 1.0), 12.0, 10.0);
  const auto rel = ivri::gating_relaxation(model, acc);
  ASSERT_EQ(rel.bound.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_GT(rel.distance_at_1[i], 0.0);
    EXPECT_LE(rel.distance_at_t[i], rel.bound[i] + 1e-9) << i;
  }
  EXPECT_TRUE(rel.within(1e-9));
  EXPECT_EQ(acc.path.times().back(), 10.0);
  EXPECT_EQ(acc.path.state(0)[0], -3.0);
  EXPECT_EQ(acc.path.back()[0], 12.0);
}

TEST(Accessibility, InputCoordinateIdentity) {
  // Z_m(s) - Z_m(0) = gamma(s) - gamma(0) - int_0^s F(Z), trapezoid quadrature
  const auto model = hh_ou();
  auto max_gap = [&](double dt) {
    const auto acc = ivri::accessibility_path(model, state5(0.0, 0.3, 0.05, 0.6, -0.4), 15.0, 5.0, dt);
    const auto& p = acc.path;
    double integral = 0.0, gap = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) {
      const double h = p.time(k) - p.time(k - 1);
      integral += 0.5 * h * (model.f(p.state(k - 1).first(4)) + model.f(p.state(k).first(4)));
      const double lhs = p.state(k)[4] - p.state(0)[4];
      const double rhs = acc.bridge(p.time(k)) - acc.bridge(0.0) - integral;
      gap = std::max(gap, std::abs(lhs - rhs));
    }
    return gap;
  };
  const double g1 = max_gap(0.01), g2 = max_gap(0.005);
  EXPECT_LT(g1, 1e-3);
  EXPECT_LT(g2, g1);
}

TEST(Accessibility, Errors) {
  const auto model = hh_ou();
  const auto x = state5(0.0, 0.3, 0.05, 0.6, 0.0);
  EXPECT_THROW(ivri::accessibility_path(model, x, 5.0, 1.0), ivri::DomainError);
  NoiseSpec cir = ou(1.0, 0.5);
  cir.kind = NoiseKind::CoxIngersollRoss;
  cir.shift = 2.0;
  EXPECT_THROW(ivri::accessibility_path(hh::make_model({}, cir), x, 5.0, 10.0), ivri::DomainError);
  EXPECT_THROW(ivri::accessibility_path(model, std::vector<double>{0.0, 0.3}, 5.0, 10.0),
               ivri::DomainError);
}

TEST(Imitation, OuZeroInput) {
  // I = 0, S = 0: hdot = tau x_m / (gamma sqrt(tau))
  const double tau = 2.0, gamma = 0.5, xm = 0.7;
  const auto c = ivri::control_for_imitation(hh_ou(tau, gamma), [](double) { return 0.0; }, xm, 5.0, 0.01);
  ASSERT_EQ(c.hdot.size(), 501u);
  const double expect = tau * xm / (gamma * std::sqrt(tau));
  for (double h : c.hdot) EXPECT_NEAR(h, expect, 1e-14);
}

TEST(Imitation, DriftlessUnitDiffusion) {
  auto model = hh_ou();
  model.input.drift = [](double, double) { return 0.0; };
  model.input.diffusion = [](double) { return 1.0; };
  model.input.diffusion_derivative = [](double) { return 0.0; };
  const auto c = ivri::control_for_imitation(model, [](double) { return 0.0; }, 0.4, 2.0, 0.1);
  for (double h : c.hdot) EXPECT_EQ(h, 0.0);
}

TEST(Imitation, StratonovichCorrectionInNumerator) {
  NoiseSpec cir = ou(1.0, 0.5);
  cir.kind = NoiseKind::CoxIngersollRoss;
  cir.shift = 2.0;
  const auto model = hh::make_model({}, cir);
  auto input = [](double s) { return std::cos(s); };
  const auto c = ivri::control_for_imitation(model, input, 0.5, 1.0, 0.25);
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    const double s = c.times[k];
    const double xm = 0.5 + std::sin(s);
    const double sigma = 0.5 * std::sqrt(xm + 2.0);
    const double dsigma = 0.5 / (2.0 * std::sqrt(xm + 2.0));
    const double expect = (std::cos(s) - (0.0 - xm) + 0.5 * sigma * dsigma) / sigma;
    EXPECT_NEAR(c.hdot[k], expect, 1e-8) << "s=" << s;
  }
}

TEST(Imitation, CirBarrierIsDomainError) {
  NoiseSpec cir = ou(1.0, 0.5);
  cir.kind = NoiseKind::CoxIngersollRoss;
  cir.shift = 2.0;
  const auto model = hh::make_model({}, cir);
  // x_m + int I reaches -K = -2 at s = 1.5
  EXPECT_THROW(ivri::control_for_imitation(model, [](double) { return -2.0; }, 1.0, 3.0, 0.01),
               ivri::DomainError);
  EXPECT_NO_THROW(ivri::control_for_imitation(model, [](double) { return -2.0; }, 1.0, 1.0, 0.01));
}

TEST(Imitation, ZeroSigmaIsDomainError) {
  EXPECT_THROW(ivri::control_for_imitation(hh_ou(1.0, 0.0), [](double) { return 0.0; }, 0.0, 1.0, 0.1),
               ivri::DomainError);
}

TEST(ControlPath, OffGridLookupThrows) {
  const auto c = ivri::control_for_imitation(hh_ou(), [](double) { return 1.0; }, 0.0, 1.0, 0.125);
  EXPECT_NO_THROW(c(0.5));
  EXPECT_THROW(c(0.3), ivri::DomainError);
  EXPECT_THROW(c(1.5), ivri::DomainError);
  EXPECT_THROW(c(-0.125), ivri::DomainError);
}

TEST(Controlled, ZeroControlIsStratonovichFlow) {
  NoiseSpec cir = ou(1.0, 0.5);
  cir.kind = NoiseKind::CoxIngersollRoss;
  cir.shift = 2.0;
  const auto model = hh::make_model({}, cir);
  const auto x0 = state5(0.0, 0.3, 0.05, 0.6, 0.5);
  const auto a = ivri::integrate_controlled(model, x0, [](double) { return 0.0; }, 5.0, 0.01);
  auto strat = [&](double s, std::span<const double> x, std::span<double> dx) {
    model.stratonovich_drift(s, x, dx);
  };
  const auto b = ivri::integrate_ode(strat, x0, 0.0, 5.0, 0.01);
  EXPECT_EQ(a.data(), b.data());
}

TEST(Controlled, OuStratonovichDriftEqualsIto) {
  const auto model = hh_ou(1.5, 0.7, Signal::sinusoid(1.0, 2.0, 10.0));
  const auto x = state5(3.0, 0.3, 0.05, 0.6, 0.5);
  std::vector<double> a(5), b(5);
  model.drift(1.3, x, a);
  model.stratonovich_drift(1.3, x, b);
  EXPECT_EQ(a, b);
}

TEST(Controlled, ImitationRoundTripFourthOrder) {
  const auto model = hh_ou(1.0, 0.5, Signal::sinusoid(0.0, 1.0, 7.0));
  auto input = [](double s) { return 10.0 + 5.0 * std::sin(2.0 * std::numbers::pi * s / 12.56); };
  const auto x0 = state5(0.0, 0.3177, 0.0529, 0.5961, 0.0);
  const auto c1 = ivri::verify_imitation(model, input, x0, 20.0, 0.02);
  const auto c2 = ivri::verify_imitation(model, input, x0, 20.0, 0.01);
  EXPECT_LE(c2.sup_error, 1e-4);
  const double ratio = c1.reference_error / c2.reference_error;
  EXPECT_GT(ratio, 12.0) << c1.reference_error << " " << c2.reference_error;
  EXPECT_LT(ratio, 24.0);
  EXPECT_EQ(c2.generated.size(), c2.target.size());
}

TEST(Controlled, FirstCoordinateIdentity) {
  // (X_1 - X_m)' = F exactly for the controlled vector field; the check is
  // limited by Simpson quadrature of F, which converges at fourth order
  const auto model = hh_ou(1.0, 0.5);
  auto input = [](double s) { return 6.0 + std::cos(s); };
  const auto x0 = state5(0.0, 0.3177, 0.0529, 0.5961, 0.2);
  auto max_gap = [&](double dt) {
    const auto c = ivri::verify_imitation(model, input, x0, 5.0, dt);
    const auto& p = c.generated;
    auto f = [&](std::size_t k) { return model.f(p.state(k).first(4)); };
    double integral = 0.0, gap = 0.0;
    for (std::size_t k = 2; k < p.size(); k += 2) {
      const double h = p.time(k) - p.time(k - 1);
      integral += h / 3.0 * (f(k - 2) + 4.0 * f(k - 1) + f(k));
      const double diff = (p.state(k)[0] - p.state(k)[4]) - (p.state(0)[0] - p.state(0)[4]);
      gap = std::max(gap, std::abs(diff - integral));
    }
    return gap;
  };
  const double g1 = max_gap(0.002), g2 = max_gap(0.001);
  EXPECT_LT(g2, 1e-6);
  EXPECT_GT(g1 / g2, 10.0) << g1 << " " << g2;
}

TEST(Controlled, AccessibilityRoundTrip) {
  const auto model = hh_ou();
  const auto x = state5(-1.0, 0.3, 0.05, 0.6, 0.4);
  const auto c1 = ivri::verify_accessibility(model, x, 5.0, 10.0, 0.02);
  const auto c2 = ivri::verify_accessibility(model, x, 5.0, 10.0, 0.01);
  EXPECT_LE(c2.sup_error, 1e-6);
  EXPECT_GT(c1.sup_error / c2.sup_error, 12.0) << c1.sup_error << " " << c2.sup_error;
  EXPECT_NEAR(c2.generated.back()[0], 5.0, 1e-6);
  EXPECT_EQ(c2.target.times().back(), 10.0);
}

TEST(Controlled, SupDistanceNeedsMatchingTimes) {
  ivri::Trajectory a(1), b(1);
  a.push_back(0.0, std::vector<double>{1.0});
  a.push_back(0.5, std::vector<double>{2.0});
  b.push_back(0.0, std::vector<double>{1.5});
  b.push_back(0.25, std::vector<double>{0.0});
  b.push_back(0.5, std::vector<double>{2.25});
  EXPECT_DOUBLE_EQ(ivri::sup_distance(a, b), 0.5);
  ivri::Trajectory c(1);
  c.push_back(0.0, std::vector<double>{1.0});
  c.push_back(0.4, std::vector<double>{1.0});
  EXPECT_THROW(ivri::sup_distance(a, c), ivri::DomainError);
}
