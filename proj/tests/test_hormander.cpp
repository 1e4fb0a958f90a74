#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ivri/hodgkin_huxley.hpp"
#include "ivri/hormander.hpp"
#include "ivri/trajectory.hpp"

namespace hh = ivri::hh;

namespace {

using ld = long double;

// d_g(v) = -a_g(v) x + b_g(v) from the quotient-form rates, in long double
ld d_gate(int gate, ld v, ld x) {
  ld alpha, beta;
  switch (gate) {
    case 0:
      alpha = 0.01L * (10.0L - v) / (std::exp((10.0L - v) / 10.0L) - 1.0L);
      beta = 0.125L * std::exp(-v / 80.0L);
      break;
    case 1:
      alpha = 0.1L * (25.0L - v) / (std::exp((25.0L - v) / 10.0L) - 1.0L);
      beta = 4.0L * std::exp(-v / 18.0L);
      break;
    default:
      alpha = 0.07L * std::exp(-v / 20.0L);
      beta = 1.0L / (std::exp((30.0L - v) / 10.0L) + 1.0L);
  }
  return -(alpha + beta) * x + alpha;
}

// 5-point central stencils for derivative orders 2, 3, 4
std::array<ld, 3> fd_stencils(int gate, ld v, ld x, ld h) {
  const ld fm2 = d_gate(gate, v - 2 * h, x), fm1 = d_gate(gate, v - h, x), f0 = d_gate(gate, v, x);
  const ld fp1 = d_gate(gate, v + h, x), fp2 = d_gate(gate, v + 2 * h, x);
  return {(-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h),
          (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * h * h * h),
          (fp2 - 4 * fp1 + 6 * f0 - 4 * fm1 + fm2) / (h * h * h * h)};
}

// one Richardson step removes the h^2 term of each stencil
std::array<ld, 3> fd_derivatives(int gate, ld v, ld x, ld h) {
  const auto coarse = fd_stencils(gate, v, x, h), fine = fd_stencils(gate, v, x, h / 2);
  std::array<ld, 3> out{};
  for (std::size_t k = 0; k < 3; ++k) out[k] = (4 * fine[k] - coarse[k]) / 3;
  return out;
}

ld det3(const std::array<std::array<ld, 3>, 3>& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

ivri::IvriModel hh_model() { return hh::make_model({}, ivri::NoiseSpec{}); }

}  // namespace

TEST(LuDeterminant, KnownMatrices) {
  EXPECT_DOUBLE_EQ(ivri::lu_determinant({2.0, 0.0, 0.0, 3.0}, 2), 6.0);
  EXPECT_DOUBLE_EQ(ivri::lu_determinant({0.0, 1.0, 1.0, 0.0}, 2), -1.0);
  EXPECT_NEAR(ivri::lu_determinant({1, 2, 3, 4, 5, 6, 7, 8, 10}, 3), -3.0, 1e-13);
  EXPECT_EQ(ivri::lu_determinant({1, 2, 2, 4}, 2), 0.0);
  EXPECT_THROW(ivri::lu_determinant({1, 2, 3}, 2), ivri::DomainError);
}

TEST(DGeneral, EqualsDrvFTimesDelta) {
  const auto model = hh_model();
  const hh::HHParams p;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> uv(-30.0, 120.0), ug(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x = {uv(rng), ug(rng), ug(rng), ug(rng), 0.0};
    const auto d = ivri::d_general(model, x);
    const double expect = hh::membrane_drift_dv(p, x[1], x[2], x[3]) * hh::delta(x).value;
    EXPECT_NEAR(d.value, expect, 1e-9 * std::abs(expect)) << "v=" << x[0];
  }
}

TEST(DGeneral, FirstRowStructure) {
  const auto model = hh_model();
  const std::vector<double> x = {5.0, 0.3, 0.1, 0.6, 0.0};
  const auto d = ivri::d_general(model, x);
  ASSERT_EQ(d.size, 4u);
  EXPECT_NEAR(d.entry(0, 0), hh::membrane_drift_dv({}, 0.3, 0.1, 0.6), 1e-12);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_EQ(d.entry(0, k), 0.0);
  EXPECT_EQ(d.point.size(), 4u);
}

TEST(DGeneral, DependsOnlyOnFirstCoordinates) {
  const auto model = hh_model();
  const auto a = ivri::d_general(model, std::vector<double>{5.0, 0.3, 0.1, 0.6, 0.0});
  const auto b = ivri::d_general(model, std::vector<double>{5.0, 0.3, 0.1, 0.6, 17.0});
  EXPECT_EQ(a.value, b.value);
}

TEST(DGeneral, IdenticalGatesGiveZero) {
  auto model = hh_model();
  // m = 4: two internal variables with the same coefficients
  model.dimension = 4;
  model.gates = {model.gates[0], model.gates[0]};
  model.f = [](std::span<const double> x) { return -x[0] + 0.2 * x[1] * x[1]; };
  model.f_jet = [](const ivri::Jet& v, std::span<const double> x) { return -v + 0.2 * x[1] * x[1]; };
  const auto d = ivri::d_general(model, std::vector<double>{4.0, 0.3, 0.3, 0.0});
  EXPECT_FALSE(d.nonzero);
  EXPECT_LE(std::abs(d.value), d.tolerance);
}

TEST(DGeneral, SignAtRestingEquilibrium) {
  const auto model = hh_model();
  const auto s = hh::branch_state(0.0);
  const std::vector<double> x = {s[0], s[1], s[2], s[3], 0.0};
  const auto d = ivri::d_general(model, x);
  const auto dl = hh::delta(x);
  EXPECT_LT(dl.value, 0.0);
  EXPECT_GT(d.value, 0.0);
  EXPECT_TRUE(dl.nonzero);
  EXPECT_TRUE(d.nonzero);
}

TEST(DGeneral, Errors) {
  const auto model = hh_model();
  EXPECT_THROW(ivri::d_general(model, std::vector<double>{1.0, 0.2}), ivri::DomainError);
}

TEST(Delta, AffineInN) {
  for (double v : {-7.0, 2.0, 13.0, 40.0}) {
    const double m = 0.2, h = 0.4;
    const double d0 = hh::delta(v, 0.0, m, h).value, d1 = hh::delta(v, 1.0, m, h).value,
                 d2 = hh::delta(v, 2.0, m, h).value;
    EXPECT_NEAR(d0 + d2, 2.0 * d1, 1e-10 * (std::abs(d0) + std::abs(d2)));
  }
}

TEST(Delta, AgreesWithFiniteDifferenceDeterminant) {
  const double v = 3.7, n = 0.35, m = 0.08, h = 0.55;
  const std::array<ld, 3> x = {n, m, h};
  std::array<std::array<ld, 3>, 3> a{};
  for (int g = 0; g < 3; ++g) a[static_cast<std::size_t>(g)] = fd_derivatives(g, v, x[static_cast<std::size_t>(g)], 0.2L);
  const double oracle = static_cast<double>(det3(a));
  const auto rep = hh::delta(v, n, m, h);
  EXPECT_NEAR(rep.value, oracle, 1e-4 * std::abs(oracle));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k)
      EXPECT_NEAR(rep.entry(i, k), static_cast<double>(a[i][k]), 1e-5 * std::abs(rep.entry(i, k)));
}

TEST(Delta, TransposeInvariant) {
  const auto rep = hh::delta(6.0, 0.4, 0.2, 0.5);
  std::vector<double> t(9);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) t[k * 3 + i] = rep.entry(i, k);
  EXPECT_NEAR(ivri::lu_determinant(t, 3), rep.value, 1e-12 * std::abs(rep.value));
}

TEST(Delta, NegativeAtRestingEquilibrium) {
  EXPECT_LT(hh::delta_on_branch(0.0), 0.0);
}

TEST(Delta, ConstantTrajectoryAtRest) {
  const auto s = hh::branch_state(0.0);
  ivri::Trajectory traj(4);
  for (int i = 0; i < 10; ++i) traj.push_back(0.1 * i, s);
  const auto seq = hh::delta_along(traj);
  ASSERT_EQ(seq.size(), 10u);
  for (const auto& d : seq) {
    EXPECT_LT(d.delta, 0.0);
    EXPECT_EQ(d.delta, seq.front().delta);
  }
  EXPECT_THROW(hh::delta_along(ivri::Trajectory(3)), ivri::DomainError);
}

TEST(DeltaBranch, RootsAreSignChangesOfAnIndependentEvaluation) {
  // Every root returned must be bracketed by a sign change of the long
  // double finite-difference determinant on the branch, and every sign
  // change of that oracle on a 0.05 grid must be reported.
  auto oracle = [](double v) {
    const auto s = hh::branch_state(v);
    std::array<std::array<ld, 3>, 3> a{};
    for (int g = 0; g < 3; ++g) a[static_cast<std::size_t>(g)] = fd_derivatives(g, v, s[static_cast<std::size_t>(g) + 1], 0.01L);
    return det3(a);
  };
  const auto roots = hh::find_delta_zeros(-15.0, 30.0);
  for (double r : roots) EXPECT_LT(oracle(r - 0.01) * oracle(r + 0.01), 0.0) << r;
  std::size_t changes = 0;
  for (double v = -15.0; v < 30.0 - 1e-9; v += 0.05) {
    const double w = std::min(v + 0.05, 30.0);
    if (std::abs(w - 10.0) < 0.1 || std::abs(w - 25.0) < 0.1 || std::abs(v - 10.0) < 0.1 ||
        std::abs(v - 25.0) < 0.1)
      continue;  // quotient-form oracle is inaccurate next to the removable singularities
    if (oracle(v) * oracle(w) < 0.0) ++changes;
  }
  EXPECT_EQ(changes, roots.size());
}

TEST(DeltaBranch, RootRefindIsIdempotent) {
  for (double r : hh::find_delta_zeros(-15.0, 30.0)) {
    const auto again = hh::find_delta_zeros(r - 0.1, r + 0.1);
    ASSERT_EQ(again.size(), 1u);
    EXPECT_NEAR(again[0], r, 1e-6);
  }
}

TEST(DeltaBranch, Continuity) {
  std::vector<double> f;
  for (int i = 0; i <= 45000; ++i) f.push_back(hh::delta_on_branch(-15.0 + 1e-3 * i));
  for (std::size_t i = 1; i + 2 < f.size(); ++i) {
    const double jump = std::abs(f[i + 1] - f[i]);
    const double local = std::max(std::abs(f[i] - f[i - 1]), std::abs(f[i + 2] - f[i + 1]));
    EXPECT_LE(jump, 10.0 * local + 1e-30) << "v=" << -15.0 + 1e-3 * static_cast<double>(i);
  }
}

TEST(DeltaBranch, Errors) {
  EXPECT_THROW(hh::find_delta_zeros(-20.0, 0.0), ivri::DomainError);
  EXPECT_THROW(hh::find_delta_zeros(5.0, 5.0), ivri::DomainError);
  EXPECT_THROW(hh::find_delta_zeros(0.0, 31.0), ivri::DomainError);
}

class LieBracket : public ::testing::TestWithParam<ivri::NoiseKind> {};

TEST_P(LieBracket, L1MatchesClosedForm) {
  ivri::NoiseSpec noise;
  noise.kind = GetParam();
  noise.shift = 3.0;
  noise.tau = 1.5;
  const auto model = hh::make_model({}, noise);
  const auto a0 = ivri::drift_field(model), a1 = ivri::diffusion_field(model);
  const std::vector<double> point = {0.7, 3.7, 0.4, 0.1, 0.5, 0.3};

  const auto self = ivri::lie_bracket_numeric(a1, a1, point);
  for (double s : self) EXPECT_NEAR(s, 0.0, 1e-6);

  const auto l1 = ivri::lie_bracket_numeric(a1, a0, point);
  EXPECT_NEAR(l1[0], 0.0, 1e-12);
  const double sigma = model.input.diffusion(point[5]);
  for (std::size_t i = 1; i <= 3; ++i) {
    const auto r = model.gates[i - 1].rates_jet(ivri::Jet::variable(point[1], 1));
    const double expect = sigma * (-r.a * point[i + 1] + r.b).derivative(1);
    EXPECT_NEAR(l1[i + 1], expect, 1e-5 * std::abs(expect)) << "gate " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Noise, LieBracket,
                         ::testing::Values(ivri::NoiseKind::OrnsteinUhlenbeck,
                                           ivri::NoiseKind::CoxIngersollRoss));

TEST(LieBracketNumeric, LinearFields) {
  // A = (x, 0), B = (0, x): [A, B] = A.grad B - B.grad A = (0, x)
  ivri::VectorField a = [](std::span<const double> p, std::span<double> o) { o[0] = p[0]; o[1] = 0; };
  ivri::VectorField b = [](std::span<const double> p, std::span<double> o) { o[0] = 0; o[1] = p[0]; };
  const auto br = ivri::lie_bracket_numeric(a, b, std::vector<double>{2.0, -1.0}, 1e-4);
  EXPECT_NEAR(br[0], 0.0, 1e-9);
  EXPECT_NEAR(br[1], 2.0, 1e-9);
  EXPECT_THROW(ivri::lie_bracket_numeric(a, b, std::vector<double>{2.0, -1.0}, -1.0), ivri::DomainError);
}
