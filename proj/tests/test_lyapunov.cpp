#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stochlyap/lyapunov.hpp"

using namespace stochlyap;

namespace {

Matrix diag2(double a, double b) { return (Matrix(2, 2) << a, 0, 0, b).finished(); }

std::vector<Matrix> switching_modes() { return {diag2(0.2, 1), diag2(1, 0.8), diag2(1, 0.6)}; }
Matrix switching_pi() { return (Matrix(3, 3) << 0, 0.4, 0.6, 1, 0, 0, 1, 0, 0).finished(); }
Matrix even_pi() { return (Matrix(3, 3) << 0, 0.5, 0.5, 1, 0, 0, 1, 0, 0).finished(); }

SwitchedSystem switching_system(const Matrix& pi = switching_pi()) {
  return SwitchedSystem(switching_modes(), SequenceModel::markov({1.0 / 3, 1.0 / 3, 1.0 / 3}, pi, 3));
}

SwitchedSystem single_mode(const Matrix& a) { return SwitchedSystem({a}, SequenceModel::iid({1.0})); }

/// Path-by-path expectation for any horizon, from the transition rows.
double expectation_by_paths(const std::vector<Matrix>& modes, const Matrix& pi, const Vector& x, std::size_t mode,
                            std::size_t horizon, const LyapunovFunction& v) {
  if (horizon == 0) return v(x);
  double e = 0.0;
  for (Eigen::Index next = 0; next < pi.cols(); ++next) {
    const double p = pi(static_cast<Eigen::Index>(mode), next);
    if (p == 0.0) continue;
    e += p * expectation_by_paths(modes, pi, modes[static_cast<std::size_t>(next)] * x, static_cast<std::size_t>(next),
                                  horizon - 1, v);
  }
  return e;
}

Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }

}  // namespace

TEST(ConditionalExpectation, SwitchingExampleValues) {
  const auto sys = switching_system();
  const auto v = inf_norm_lyapunov();
  EXPECT_NEAR(conditional_expectation_V(sys, v, vec2(0, 1), 0, 2), 0.68, 1e-15);
  EXPECT_NEAR(conditional_expectation_V(sys, v, vec2(1, 0), 0, 2), 0.2, 1e-15);
}

TEST(ConditionalExpectation, EvenWeightingGivesPointSeven) {
  const auto sys = switching_system(even_pi());
  EXPECT_NEAR(conditional_expectation_V(sys, inf_norm_lyapunov(), vec2(0, 1), 0, 2), 0.7, 1e-15);
}

TEST(ConditionalExpectation, DegenerateSignalOneStep) {
  const Matrix a = (Matrix(2, 2) << 0.3, 0.4, -0.2, 0.9).finished();
  const Vector x = vec2(1.5, -2);
  const auto v = two_norm_lyapunov();
  EXPECT_NEAR(conditional_expectation_V(single_mode(a), v, x, 0, 1), (a * x).norm(), 1e-14);
}

TEST(ConditionalExpectation, MatchesPathOracleOnRandomChains) {
  Rng rng(31);
  const auto v = one_norm_lyapunov();
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(4), m = 1 + rng.below(3);
    std::vector<Matrix> modes;
    for (std::size_t p = 0; p < m; ++p) {
      Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1, 1);
      modes.push_back(a);
    }
    const Matrix pi = oracle::random_stochastic(rng, m, 0.6);
    const SwitchedSystem sys(modes, SequenceModel::markov(std::vector<double>(m, 1.0 / static_cast<double>(m)), pi));
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-3, 3);
    const std::size_t mode = rng.below(m), horizon = 1 + rng.below(4);
    EXPECT_NEAR(conditional_expectation_V(sys, v, x, mode, horizon),
                expectation_by_paths(modes, pi, x, mode, horizon, v), 1e-12);
  }
}

TEST(ConditionalExpectation, Homogeneity) {
  Rng rng(8);
  const auto sys = switching_system();
  for (const auto& v : {inf_norm_lyapunov(), one_norm_lyapunov(), two_norm_lyapunov()}) {
    for (int t = 0; t < 100; ++t) {
      const Vector x = vec2(rng.uniform(-2, 2), rng.uniform(-2, 2));
      const double c = rng.uniform(0.01, 50);
      const std::size_t mode = rng.below(3), horizon = 1 + rng.below(3);
      const double base = conditional_expectation_V(sys, v, x, mode, horizon);
      EXPECT_NEAR(conditional_expectation_V(sys, v, c * x, mode, horizon), c * base, 1e-12 * c);
    }
  }
}

TEST(ConditionalExpectation, EnumerationGuard) {
  const SwitchedSystem sys(std::vector<Matrix>(10, diag2(0.5, 0.5)), SequenceModel::iid(std::vector<double>(10, 0.1)));
  EXPECT_THROW(conditional_expectation_V(sys, inf_norm_lyapunov(), vec2(1, 1), 0, 7), Error);
}

TEST(Certify, SwitchingExample) {
  const auto cert = certify_homogeneous(switching_system(), inf_norm_lyapunov(), 5);
  EXPECT_EQ(cert.horizon, 2u);
  EXPECT_GE(cert.alpha, 0.3);
  EXPECT_TRUE(cert.supermartingale_ok);
  EXPECT_NEAR(cert.beta, 0.68, 1e-12);
  EXPECT_NEAR(cert.beta, oracle::two_step_sphere_max(switching_modes(), switching_pi()), 1e-12);
  EXPECT_NEAR(cert.rate, std::sqrt(1 - cert.alpha), 1e-15);
}

TEST(Certify, EvenWeightingMeetsThePublishedBoundExactly) {
  const auto cert = certify_homogeneous(switching_system(even_pi()), inf_norm_lyapunov(), 5);
  EXPECT_EQ(cert.horizon, 2u);
  EXPECT_NEAR(cert.alpha, 0.3, 1e-12);
  EXPECT_NEAR(cert.beta, oracle::two_step_sphere_max(switching_modes(), even_pi()), 1e-12);
}

TEST(Certify, HalfIdentity) {
  const auto cert = certify_homogeneous(single_mode(0.5 * Matrix::Identity(2, 2)), inf_norm_lyapunov(), 3);
  EXPECT_EQ(cert.horizon, 1u);
  EXPECT_NEAR(cert.alpha, 0.5, 1e-15);
}

TEST(Certify, IdentityHasNoCertificate) {
  try {
    certify_homogeneous(single_mode(Matrix::Identity(2, 2)), inf_norm_lyapunov(), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoCertificate);
  }
}

TEST(Certify, SoundOnRandomDiagonalSystems) {
  // Whenever a certificate is issued, every grid point satisfies it; for
  // diagonal n = 2 modes the breakpoint oracle also bounds the true sup.
  Rng rng(101);
  const auto v = inf_norm_lyapunov();
  int issued = 0;
  for (int t = 0; t < 150; ++t) {
    std::vector<Matrix> modes;
    for (int p = 0; p < 3; ++p) modes.push_back(diag2(rng.uniform(-1.1, 1.1), rng.uniform(-1.1, 1.1)));
    const Matrix pi = oracle::random_stochastic(rng, 3, 0.5);
    const SwitchedSystem sys(modes, SequenceModel::markov({1.0 / 3, 1.0 / 3, 1.0 / 3}, pi));
    FiniteStepCertificate cert;
    try {
      cert = certify_homogeneous(sys, v, 3);
    } catch (const Error&) {
      continue;
    }
    ++issued;
    const SphereGrid grid;
    for (const auto& x : sphere_points(2, grid, v))
      for (std::size_t mode = 0; mode < 3; ++mode)
        EXPECT_LE(conditional_expectation_V(sys, v, x, mode, cert.horizon), (1 - cert.alpha) * v(x) + 1e-10);
    if (cert.horizon == 2) EXPECT_NEAR(cert.beta, oracle::two_step_sphere_max(modes, pi), 1e-12);
  }
  EXPECT_GT(issued, 20);
}

TEST(SpherePoints, LieOnTheLevelSet) {
  for (const auto& v : {inf_norm_lyapunov(), one_norm_lyapunov(), two_norm_lyapunov()})
    for (std::size_t n : {2u, 3u, 5u})
      for (const auto& x : sphere_points(n, SphereGrid{21, 64}, v)) EXPECT_NEAR(v(x), 1.0, 1e-12);
}

TEST(SpherePoints, IncludeCornersAndAxes) {
  const auto pts = sphere_points(2, SphereGrid{11, 0}, inf_norm_lyapunov());
  auto has = [&](const Vector& y) {
    return std::any_of(pts.begin(), pts.end(), [&](const Vector& p) { return (p - y).norm() < 1e-15; });
  };
  EXPECT_TRUE(has(vec2(1, 1)));
  EXPECT_TRUE(has(vec2(-1, 1)));
  EXPECT_TRUE(has(vec2(0, -1)));
  EXPECT_TRUE(has(vec2(1, 0)));
}

TEST(MonteCarlo, HalfIdentityRate) {
  const auto r = monte_carlo_decay(single_mode(0.5 * Matrix::Identity(2, 2)), inf_norm_lyapunov(), vec2(1, -1), 60,
                                   4, 1);
  EXPECT_NEAR(r.fitted_rate, 0.5, 1e-9);
}

TEST(MonteCarlo, ZeroStateReportsZeroRate) {
  const auto r = monte_carlo_decay(switching_system(), inf_norm_lyapunov(), vec2(0, 0), 20, 3, 1);
  EXPECT_EQ(r.fitted_rate, 0.0);
  EXPECT_EQ(r.tail_fraction, 1.0);
}

TEST(MonteCarlo, SwitchingExampleDecaysNoSlowerThanCertified) {
  const auto sys = switching_system();
  const auto cert = certify_homogeneous(sys, inf_norm_lyapunov(), 4);
  const auto r = monte_carlo_decay(sys, inf_norm_lyapunov(), vec2(1, 1), 200, 400, 77);
  double mean = 0, sq = 0;
  for (double x : r.per_trial_rate) {
    mean += x;
    sq += x * x;
  }
  mean /= static_cast<double>(r.per_trial_rate.size());
  const double se = std::sqrt((sq / static_cast<double>(r.per_trial_rate.size()) - mean * mean) /
                              static_cast<double>(r.per_trial_rate.size()));
  EXPECT_LE(r.fitted_rate, cert.rate + 3 * se);
  EXPECT_GT(r.tail_fraction, 0.99);
}

TEST(MonteCarlo, WeightedQuantileStaysBounded) {
  const auto sys = switching_system();
  const auto cert = certify_homogeneous(sys, inf_norm_lyapunov(), 4);
  const double gamma = std::pow(1 - cert.alpha, -1.0 / static_cast<double>(cert.horizon));
  const std::size_t steps = 400;
  const auto r = monte_carlo_decay(sys, inf_norm_lyapunov(), vec2(1, 1), steps, 200, 5);
  double peak = 0;
  for (std::size_t k = 0; k <= steps; ++k) peak = std::max(peak, std::pow(gamma, static_cast<double>(k)) * r.q99_v[k]);
  EXPECT_LT(peak, 20.0);
  EXPECT_LT(std::pow(gamma, static_cast<double>(steps)) * r.q99_v[steps], peak);
}

TEST(MonteCarlo, DeterministicAcrossExecutionModes) {
  const auto sys = switching_system();
  const auto a = monte_carlo_decay(sys, inf_norm_lyapunov(), vec2(1, 1), 50, 16, 9, 1e-8, Execution::Serial);
  const auto b = monte_carlo_decay(sys, inf_norm_lyapunov(), vec2(1, 1), 50, 16, 9, 1e-8, Execution::Parallel);
  EXPECT_EQ(a.per_trial_rate, b.per_trial_rate);
  EXPECT_EQ(a.mean_v, b.mean_v);
}

TEST(FitLogSlope, Examples) {
  EXPECT_NEAR(*fit_log_slope_rate({0, 1, 2, 3}, {1, 0.5, 0.25, 0.125}), 0.5, 1e-15);
  EXPECT_FALSE(fit_log_slope_rate({0, 1}, {0, 0}).has_value());
}

TEST(Lyapunov, ByName) {
  EXPECT_EQ(lyapunov_by_name("spread").name, "spread");
  EXPECT_NEAR(lyapunov_by_name("spread")(vec2(3, -1)), 4.0, 1e-15);
  EXPECT_THROW(lyapunov_by_name("nope"), Error);
}
