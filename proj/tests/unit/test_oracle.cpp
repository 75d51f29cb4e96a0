#include <gtest/gtest.h>

#include <cmath>

#include "shb/oracle.hpp"
#include "support/problems.hpp"

using namespace shb;
using shb::testing::phase_from_rows;
using shb::testing::random_normal;
using shb::testing::vec;

TEST(PhaseSubgradient, AboveMeasurement) {
  const auto p = phase_from_rows({{1, 0}}, {1});
  EXPECT_EQ(p->sample_subgradient(vec({2, 0}), 0), vec({4, 0}));
}

TEST(PhaseSubgradient, KinkReturnsZero) {
  const auto p = phase_from_rows({{1, 0}}, {4});
  EXPECT_EQ(p->sample_subgradient(vec({2, 0}), 0), vec({0, 0}));
}

TEST(PhaseSubgradient, BelowMeasurementMatchesFiniteDifference) {
  const auto p = phase_from_rows({{1, 1}}, {9});
  const Vector x = vec({1, 1});
  const Vector g = p->sample_subgradient(x, 0);
  EXPECT_EQ(g, vec({-4, -4}));
  // |<a,x>^2 - 9| is smooth near x since <a,x>^2 = 4 is far from 9.
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Vector e = Vector::Zero(2);
    e[j] = h;
    const double fd = (p->sample_value(x + e, 0) - p->sample_value(x - e, 0)) / (2 * h);
    EXPECT_NEAR(fd, g[j], 1e-6);
  }
}

TEST(PhaseSubgradient, FullIsAverageOfSamples) {
  const auto p = phase_from_rows({{1, 0}, {1, 0}, {1, 1}}, {1, 4, 9});
  const auto check = [&](const Vector& x) {
    Vector mean = Vector::Zero(2);
    for (std::size_t i = 0; i < 3; ++i) mean += p->sample_subgradient(x, i);
    mean /= 3.0;
    EXPECT_LE((p->full_subgradient(x) - mean).norm(), 1e-14);
  };
  // Each sample evaluated at its own example point gives (4,0), (0,0), (-4,-4).
  const Vector g = (p->sample_subgradient(vec({2, 0}), 0) + p->sample_subgradient(vec({2, 0}), 1) +
                    p->sample_subgradient(vec({1, 1}), 2)) /
                   3.0;
  EXPECT_NEAR(g[0], 0.0, 1e-15);
  EXPECT_NEAR(g[1], -4.0 / 3.0, 1e-15);
  check(vec({2, 0}));
  check(vec({1, 1}));
  check(vec({-0.3, 2.5}));
}

TEST(PhaseObjective, SingleSample) {
  const auto p = phase_from_rows({{1, 0}}, {1});
  EXPECT_EQ(p->objective(vec({0, 0})), 1.0);
  EXPECT_EQ(p->sample_value(vec({0, 0}), 0), 1.0);
}

TEST(PhaseObjective, ValueAndSubgradientAgree) {
  const auto p = generate_phase_retrieval({6, 20, 5.0, 0.3, 2.0, XStarMode::UnitSphere}, 4);
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_normal(6, rng);
    Vector g;
    const double f = p->value_and_subgradient(x, g);
    EXPECT_NEAR(f, p->objective(x), 1e-12 * (1 + std::abs(f)));
    EXPECT_LE((g - p->full_subgradient(x)).norm(), 1e-12 * (1 + g.norm()));
  }
}

TEST(PhaseObjective, SampleOutOfRangeThrows) {
  const auto p = phase_from_rows({{1, 0}}, {1});
  EXPECT_THROW(p->sample_subgradient(vec({0, 0}), 1), ConfigError);
  EXPECT_THROW(p->sample_value(vec({0, 0, 0}), 0), DimensionError);
}

TEST(PhaseGenerator, FullSizeShapes) {
  const auto p = generate_phase_retrieval({100, 300, 10.0, 0.2, 5.0, XStarMode::UnitSphere}, 1);
  EXPECT_EQ(p->a().rows(), 300);
  EXPECT_EQ(p->a().cols(), 100);
  EXPECT_EQ(p->b().size(), 300);
  EXPECT_NEAR(p->x_star().norm(), 1.0, 1e-14);
  // About a fifth of the measurements are corrupted.
  const Vector r = p->inner_products(p->x_star());
  int corrupted = 0;
  for (Eigen::Index i = 0; i < 300; ++i) corrupted += p->b()[i] != r[i] * r[i];
  EXPECT_GT(corrupted, 30);
  EXPECT_LT(corrupted, 90);
}

TEST(PhaseGenerator, CleanInstanceHasZeroAtSignal) {
  const auto p = generate_phase_retrieval({10, 40, 10.0, 0.0, 5.0, XStarMode::StandardNormal}, 9);
  EXPECT_EQ(p->objective(p->x_star()), 0.0);
}

TEST(PhaseGenerator, UnitKappaGivesUnscaledColumns) {
  // With kappa = 1 every column scale is 1, so A equals the raw Gaussian draw.
  const auto p1 = generate_phase_retrieval({5, 7, 1.0, 0.0, 5.0, XStarMode::UnitSphere}, 21);
  Rng rng = make_rng(21, 0);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) EXPECT_EQ(p1->a()(i, j), normal(rng));
}

TEST(PhaseGenerator, MatchesIndependentReconstruction) {
  // Rebuild the instance from the documented draw order: Q row-major, x*,
  // then (Bernoulli, normal) per measurement.
  const PhaseRetrievalParams params{4, 25, 10.0, 0.4, 5.0, XStarMode::UnitSphere};
  const auto p = generate_phase_retrieval(params, 77);
  Rng rng = make_rng(77, 0);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution fail(0.4);
  Matrix q(25, 4);
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 4; ++j) q(i, j) = normal(rng);
  Vector xs(4);
  for (int j = 0; j < 4; ++j) xs[j] = normal(rng);
  xs /= xs.norm();
  double abs_corruption = 0.0;
  for (int i = 0; i < 25; ++i) {
    const bool delta = fail(rng);
    const double zeta = 5.0 * normal(rng);
    if (delta) abs_corruption += std::abs(zeta);
    for (int j = 0; j < 4; ++j) {
      const double dj = 0.1 + 0.9 * j / 3.0;
      EXPECT_NEAR(p->a()(i, j), q(i, j) * dj, 1e-15 * std::abs(q(i, j)));
    }
  }
  EXPECT_LE((p->x_star() - xs).norm(), 1e-15);
  EXPECT_NEAR(p->objective(p->x_star()), abs_corruption / 25.0, 1e-12);
  EXPECT_GT(abs_corruption, 0.0);
}

TEST(PhaseGenerator, DeterministicPerSeed) {
  const PhaseRetrievalParams params{8, 30, 10.0, 0.2, 5.0, XStarMode::UnitSphere};
  const auto a = generate_phase_retrieval(params, 5);
  const auto b = generate_phase_retrieval(params, 5);
  const auto c = generate_phase_retrieval(params, 6);
  EXPECT_EQ(a->a(), b->a());
  EXPECT_EQ(a->b(), b->b());
  EXPECT_EQ(a->x_star(), b->x_star());
  EXPECT_NE(a->a(), c->a());
}

TEST(PhaseGenerator, RejectsBadParameters) {
  EXPECT_THROW(generate_phase_retrieval({0, 3, 1.0, 0.0, 1.0, XStarMode::UnitSphere}, 1), ConfigError);
  EXPECT_THROW(generate_phase_retrieval({3, 3, 0.5, 0.0, 1.0, XStarMode::UnitSphere}, 1), ConfigError);
  EXPECT_THROW(generate_phase_retrieval({3, 3, 2.0, 1.0, 1.0, XStarMode::UnitSphere}, 1), ConfigError);
  EXPECT_THROW(generate_phase_retrieval({3, 3, 2.0, -0.1, 1.0, XStarMode::UnitSphere}, 1), ConfigError);
}

TEST(Sampling, ReproducibleAndInRange) {
  const auto p = phase_from_rows({{1, 0}, {0, 1}, {1, 1}}, {1, 1, 1});
  Rng r1 = make_rng(3), r2 = make_rng(3);
  std::vector<int> counts(3, 0);
  for (int t = 0; t < 3000; ++t) {
    const auto s = p->draw_sample(r1);
    EXPECT_EQ(s, p->draw_sample(r2));
    ASSERT_LT(s, 3u);
    ++counts[s];
  }
  for (int c : counts) EXPECT_GT(c, 850);
}

TEST(Constants, AnalyticRho) {
  EXPECT_EQ(phase_from_rows({{1, 0}}, {1})->analytic_rho(), 2.0);
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 1;
  h(1, 1) = -3;
  const SmoothQuadratic q({h}, {Vector::Zero(2)}, ConvexSet::ball(2, 1.0));
  EXPECT_NEAR(q.analytic_rho(), 3.0, 1e-14);
}

TEST(Constants, EmpiricalOverBall) {
  const auto p = generate_phase_retrieval({100, 300, 10.0, 0.2, 5.0, XStarMode::UnitSphere}, 1);
  Rng rng = make_rng(1, 9);
  const Vector x0 = random_normal(100, rng);
  const auto c = estimate_constants(*p, ConvexSet::ball(x0, 2.0), 1000, 3);
  EXPECT_TRUE(std::isfinite(c.L_hat));
  EXPECT_GT(c.L_hat, 0.0);
  EXPECT_EQ(c.rho_source, Provenance::Analytic);
  EXPECT_EQ(c.L_source, Provenance::Empirical);
  EXPECT_GT(c.sigma_hat, 0.0);
}

TEST(Constants, UnboundedRegionRejected) {
  const auto p = phase_from_rows({{1, 0}}, {1});
  EXPECT_THROW(estimate_constants(*p, ConvexSet::whole_space(2), 10, 1), ConfigError);
}

TEST(Constants, SecondMomentMatchesDirectComputation) {
  // With one probe region shrunk to a point the estimate is exact.
  const auto p = phase_from_rows({{1, 0}, {1, 1}}, {1, 9});
  const auto c = estimate_constants(*p, ConvexSet::box(vec({2, 0}), vec({2, 0})), 3, 1);
  // Samples at (2,0): (4,0) and 2*2*(1,1)*sign(4-9) = (-4,-4).
  EXPECT_NEAR(c.L_hat, std::sqrt((16.0 + 32.0) / 2.0), 1e-12);
  EXPECT_NEAR(c.G_hat, vec({0, -2}).norm(), 1e-12);
  EXPECT_NEAR(c.sigma_hat, std::sqrt((vec({4, 2}).squaredNorm() + vec({-4, -2}).squaredNorm()) / 2.0), 1e-12);
}

TEST(SmoothFamily, GradientIsAverage) {
  const auto q = generate_smooth_quadratic({5, 7, 1.0, 0.2}, ConvexSet::ball(5, 2.0), 3);
  Rng rng(1);
  const Vector x = random_normal(5, rng);
  Vector expect = Vector::Zero(5);
  for (std::size_t i = 0; i < 7; ++i) expect += q->hessians()[i] * x + q->linear_terms()[i];
  expect /= 7.0;
  EXPECT_LE((q->full_subgradient(x) - expect).norm(), 1e-13);
}

TEST(SmoothFamily, SingleSampleMatchesFull) {
  const auto q = generate_smooth_quadratic({4, 1, 1.0, 0.0}, ConvexSet::box(4, -1, 1), 8);
  const Vector x = vec({0.1, -0.2, 0.3, 0.9});
  EXPECT_EQ(q->full_subgradient(x), q->sample_subgradient(x, 0));
}

TEST(SmoothFamily, RejectsAsymmetricHessian) {
  Matrix h(2, 2);
  h << 1, 2, 0, 1;
  EXPECT_THROW(SmoothQuadratic({h}, {Vector::Zero(2)}, ConvexSet::whole_space(2)), ConfigError);
}

namespace {

void expect_weak_convexity(const StochasticProblem& p, const ConvexSet& region, std::uint64_t seed) {
  const double rho = p.analytic_rho();
  Rng rng = make_rng(seed, 3);
  std::uniform_real_distribution<double> unit;
  for (int t = 0; t < 300; ++t) {
    const Vector x = sample_uniform(region, rng);
    const Vector y = sample_uniform(region, rng);
    const double a = unit(rng);
    const Vector z = a * x + (1 - a) * y;
    const double scale = 1 + std::abs(p.objective(x)) + std::abs(p.objective(y));
    EXPECT_LE(p.objective(z), a * p.objective(x) + (1 - a) * p.objective(y) +
                                  rho * a * (1 - a) / 2 * (x - y).squaredNorm() + 1e-8 * scale);
    const Vector g = p.full_subgradient(x);
    EXPECT_GE(p.objective(y), p.objective(x) + g.dot(y - x) - rho / 2 * (y - x).squaredNorm() - 1e-8 * scale);
  }
}

}  // namespace

TEST(WeakConvexity, PhaseRetrieval) {
  const auto p = generate_phase_retrieval({20, 60, 10.0, 0.2, 5.0, XStarMode::UnitSphere}, 2);
  expect_weak_convexity(*p, ConvexSet::ball(20, 2.0), 1);
}

TEST(WeakConvexity, SmoothIndefiniteFamily) {
  const auto q = generate_smooth_quadratic({8, 10, 2.0, 0.3}, ConvexSet::ball(8, 1.5), 4);
  expect_weak_convexity(*q, ConvexSet::ball(8, 1.5), 2);
}
