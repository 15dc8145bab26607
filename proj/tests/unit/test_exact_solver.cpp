#include <gtest/gtest.h>

#include <cmath>
#include <tuple>

#include "dense_oracle.hpp"
#include "logext/error.hpp"
#include "logext/exact_solver.hpp"

using namespace logext;
using namespace logext::exact;

namespace {

// Values frozen from an arbitrary-precision dense solve at n = 10, r = 2 (X_star = 5).
constexpr double kHPlus[] = {0.0, 0.42418291485481835, 0.6598400897741619, 0.8071258240987516, 0.9123299200448871, 1.0};
constexpr double kSUpStar[] = {0.0, 0.35714285714285714, 0.37278415015641293, 0.40322182418904481,
                               0.46127768929533874};
constexpr double kSDown[] = {0.0,
                             6.607142656,
                             3.1150792533333333,
                             1.6344245333333333,
                             0.92935085714285714,
                             0.56612571428571429,
                             0.36612571428571429,
                             0.24932380952380952,
                             0.17744444444444444,
                             0.13111111111111111,
                             0.1};
constexpr double kSDownCond[] = {0.0, 0.83214475058470924, 0.41863915851509558, 0.23000624804748516,
                                 0.11363636363636364};

double rel(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

}  // namespace

TEST(ExactSolver, FrozenHittingProbabilities) {
  const LogNuTable table(make_params(10, 2.0));
  const auto h = hitting_probs(table);
  ASSERT_EQ(h.X_star, 5);
  for (int j = 0; j <= 5; ++j) {
    EXPECT_NEAR(h.h_plus[j], kHPlus[j], 1e-14) << j;
    EXPECT_NEAR(h.h_plus[j] + h.h_minus[j], 1.0, 1e-14) << j;
  }
  EXPECT_NEAR(h.h_minus[1], 0.5758170851451817, 1e-14);
}

TEST(ExactSolver, FrozenCrossingTimes) {
  const LogNuTable table(make_params(10, 2.0));
  for (int j = 1; j <= 4; ++j) {
    EXPECT_LT(rel(crossing_up_star(table, j), kSUpStar[j]), 1e-12) << j;
    EXPECT_LT(rel(crossing_down_conditioned(table, j), kSDownCond[j]), 1e-12) << j;
  }
  const auto all = log_crossing_down_all(table);
  for (int j = 1; j <= 10; ++j) {
    EXPECT_LT(rel(crossing_down(table, j), kSDown[j]), 1e-12) << j;
    EXPECT_LT(rel(std::exp(all[j]), kSDown[j]), 1e-12) << j;
  }
}

TEST(ExactSolver, FrozenSojournQuantities) {
  const LogNuTable table(make_params(10, 2.0));
  EXPECT_LT(rel(std::exp(log_p_star_exact(table)), 0.04383503997755646), 1e-12);
  EXPECT_LT(rel(L_star_exact(table), 0.51370170179052651), 1e-12);
  EXPECT_LT(rel(std::exp(log_sojourn_expectation(table)), 11.205272480816397), 1e-12);
  EXPECT_LT(rel(mean_extinction_exact(table, 1), 6.607142656), 1e-12);
  EXPECT_LT(rel(mean_extinction_exact(table, 5), 12.852123014095238), 1e-12);
  EXPECT_LT(rel(mean_extinction_exact(table, 10), 13.876128093460317), 1e-12);

  const auto up = conditioned_rates(table, Target::Up, 1);
  EXPECT_NEAR(up.up, 2.8, 1e-13);
  EXPECT_DOUBLE_EQ(up.down, 0.0);
  EXPECT_NEAR(conditioned_rates(table, Target::Down, 1).down, 1.7366626065773447, 1e-13);
}

TEST(ExactSolver, FrozenSubcriticalMean) {
  const LogNuTable table(make_params(100, 0.8));
  EXPECT_LT(rel(mean_extinction_exact(table, 10), 7.058884449948401), 1e-12);
}

TEST(ExactSolver, ConditionedRatesAtWindowEdge) {
  const LogNuTable table(make_params(10, 2.0));
  EXPECT_DOUBLE_EQ(conditioned_rates(table, Target::Down, 4).up, 0.0);
  EXPECT_THROW(conditioned_rates(table, Target::Up, 5), InvalidArgument);
  EXPECT_THROW(conditioned_rates(table, Target::Up, 0), InvalidArgument);
}

TEST(ExactSolver, GuardsAndErrors) {
  EXPECT_THROW(LogNuTable(make_params(10, 0.0)), InvalidArgument);
  const LogNuTable sub(make_params(50, 0.9));
  EXPECT_THROW(hitting_probs(sub), NotSupercritical);
  const LogNuTable tiny(make_params(10, 1.1));  // X_star = 0
  EXPECT_THROW(hitting_probs(tiny), WindowTooSmall);
  const LogNuTable one(make_params(10, 1.15));  // X_star = 1
  EXPECT_THROW(L_star_exact(one), WindowTooSmall);
  EXPECT_THROW(crossing_down(sub, 0), InvalidArgument);
  EXPECT_THROW(crossing_down(sub, 51), InvalidArgument);
  EXPECT_THROW(sub.log_nu(0, 50), InvalidArgument);
}

TEST(ExactSolver, PureDeathSolve) {
  const auto res = solve(make_params(5, 0.0));
  EXPECT_NEAR(std::exp(res.log_mean_extinction[5]), 1.0 + 0.5 + 1.0 / 3 + 0.25 + 0.2, 1e-14);
  EXPECT_FALSE(res.log_p_star.has_value());
}

TEST(ExactSolver, SolveFillsSupercriticalFields) {
  const auto res = solve(make_params(10, 2.0));
  ASSERT_TRUE(res.log_E_star_o.has_value());
  EXPECT_LT(rel(std::exp(*res.log_E_star_o), 11.205272480816397), 1e-12);
  EXPECT_EQ(res.h_plus.size(), 6u);
  const auto sub = solve(make_params(10, 0.5));
  EXPECT_FALSE(sub.log_p_star.has_value());
  EXPECT_TRUE(sub.h_plus.empty());
}

// Cocycle identity and the cumulative table.
TEST(ExactSolver, LogNuCocycle) {
  const LogNuTable table(make_params(200, 1.7));
  for (int j : {0, 3, 50, 117}) {
    for (int k : {1, 60, 199}) {
      for (int l : {0, 99, 150}) {
        EXPECT_NEAR(table.log_nu(j, k) + table.log_nu(k, l), table.log_nu(j, l), 1e-10);
      }
    }
    EXPECT_DOUBLE_EQ(table.log_nu(j, j), 0.0);
  }
  double direct = 0.0;
  for (int k = 0; k < 10; ++k) direct += std::exp(table.log_nu(0, k));
  EXPECT_NEAR(std::exp(table.log_cumulative(10)), direct, 1e-12 * direct);
}

class DenseOracleGrid : public ::testing::TestWithParam<std::tuple<int, double>> {};

TEST_P(DenseOracleGrid, AgreesWithDenseLinearSolve) {
  const auto [n, r] = GetParam();
  const auto params = make_params(n, r);
  const LogNuTable table(params);
  const std::int64_t x_star = params.X_star.value_or(0);
  const auto ref = oracle::solve_logistic(n, r, x_star);

  for (int j = 1; j <= n; ++j) {
    EXPECT_LT(rel(crossing_down(table, j), static_cast<double>(ref.s_down[j])), 1e-9) << "S_-(" << j << ")";
    EXPECT_LT(rel(mean_extinction_exact(table, j), static_cast<double>(ref.mean_extinction[j])), 1e-9);
  }
  if (x_star < 2) return;
  const auto h = hitting_probs(table);
  for (int j = 0; j <= x_star; ++j) EXPECT_NEAR(h.h_plus[j], static_cast<double>(ref.h_plus[j]), 1e-11);
  for (int j = 1; j < x_star; ++j) {
    EXPECT_LT(rel(crossing_up_star(table, h, j), static_cast<double>(ref.s_up_star[j])), 1e-9) << j;
    EXPECT_LT(rel(crossing_down_conditioned(table, h, j), static_cast<double>(ref.s_down_cond[j])), 1e-9) << j;
  }
  EXPECT_LT(rel(std::exp(log_p_star_exact(table, h)), static_cast<double>(ref.p_star)), 1e-9);
  EXPECT_LT(rel(L_star_exact(table, h), static_cast<double>(ref.L_star)), 1e-9);
}

INSTANTIATE_TEST_SUITE_P(SmallInstances, DenseOracleGrid,
                         ::testing::Values(std::make_tuple(10, 2.0), std::make_tuple(10, 1.1),
                                           std::make_tuple(20, 0.5), std::make_tuple(30, 1.0),
                                           std::make_tuple(30, 1.8), std::make_tuple(40, 3.0),
                                           std::make_tuple(25, 1.3), std::make_tuple(60, 1.25)));

// h_- near X_star is far below double epsilon relative to h_+; the suffix sums keep it.
TEST(ExactSolver, TinyHMinusKeepsRelativePrecision) {
  const LogNuTable table(make_params(10000, 1.5));
  const auto h = hitting_probs(table);
  EXPECT_GT(h.h_minus[2], 0.44);
  EXPECT_LT(h.h_minus[2], 0.45);
  const double lm = h.log_h_minus[h.X_star - 1];
  EXPECT_TRUE(std::isfinite(lm));
  EXPECT_LT(lm, -100.0);
  // log h_-(X*-1) - log h_-(X*-2) is the one-step ratio nu(X*-2, X*-1) ... at the top of the window
  const double step = h.log_h_minus[h.X_star - 2] - lm;
  EXPECT_NEAR(step, std::log1p(std::exp(table.log_nu(h.X_star - 1, h.X_star - 2))), 1e-6);
}

TEST(ExactSolver, PotentialEstimatesBracketExact) {
  for (double r : {1.3, 2.0}) {
    const auto params = make_params(2000, r);
    const LogNuTable table(params);
    const double a = 0.05, b = 0.9 * *params.x_star;
    const auto est = nu_estimate(params, a, b);
    const auto ja = static_cast<std::int64_t>(std::llround(est.a * 2000));
    const auto jb = static_cast<std::int64_t>(std::llround(est.b * 2000));
    const double exact = table.log_nu(ja, jb);
    EXPECT_LE(exact, est.log_nu_upper + 1e-9);
    EXPECT_LE(std::fabs(exact - est.log_nu_central), est.log_error_bound);
  }
  EXPECT_THROW(nu_estimate(make_params(100, 2.0), 0.5, 0.2), InvalidArgument);
}
