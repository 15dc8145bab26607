#include <gtest/gtest.h>

#include <cmath>

#include "logext/chain_model.hpp"
#include "logext/error.hpp"

using namespace logext;

TEST(ChainModel, DerivedQuantities) {
  const auto p = make_params(1000, 1.5);
  EXPECT_DOUBLE_EQ(p.delta, 0.5);
  EXPECT_DOUBLE_EQ(p.gamma, -0.5);
  EXPECT_NEAR(p.c, std::sqrt(1000.0) * 0.5, 1e-12);
  ASSERT_TRUE(p.supercritical());
  EXPECT_NEAR(*p.x_star, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(*p.X_star, 333);
  EXPECT_NEAR(*p.V_star, std::log(1.5) + 1.0 / 1.5 - 1.0, 1e-15);
}

TEST(ChainModel, SubcriticalHasNoWindow) {
  const auto p = make_params(100, 0.8);
  EXPECT_FALSE(p.supercritical());
  EXPECT_THROW(require_X_star(p), NotSupercritical);
  EXPECT_TRUE(make_params(100, 1.0).critical_exact);
}

TEST(ChainModel, RejectsBadInput) {
  EXPECT_THROW(make_params(0, 1.0), InvalidArgument);
  EXPECT_THROW(make_params(10, -0.1), InvalidArgument);
  EXPECT_THROW(make_params(10, std::nan("")), InvalidArgument);
}

TEST(ChainModel, RatesOfEachKind) {
  const auto p = make_params(10, 2.0);
  const auto logistic = rates(BDRateSpec::logistic(p), 5);
  EXPECT_DOUBLE_EQ(logistic.up, 5.0);
  EXPECT_DOUBLE_EQ(logistic.down, 5.0);
  EXPECT_DOUBLE_EQ(rates(BDRateSpec::logistic(p), 10).up, 0.0);
  EXPECT_DOUBLE_EQ(rates(BDRateSpec::logistic(p), 0).total(), 0.0);
  EXPECT_THROW(rates(BDRateSpec::logistic(p), 11), InvalidArgument);

  const auto bbp = rates(BDRateSpec::bbp(0.5), 1000000);
  EXPECT_DOUBLE_EQ(bbp.up, 500000.0);
  EXPECT_DOUBLE_EQ(bbp.down, 1000000.0);
  EXPECT_FALSE(BDRateSpec::bbp(0.5).bounded());

  const auto death = rates(BDRateSpec::pure_death(10), 4);
  EXPECT_DOUBLE_EQ(death.up, 0.0);
  EXPECT_DOUBLE_EQ(death.down, 4.0);

  EXPECT_THROW(rates(BDRateSpec::conditioned(p, true), 3), InvalidArgument);
}

TEST(ChainModel, PhaseClassification) {
  EXPECT_EQ(classify_phase(make_params(10000, 1.05)).phase, Phase::Supercritical);
  EXPECT_EQ(classify_phase(make_params(10000, 0.95)).phase, Phase::Subcritical);
  EXPECT_EQ(classify_phase(make_params(10000, 1.01)).phase, Phase::Critical);
  EXPECT_EQ(classify_phase(make_params(10000, 1.04)).phase, Phase::Supercritical);
  EXPECT_EQ(to_string(Phase::Critical), "Critical");
}
