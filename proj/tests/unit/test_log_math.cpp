#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "logext/log_math.hpp"

using namespace logext;

TEST(LogMath, LogAddMatchesDirect) {
  EXPECT_NEAR(log_add(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
  EXPECT_EQ(log_add(kNegInf, 1.5), 1.5);
  EXPECT_EQ(log_add(kNegInf, kNegInf), kNegInf);
  EXPECT_NEAR(log_add(1000.0, 1000.0), 1000.0 + std::log(2.0), 1e-12);
}

TEST(LogMath, LogSubAndLog1mexp) {
  EXPECT_NEAR(log_sub(std::log(5.0), std::log(3.0)), std::log(2.0), 1e-15);
  EXPECT_EQ(log_sub(2.0, 2.0), kNegInf);
  EXPECT_NEAR(log1mexp(-1e-20), std::log(1e-20), 1e-12);
  EXPECT_NEAR(log1mexp(-50.0), -std::exp(-50.0), 1e-30);
}

TEST(LogMath, LogSumExpHandlesHugeRange) {
  std::vector<double> terms{-800.0, 700.0, 700.0, kNegInf};
  EXPECT_NEAR(log_sum_exp(terms), 700.0 + std::log(2.0), 1e-12);
  std::vector<double> empty;
  EXPECT_EQ(log_sum_exp(empty), kNegInf);
}

TEST(LogMath, AccumulatorAgreesWithBatch) {
  std::vector<double> terms;
  LogAccumulator acc;
  for (int i = 0; i < 1000; ++i) {
    const double t = std::sin(i) * 300.0;
    terms.push_back(t);
    acc.add(t);
  }
  EXPECT_NEAR(acc.value(), log_sum_exp(terms), 1e-12);
}

TEST(LogMath, CompensatedSumRecoversSmallTerms) {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  EXPECT_DOUBLE_EQ(s.value(), 1000.0);
}
