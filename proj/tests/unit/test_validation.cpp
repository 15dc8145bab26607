#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <vector>

#include "logext/error.hpp"
#include "logext/limit_laws.hpp"
#include "logext/rng.hpp"
#include "logext/simulator.hpp"
#include "logext/validation.hpp"

using namespace logext;
using namespace logext::validation;

TEST(Ecdf, Examples) {
  const std::vector<double> one{2.5};
  const auto e1 = ecdf(one);
  EXPECT_EQ(e1(2.4999), 0.0);
  EXPECT_EQ(e1(2.5), 1.0);
  const std::vector<double> three{3.0, 1.0, 2.0};
  const auto e3 = ecdf(three);
  EXPECT_DOUBLE_EQ(e3(2.0), 2.0 / 3.0);
  const std::vector<double> sorted{1.0, 2.0, 3.0};
  for (double x : {0.0, 1.5, 2.0, 2.7, 9.0}) EXPECT_EQ(e3(x), ecdf(sorted)(x));
  EXPECT_THROW(ecdf(std::vector<double>{}), InvalidArgument);
}

TEST(KsDistance, Examples) {
  const std::vector<double> median{0.0};
  EXPECT_DOUBLE_EQ(ks_distance(median, laws::gumbel_cdf), std::max(std::exp(-1.0), 1.0 - std::exp(-1.0)));
  const std::vector<double> half{0.5};
  EXPECT_DOUBLE_EQ(ks_distance(half, [](double x) { return std::clamp(x, 0.0, 1.0); }), 0.5);

  const std::vector<double> v{0.3, 1.2, 1.2, 4.0, 7.5};
  const auto e = ecdf(v);
  EXPECT_EQ(ks_distance(v, [&](double x) { return e(x); }), 0.0);
  EXPECT_THROW(ks_distance(std::vector<double>{}, laws::gumbel_cdf), InvalidArgument);
}

TEST(KsDistance, SelfTestAtMonteCarloQuantile) {
  RngStream rng(5, 0);
  std::vector<double> u(100000);
  for (auto& x : u) x = rng.uniform();
  EXPECT_LE(ks_distance(u, [](double x) { return std::clamp(x, 0.0, 1.0); }), ks_critical(u.size()));
  EXPECT_NEAR(ks_critical(100000), 0.0052, 1e-4);
}

TEST(KsDistance, CensoredVariant) {
  // Half the mass censored beyond the cap of a uniform law on [0, 2].
  const std::vector<double> v{0.25, 0.75};
  auto cdf = [](double x) { return std::clamp(x / 2.0, 0.0, 1.0); };
  EXPECT_NEAR(ks_distance_censored(v, 2, 1.0, cdf), 0.125, 1e-15);
  // Without censoring the cap does not move the statistic.
  EXPECT_DOUBLE_EQ(ks_distance_censored(v, 0, 1e9, cdf), ks_distance(v, cdf));
}

TEST(KsTwoSample, Examples) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{4.0, 5.0};
  EXPECT_EQ(ks_two_sample(a, a), 0.0);
  EXPECT_EQ(ks_two_sample(a, b), 1.0);
  const std::vector<double> c{1.5, 2.5, 3.5};
  EXPECT_NEAR(ks_two_sample(a, c), 1.0 / 3.0, 1e-15);
}

TEST(Tolerance, PerCase) {
  EXPECT_DOUBLE_EQ(default_tolerance("thm1-1a", 100000), 3.0 * ks_critical(100000));
  EXPECT_DOUBLE_EQ(default_tolerance("thm3", 20000), 0.05);
  EXPECT_DOUBLE_EQ(default_tolerance("thm5-2", 10000), 0.1);
  EXPECT_THROW(default_tolerance("thm9", 10), InvalidArgument);
}

TEST(Regime, PresetsAreAccepted) {
  for (const auto& id : known_cases()) {
    const auto p = preset(id);
    EXPECT_NO_THROW(check_regime(id, p.sequence)) << id;
    EXPECT_GT(p.replicates, 0u);
  }
}

TEST(Regime, BrokenSequencesAreRejected) {
  // sqrt(n) gamma not increasing.
  const std::vector<Instance> thm3{{10000, 0.9, 40}, {100000, 0.99, 100}};
  EXPECT_THROW(check_regime("thm3", thm3), RegimeViolation);
  // x0 log(gamma x0) > gamma n.
  const std::vector<Instance> thm21c{{1000, 0.9, 900}};
  EXPECT_THROW(check_regime("thm2-1c", thm21c), RegimeViolation);
  // gamma x0 bounded.
  const std::vector<Instance> thm21c_small{{10000, 0.9, 20}};
  EXPECT_THROW(check_regime("thm2-1c", thm21c_small), RegimeViolation);
  // Outside the critical window.
  const std::vector<Instance> thm4{{10000, 1.1, 100}};
  EXPECT_THROW(check_regime("thm4", thm4), RegimeViolation);
  // Start above X_star for the rapid-extinction law.
  const std::vector<Instance> thm51b{{10000, 1.5, 5000}};
  EXPECT_THROW(check_regime("thm5-1b", thm51b), RegimeViolation);
  // Small delta requested for an order-one delta.
  const std::vector<Instance> thm51a{{10000, 1.5, 2}};
  EXPECT_THROW(check_regime("thm5-1a", thm51a), RegimeViolation);
  // Metastability too strong for unconditioned runs.
  const std::vector<Instance> thm52{{1000, 1.8, 444}};
  EXPECT_THROW(check_regime("thm5-2", thm52), RegimeViolation);
  const std::vector<Instance> bbp{{0, 1.5, 3}};
  EXPECT_THROW(check_regime("thm1-1a", bbp), RegimeViolation);
  EXPECT_THROW(check_regime("thm1-1b", bbp), RegimeViolation);
}

TEST(Regime, StructuralErrors) {
  const std::vector<Instance> decreasing{{100000, 0.9, 100}, {10000, 0.9, 40}};
  EXPECT_THROW(check_regime("thm3", decreasing), InvalidArgument);
  EXPECT_THROW(check_regime("nope", decreasing), InvalidArgument);
  EXPECT_THROW(check_regime("thm3", std::vector<Instance>{}), InvalidArgument);
}

TEST(ValidateTheorem, RegimeCheckedBeforeSimulation) {
  const std::vector<Instance> thm3{{10000, 0.9, 40}, {100000, 0.99, 100}};
  EXPECT_THROW(validate_theorem("thm3", thm3, 1000000000, 1), RegimeViolation);
}

TEST(ValidateTheorem, ExactBbpLawReportAndSchema) {
  const auto p = preset("thm1-1b");
  const auto rep = validate_theorem("thm1-1b", p.sequence, 20000, 17);
  EXPECT_EQ(rep.verdict, Verdict::Pass);
  ASSERT_EQ(rep.instances.size(), 1u);
  EXPECT_LE(rep.instances[0].ks, rep.tolerance);
  EXPECT_EQ(rep.seed, 17u);

  const auto j = nlohmann::json::parse(rep.to_json());
  EXPECT_EQ(j["case"], "thm1-1b");
  EXPECT_EQ(j["verdict"], "Pass");
  EXPECT_EQ(j["seed"], 17);
  EXPECT_DOUBLE_EQ(j["tolerance"].get<double>(), rep.tolerance);
  ASSERT_EQ(j["instances"].size(), 1u);
  const auto& i = j["instances"][0];
  for (const char* key : {"n", "r", "x0", "replicates", "ks", "censored"}) EXPECT_TRUE(i.contains(key)) << key;
  EXPECT_EQ(i["replicates"], 20000);
  EXPECT_EQ(i["x0"], p.sequence[0].x0);

  // Deterministic given its inputs.
  EXPECT_EQ(validate_theorem("thm1-1b", p.sequence, 20000, 17).to_json(), rep.to_json());
}

TEST(ValidateTheorem, ToleranceOverrideDrivesVerdict) {
  const auto p = preset("thm1-1b");
  const auto rep = validate_theorem("thm1-1b", p.sequence, 2000, 3, 1e-6);
  EXPECT_EQ(rep.verdict, Verdict::Fail);
  EXPECT_EQ(rep.tolerance, 1e-6);
}

TEST(ValidateTheorem, SupercriticalExponentialSmallRun) {
  const std::vector<Instance> seq{{30, 1.8, 13}};
  const auto rep = validate_theorem("thm5-2", seq, 2000, 4);
  EXPECT_EQ(rep.instances[0].censored, 0u);
  EXPECT_LE(rep.instances[0].ks, 0.1);
}

TEST(ConvergenceStudy, RowsFollowTheReport) {
  const std::vector<Instance> seq{{30, 1.8, 13}};
  const auto rows = convergence_study("thm5-2", seq, 1000, 6);
  const auto rep = validate_theorem("thm5-2", seq, 1000, 6);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].n, 30);
  EXPECT_EQ(rows[0].ks, rep.instances[0].ks);
  EXPECT_EQ(rows[0].sample_mean, rep.instances[0].sample_mean);
  EXPECT_NEAR(rows[0].predicted_median, std::log(2.0), 1e-9);
}

TEST(AsymptoticTrend, GapsShrink) {
  const std::vector<std::int64_t> ns{500, 1000, 2000};
  const auto rows = asymptotic_trend(1.5, ns);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_LT(std::fabs(rows[k].log_p_gap), std::fabs(rows[k - 1].log_p_gap));
    EXPECT_LT(std::fabs(rows[k].log_L_gap), std::fabs(rows[k - 1].log_L_gap));
  }
  EXPECT_THROW(asymptotic_trend(1.0, ns), NotSupercritical);
}

TEST(AuditCoupling, DetectsViolations) {
  sim::SamplePath lo, hi;
  lo.states = {1, 2, 3};
  lo.times = {1.0, 2.0};
  hi.states = {2, 2, 1};
  hi.times = {1.5, 2.5};
  const std::vector<sim::SamplePath> paths{lo, hi};
  const auto audit = audit_coupling(paths);
  EXPECT_EQ(audit.events, 4u);
  EXPECT_GT(audit.order_violations, 0u);
  EXPECT_GT(audit.separation_violations, 0u);

  const std::vector<sim::SamplePath> same{lo, lo};
  const auto clean = audit_coupling(same);
  EXPECT_EQ(clean.order_violations, 0u);
  EXPECT_EQ(clean.separation_violations, 0u);
}
