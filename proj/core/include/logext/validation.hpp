#ifndef LOGEXT_VALIDATION_HPP
#define LOGEXT_VALIDATION_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logext/parallel.hpp"
#include "logext/simulator.hpp"

namespace logext::validation {

// Right-continuous empirical CDF.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> values);
  double operator()(double x) const;
  const std::vector<double>& sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

Ecdf ecdf(std::span<const double> values);

// sup_i max(|F_hat(x_i) - F(x_i)|, |F_hat(x_i-) - F(x_i-)|); F(x-) = F(x) for continuous F.
double ks_distance(std::span<const double> values, const std::function<double(double)>& cdf);

// Right-censored variant: `censored` further runs exceeded `cap` and stay in the
// denominator; the supremum runs over observed points and the cap only.
double ks_distance_censored(std::span<const double> values, std::size_t censored, double cap,
                            const std::function<double(double)>& cdf);

double ks_two_sample(std::span<const double> a, std::span<const double> b);

// Asymptotic one-sample KS quantile c_alpha / sqrt(m); c = 1.63 at 99%.
double ks_critical(std::size_t m, double c_alpha = 1.63);

enum class Verdict { Pass, Fail, Inconclusive };
std::string_view to_string(Verdict verdict);

struct Instance {
  std::int64_t n = 0;  // 0 for the bbp
  double r = 1.0;
  std::int64_t x0 = 1;
};

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct InstanceResult {
  Instance instance;
  std::size_t replicates = 0;
  double ks = 0.0;
  std::size_t censored = 0;
  double sample_mean = 0.0;       // of the rescaled samples
  double predicted_median = 0.0;  // on the rescaled axis
  std::vector<Check> checks;
};

struct ValidationReport {
  std::string case_id;
  std::vector<InstanceResult> instances;
  double tolerance = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::uint64_t seed = 0;
  std::vector<std::string> regime_notes;

  std::string to_json() const;
};

std::vector<std::string> known_cases();
bool is_known_case(std::string_view case_id);

struct CasePreset {
  std::vector<Instance> sequence;
  std::size_t replicates = 0;
};
CasePreset preset(std::string_view case_id);

// Default tolerance: 3 KS quantiles for laws exact at finite n, 0.05 (0.1 for thm5-2) otherwise.
double default_tolerance(std::string_view case_id, std::size_t replicates);

// Throws RegimeViolation when the sequence does not satisfy the case's conditions,
// InvalidArgument for unknown cases or non-increasing n.
std::vector<std::string> check_regime(std::string_view case_id, std::span<const Instance> sequence);

ValidationReport validate_theorem(std::string_view case_id, std::span<const Instance> sequence,
                                  std::size_t replicates, std::uint64_t seed,
                                  std::optional<double> tolerance = std::nullopt, const ExecutionOptions& exec = {});

struct StudyRow {
  std::int64_t n = 0;
  double ks = 0.0;
  double sample_mean = 0.0;
  double predicted_median = 0.0;
};
std::vector<StudyRow> convergence_study(std::string_view case_id, std::span<const Instance> sequence,
                                        std::size_t replicates, std::uint64_t seed, const ExecutionOptions& exec = {});

struct AsymptoticRow {
  std::int64_t n = 0;
  double log_p_gap = 0.0;  // exact - asymptotic
  double log_L_gap = 0.0;
  double log_E_gap = 0.0;
};
// Exact against leading-order sojourn asymptotics along n at fixed r > 1.
std::vector<AsymptoticRow> asymptotic_trend(double r, std::span<const std::int64_t> ns);

// Ordering and merge-permanence violations over all event times of a coupled run.
struct CouplingAudit {
  std::size_t events = 0;
  std::size_t order_violations = 0;
  std::size_t separation_violations = 0;
};
CouplingAudit audit_coupling(std::span<const sim::SamplePath> paths);
}  // namespace logext::validation

#endif  // LOGEXT_VALIDATION_HPP
