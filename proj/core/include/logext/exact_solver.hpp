#ifndef LOGEXT_EXACT_SOLVER_HPP
#define LOGEXT_EXACT_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "logext/chain_model.hpp"

namespace logext::exact {

// Log scale-function increments of the logistic chain.
//
// nu(j, k) is the product over i in (j, k] of q_-(i) / q_+(i), extended to
// j > k by nu(k, j) = 1 / nu(j, k). The table stores prefix sums
// log nu(0, k) for k = 0..n-1, so log nu(j, k) = prefix[k] - prefix[j] and the
// cocycle identity nu(j,k) nu(k,l) = nu(j,l) holds by construction.
//
// Products overflow double range for n beyond a few hundred (nu reaches
// e^{n V_star}); every quantity derived from the table is evaluated in log space.
class LogNuTable {
 public:
  // Throws InvalidArgument when r == 0 (the ratio q_-/q_+ is infinite).
  explicit LogNuTable(const ModelParams& params);

  const ModelParams& params() const { return params_; }
  std::int64_t n() const { return params_.n; }

  std::span<const double> prefix() const { return prefix_; }

  // log nu(j, k) for 0 <= j, k <= n - 1.
  double log_nu(std::int64_t j, std::int64_t k) const;

  // log sum_{k=0}^{m-1} nu(0, k), m in [0, n]; -inf for m == 0.
  double log_cumulative(std::int64_t m) const;

 private:
  ModelParams params_;
  std::vector<double> prefix_;
  std::vector<double> cumulative_;
};

LogNuTable build_log_nu(const ModelParams& params);

// V(x) = x (log r - 1) - (1 - x) log(1 - x), for 0 <= x < 1.
double potential_V(const ModelParams& params, double x);

struct PotentialEstimate {
  double a = 0.0;
  double b = 0.0;
  double log_nu_upper = 0.0;
  double log_nu_central = 0.0;
  double log_error_bound = 0.0;
};

// Upper bound and trapezoid estimate of log nu(na, nb). a and b are rounded to
// the grid {k / n}; requires 0 <= a < b < 1 after rounding.
PotentialEstimate nu_estimate(const ModelParams& params, double a, double b);

// Probabilities of reaching X_star before 0 (plus) and 0 before X_star (minus),
// indexed by j = 0..X_star. Both directions are accumulated separately in log
// space so that h_minus near X_star keeps full relative precision.
struct HittingProbabilities {
  std::int64_t X_star = 0;
  std::vector<double> h_plus;
  std::vector<double> h_minus;
  std::vector<double> log_h_plus;
  std::vector<double> log_h_minus;
};

// Requires r > 1 and X_star >= 1.
HittingProbabilities hitting_probs(const LogNuTable& table);

enum class Target { Up, Down };

// h-transformed rates: Up conditions on hitting X_star before 0, Down on the
// reverse. Valid for 0 < j < X_star.
JumpRatePair conditioned_rates(const LogNuTable& table, const HittingProbabilities& h, Target target,
                               std::int64_t j);
JumpRatePair conditioned_rates(const LogNuTable& table, Target target, std::int64_t j);

// Expected time to step from j to j + 1 under the Up-conditioned chain, 1 <= j < X_star.
double crossing_up_star(const LogNuTable& table, const HittingProbabilities& h, std::int64_t j);
double crossing_up_star(const LogNuTable& table, std::int64_t j);

// Expected time to step from j to j - 1 for the unconditioned chain, 1 <= j <= n.
// The log form is needed whenever a supercritical sojourn is in range.
double log_crossing_down(const LogNuTable& table, std::int64_t j);
double crossing_down(const LogNuTable& table, std::int64_t j);

// log S_-(j) for all j = 1..n in O(n); entry 0 is unused (-inf).
std::vector<double> log_crossing_down_all(const LogNuTable& table);

// Expected time to step from j to j - 1 under the Down-conditioned chain, 1 <= j < X_star.
double crossing_down_conditioned(const LogNuTable& table, const HittingProbabilities& h, std::int64_t j);
double crossing_down_conditioned(const LogNuTable& table, std::int64_t j);

// log P(hit 0 before returning to X_star | X_0 = X_star).
double log_p_star_exact(const LogNuTable& table);
double log_p_star_exact(const LogNuTable& table, const HittingProbabilities& h);

// Expected excursion length from X_star, given the excursion returns. Requires X_star >= 2.
double L_star_exact(const LogNuTable& table);
double L_star_exact(const LogNuTable& table, const HittingProbabilities& h);

// log E_star^o = log L_star + log(1/p_star - 1).
double log_sojourn_expectation(const LogNuTable& table);
double log_sojourn_expectation(const LogNuTable& table, const HittingProbabilities& h);

// E[tau | X_0 = j] as the telescoped sum of S_-(1..j); log form is exact in
// range, the linear form overflows to +inf for long supercritical sojourns.
double log_mean_extinction_exact(const LogNuTable& table, std::int64_t j);
double mean_extinction_exact(const LogNuTable& table, std::int64_t j);
std::vector<double> log_mean_extinction_all(const LogNuTable& table);

struct ExactResults {
  ModelParams params;
  std::vector<double> h_plus;   // empty unless X_star >= 1
  std::vector<double> h_minus;  // empty unless X_star >= 1
  std::optional<double> log_p_star;
  std::optional<double> log_L_star;
  std::optional<double> log_E_star_o;
  std::vector<double> log_mean_extinction;  // index j = 0..n, entry 0 is -inf
};

// Everything above for one instance. Supercritical fields stay empty when r <= 1
// or when X_star is too small for them.
ExactResults solve(const ModelParams& params);

}  // namespace logext::exact

#endif  // LOGEXT_EXACT_SOLVER_HPP
