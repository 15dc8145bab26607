#ifndef LOGEXT_DIFFUSION_HPP
#define LOGEXT_DIFFUSION_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "logext/chain_model.hpp"
#include "logext/parallel.hpp"
#include "logext/rng.hpp"

namespace logext::diffusion {

enum class Kind { CriticalLogistic, Feller, OU };

inline constexpr double kCriticalDt = 1e-4;
inline constexpr double kCriticalTCap = 1e3;
inline constexpr double kDefaultEntranceProxy = 100.0;

// CriticalLogistic: dY = Y(c - Y) dt + sqrt(2Y) dB
// Feller:           dY = -a Y dt + sqrt(2Y) dB
// OU:               dW = -W dt + sqrt(2/r) dB
struct DiffusionSpec {
  Kind kind = Kind::CriticalLogistic;
  double param = 0.0;  // c_inf, a_inf or r
  double y0 = 1.0;
  bool infinite_start = false;
  double dt = kCriticalDt;
  double t_cap = kCriticalTCap;

  static DiffusionSpec critical(double c_inf, double y0, double dt = kCriticalDt, double t_cap = kCriticalTCap);
  static DiffusionSpec critical_from_infinity(double c_inf, double dt = kCriticalDt, double t_cap = kCriticalTCap);
  static DiffusionSpec feller(double a_inf, double y0, double dt = 1e-3, double t_cap = 200.0);
  static DiffusionSpec ou(double r, double w0, double dt = 1e-3, double t_cap = 100.0);

  double drift(double y) const;
  double variance_rate(double y) const;  // squared diffusion coefficient
  void validate() const;
};

struct HittingTime {
  double time = 0.0;
  bool censored = false;
};

// Euler-Maruyama until the first step that lands at or below 0; reports the left
// endpoint of that step. OU specs are rejected (no absorption).
HittingTime simulate_hitting_time(const DiffusionSpec& spec, RngStream& rng);
HittingTime simulate_hitting_time(const DiffusionSpec& spec, std::uint64_t seed);

// Replaces y0 = +inf with a finite start. Throws InvalidArgument for non-critical
// kinds or, when c_inf > 0, a proxy below 10 max(1, c_inf).
DiffusionSpec infinite_entrance_start(const DiffusionSpec& spec, double y_start_proxy = kDefaultEntranceProxy);

struct HittingSamples {
  std::vector<double> values;  // uncensored, replicate order
  std::size_t replicates = 0;
  std::size_t censored_count = 0;
  std::uint64_t seed = 0;
};

HittingSamples sample_hitting_times(const DiffusionSpec& spec, std::size_t replicates, std::uint64_t seed,
                                    const ExecutionOptions& exec = {});

// One Gaussian stream drives every start in y0s (sorted ascending). When a step
// would leave a lower start above a higher one, the two coalesce, so the
// returned times are ordered like y0s.
std::vector<HittingTime> coupled_hitting_times(const DiffusionSpec& spec, std::span<const double> y0s,
                                               std::uint64_t seed);

// Empirical CDF of hitting times, censored runs counted in the denominator.
class TabulatedCdf {
 public:
  TabulatedCdf() = default;
  TabulatedCdf(std::vector<double> values, std::size_t censored, std::size_t grid_points = 512);

  double operator()(double t) const;
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& sorted_values() const { return sorted_; }
  std::size_t total() const { return total_; }
  double quantile(double p) const;
  void write_csv(std::ostream& out) const;

 private:
  std::vector<double> sorted_;
  std::size_t total_ = 0;
  std::vector<double> grid_;  // [0, 99.5th percentile]
};

// Requires replicates >= 1000; more than 1% censored throws ExcessiveCensoring.
TabulatedCdf hitting_cdf_numeric(const DiffusionSpec& spec, std::size_t replicates, std::uint64_t seed,
                                 const ExecutionOptions& exec = {});

struct OuReport {
  double variance = 0.0;
  double variance_se = 0.0;
  double variance_target = 0.0;  // 1 / r
  double autocorrelation = 0.0;  // at lag
  double autocorrelation_se = 0.0;
  double autocorrelation_target = 0.0;  // e^{-lag}
  double lag = 1.0;
  double max_abs_mean_z = 0.0;  // largest |mean W(s)| / sqrt(variance / replicates) over the grid
  std::size_t replicates = 0;
  std::size_t samples_per_replicate = 0;
};

// Runs the logistic chain from X_star and samples W_s = (X_{s/delta} - n x_star)/sqrt(n)
// on a grid of rescaled time s in [burn_in, burn_in + horizon] with spacing sample_dt.
// Throws RegimeViolation when n V_star < 4.
OuReport ou_fluctuation_check(const ModelParams& params, double horizon, std::size_t replicates,
                              std::uint64_t seed, const ExecutionOptions& exec = {}, double lag = 1.0,
                              double sample_dt = 0.25, double burn_in = 3.0);

}  // namespace logext::diffusion

#endif  // LOGEXT_DIFFUSION_HPP
