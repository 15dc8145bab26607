#ifndef LOGEXT_LIMIT_LAWS_HPP
#define LOGEXT_LIMIT_LAWS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "logext/chain_model.hpp"
#include "logext/parallel.hpp"

namespace logext::laws {

enum class Support { NonnegativeReals, AllReals };

// P((tau - shift_t) / scale_s <= w) ~ cdf(w).
struct LimitLaw {
  double scale_s = 1.0;
  double log_scale_s = 0.0;  // kept separately: E_star overflows double for large n
  double shift_t = 0.0;
  std::function<double(double)> cdf;
  std::string case_tag;
  Support support = Support::NonnegativeReals;
  // Weight on rapid extinction for the supercritical mixture; empty elsewhere.
  std::optional<double> rapid_weight;

  double rescale(double tau) const;
  double unscale(double w) const;
  // cdf evaluated at a raw time.
  double raw_cdf(double tau) const;
};

// rho_t^{Z0}, rho_t^{-1} = 1 + gamma / (e^{gamma t} - 1), gamma = 1 - r; rho_t = t / (1 + t) at r = 1.
double bbp_extinction_cdf(double r, std::int64_t Z0, double t);

// exp(-a / (e^{a w} - 1)), exp(-1/w) at a = 0.
double H_a_cdf(double a, double w);

double gumbel_cdf(double w);

// g(X0) = log(gamma^2 n) - log(r + gamma n / X0). Requires gamma > 0.
double subcritical_shift_g(const ModelParams& params, std::int64_t X0);

inline constexpr double kDefaultSmallDelta = 0.1;

// Law of the extinction time given that 0 is reached before X_star, at raw time t.
// delta < small_delta: H_a(t / X0) with a = delta X0.
// otherwise: bbp extinction law with parameter 1/r run at speed r.
double rapid_extinction_cdf(const ModelParams& params, std::int64_t X0, double t,
                            double small_delta = kDefaultSmallDelta);

// Leading-order asymptotics, all on log scale. Require r > 1.
double log_E_star_asymptotic(const ModelParams& params);
double log_p_star_asymptotic(const ModelParams& params);
double log_L_star_asymptotic(const ModelParams& params);

struct DispatchPolicy {
  double phase_cutoff = 3.0;
  double gamma_x0_bounded = 5.0;     // gamma X0 < this: bounded
  double small_delta = kDefaultSmallDelta;
  std::int64_t x0_constant = 10;     // X0 < this: constant
  double subcrit_1c_factor = 0.1;    // X0 log(gamma X0) < factor * gamma n
  double critical_small_ratio = 0.1; // X0 / sqrt(n) < this: X0 = o(sqrt n)
  double delta_x0_large = 5.0;       // delta X0 >= this: rapid extinction negligible
  std::int64_t exact_max_n = 10'000'000;
  std::size_t diffusion_replicates = 2000;
  std::uint64_t diffusion_seed = 20240613;
  double diffusion_dt = 1e-4;
  ExecutionOptions exec{};
};

LimitLaw predict_law(const ModelParams& params, std::int64_t X0, const DispatchPolicy& policy = {});

// Smallest w with cdf(w) >= p, by bisection.
double law_quantile(const LimitLaw& law, double p);

}  // namespace logext::laws

#endif  // LOGEXT_LIMIT_LAWS_HPP
