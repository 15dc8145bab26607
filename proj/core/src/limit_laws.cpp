#include "logext/limit_laws.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "logext/diffusion.hpp"
#include "logext/error.hpp"
#include "logext/exact_solver.hpp"
#include "logext/io.hpp"

namespace logext::laws {

double LimitLaw::rescale(double tau) const {
  const double d = tau - shift_t;
  if (std::isfinite(scale_s)) return d / scale_s;
  if (d == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::fabs(d)) - log_scale_s), d);
}

double LimitLaw::unscale(double w) const { return shift_t + w * scale_s; }

double LimitLaw::raw_cdf(double tau) const { return cdf(rescale(tau)); }

double bbp_extinction_cdf(double r, std::int64_t Z0, double t) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("bbp_extinction_cdf needs finite r >= 0");
  if (Z0 < 1) throw InvalidArgument("bbp_extinction_cdf needs Z0 >= 1");
  if (!(t >= 0.0)) throw InvalidArgument("bbp_extinction_cdf needs t >= 0");
  if (t == 0.0) return 0.0;
  const double gamma = 1.0 - r;
  double rho;
  if (std::isinf(t)) {
    rho = std::min(1.0, 1.0 / r);
  } else if (gamma == 0.0) {
    rho = t / (1.0 + t);
  } else {
    // rho^{-1} - 1 = gamma / (e^{gamma t} - 1), positive for either sign of gamma.
    rho = std::exp(-std::log1p(gamma / std::expm1(gamma * t)));
  }
  return std::pow(rho, static_cast<double>(Z0));
}

double H_a_cdf(double a, double w) {
  if (!(a >= 0.0)) throw InvalidArgument("H_a_cdf needs a >= 0");
  if (!(w > 0.0)) return 0.0;
  if (a == 0.0) return std::exp(-1.0 / w);
  return std::exp(-a / std::expm1(a * w));
}

double gumbel_cdf(double w) { return std::exp(-std::exp(-w)); }

double subcritical_shift_g(const ModelParams& params, std::int64_t X0) {
  if (!(params.gamma > 0.0)) throw RegimeViolation("subcritical shift needs gamma > 0");
  if (X0 < 1) throw InvalidArgument("subcritical shift needs X0 >= 1");
  const double g = params.gamma;
  const double n = static_cast<double>(params.n);
  return std::log(g * g * n) - std::log(params.r + g * n / static_cast<double>(X0));
}

double rapid_extinction_cdf(const ModelParams& params, std::int64_t X0, double t, double small_delta) {
  if (!(params.delta > 0.0)) throw RegimeViolation("rapid extinction law needs delta > 0");
  if (X0 < 1) throw InvalidArgument("rapid extinction law needs X0 >= 1");
  if (!(t >= 0.0)) throw InvalidArgument("rapid extinction law needs t >= 0");
  const double x0 = static_cast<double>(X0);
  if (params.delta < small_delta) return H_a_cdf(params.delta * x0, t / x0);
  return bbp_extinction_cdf(1.0 / params.r, X0, params.r * t);
}

namespace {
void require_super(const ModelParams& params) {
  if (!(params.r > 1.0)) throw NotSupercritical("asymptotic sojourn formulas need r > 1");
}
}  // namespace

double log_E_star_asymptotic(const ModelParams& params) {
  require_super(params);
  const double n = static_cast<double>(params.n);
  return 0.5 * std::log(2.0 * M_PI / n) + std::log(params.r) - 2.0 * std::log(params.delta) +
         n * params.V_star.value();
}

double log_p_star_asymptotic(const ModelParams& params) {
  require_super(params);
  const double n = static_cast<double>(params.n);
  return std::log(params.delta / (2.0 * std::sqrt(params.r))) - n * params.V_star.value();
}

double log_L_star_asymptotic(const ModelParams& params) {
  require_super(params);
  const double n = static_cast<double>(params.n);
  return 0.5 * std::log(M_PI * params.r / 2.0) - 0.5 * std::log(n) - std::log(params.delta);
}

namespace {

LimitLaw make_law(double scale, double shift, std::function<double(double)> cdf, std::string tag, Support support) {
  LimitLaw law;
  law.scale_s = scale;
  law.log_scale_s = std::log(scale);
  law.shift_t = shift;
  law.cdf = std::move(cdf);
  law.case_tag = std::move(tag);
  law.support = support;
  return law;
}

double exponential_cdf(double w) { return w <= 0.0 ? 0.0 : -std::expm1(-w); }

LimitLaw subcritical_law(const ModelParams& p, std::int64_t X0, const DispatchPolicy& policy) {
  const double x0 = static_cast<double>(X0);
  const double a = p.gamma * x0;
  const double r = p.r;
  if (a < policy.gamma_x0_bounded) {
    if (X0 < policy.x0_constant) {
      return make_law(1.0, 0.0, [r, X0](double t) { return t <= 0.0 ? 0.0 : bbp_extinction_cdf(r, X0, t); },
                      "Thm2-1a", Support::NonnegativeReals);
    }
    return make_law(x0, 0.0, [a](double w) { return H_a_cdf(a, w); }, "Thm2-1b", Support::NonnegativeReals);
  }
  const double margin = x0 * std::log(a) / (p.gamma * static_cast<double>(p.n));
  if (margin < policy.subcrit_1c_factor) {
    return make_law(1.0 / p.gamma, std::log(a) / p.gamma, gumbel_cdf, "Thm2-1c(margin=" + format_double(margin) + ")",
                    Support::AllReals);
  }
  return make_law(1.0 / p.gamma, subcritical_shift_g(p, X0) / p.gamma, gumbel_cdf, "Thm3", Support::AllReals);
}

LimitLaw critical_law(const ModelParams& p, std::int64_t X0, const DispatchPolicy& policy) {
  const double sqrt_n = std::sqrt(static_cast<double>(p.n));
  if (X0 < policy.x0_constant) {
    return make_law(1.0, 0.0, [X0](double t) { return t <= 0.0 ? 0.0 : bbp_extinction_cdf(1.0, X0, t); },
                    "Thm2-2a", Support::NonnegativeReals);
  }
  const double ratio = static_cast<double>(X0) / sqrt_n;
  if (ratio < policy.critical_small_ratio) {
    return make_law(static_cast<double>(X0), 0.0, [](double w) { return H_a_cdf(0.0, w); }, "Thm2-2b",
                    Support::NonnegativeReals);
  }
  const auto spec = diffusion::DiffusionSpec::critical(p.c, ratio, policy.diffusion_dt);
  auto table = std::make_shared<diffusion::TabulatedCdf>(
      diffusion::hitting_cdf_numeric(spec, policy.diffusion_replicates, policy.diffusion_seed, policy.exec));
  return make_law(sqrt_n, 0.0, [table](double w) { return (*table)(w); }, "Thm4", Support::NonnegativeReals);
}

LimitLaw supercritical_law(const ModelParams& p, std::int64_t X0, const DispatchPolicy& policy) {
  const std::int64_t x_star = require_X_star(p);
  const bool exact_ok = p.n <= policy.exact_max_n;
  std::optional<exact::LogNuTable> table;
  if (exact_ok) table.emplace(p);

  const std::int64_t anchor = std::max<std::int64_t>(x_star, 1);
  const double log_e = exact_ok ? exact::log_mean_extinction_exact(*table, anchor) : log_E_star_asymptotic(p);

  const double x0 = static_cast<double>(X0);
  if (X0 >= x_star || p.delta * x0 >= policy.delta_x0_large) {
    LimitLaw law = make_law(std::exp(log_e), 0.0, exponential_cdf, "Thm5-2", Support::NonnegativeReals);
    law.log_scale_s = log_e;
    return law;
  }
  const double w_down = exact_ok ? exact::hitting_probs(*table).h_minus[static_cast<std::size_t>(X0)]
                                 : std::pow(1.0 / p.r, x0);
  const double small = policy.small_delta;
  auto cdf = [p, X0, w_down, log_e, small](double t) {
    if (t <= 0.0) return 0.0;
    const double slow = -std::expm1(-std::exp(std::log(t) - log_e));
    return w_down * rapid_extinction_cdf(p, X0, t, small) + (1.0 - w_down) * slow;
  };
  LimitLaw law = make_law(1.0, 0.0, cdf, p.delta < small ? "Thm5-1a" : "Thm5-1b", Support::NonnegativeReals);
  law.rapid_weight = w_down;
  return law;
}

}  // namespace

LimitLaw predict_law(const ModelParams& params, std::int64_t X0, const DispatchPolicy& policy) {
  if (X0 < 1 || X0 > params.n) {
    throw InvalidArgument("predict_law needs 1 <= X0 <= n, got X0 = " + std::to_string(X0));
  }
  switch (classify_phase(params, policy.phase_cutoff).phase) {
    case Phase::Subcritical: return subcritical_law(params, X0, policy);
    case Phase::Critical: return critical_law(params, X0, policy);
    case Phase::Supercritical: return supercritical_law(params, X0, policy);
  }
  throw InvalidArgument("unknown phase");
}

double law_quantile(const LimitLaw& law, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile level must lie in (0, 1)");
  double lo = law.support == Support::AllReals ? -1.0 : 0.0;
  double hi = 1.0;
  while (law.cdf(hi) < p) {
    hi *= 2.0;
    if (hi > 1e300) throw InvalidArgument("quantile not bracketed");
  }
  if (law.support == Support::AllReals) {
    while (law.cdf(lo) >= p) {
      lo *= 2.0;
      if (lo < -1e300) throw InvalidArgument("quantile not bracketed");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::fabs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (law.cdf(mid) >= p) hi = mid; else lo = mid;
  }
  return hi;
}

}  // namespace logext::laws
