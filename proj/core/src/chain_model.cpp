#include "logext/chain_model.hpp"

#include <cmath>
#include <string>

#include "logext/error.hpp"

namespace logext {

ModelParams make_params(std::int64_t n, double r) {
  if (n < 1) throw InvalidArgument("carrying capacity n must be >= 1, got " + std::to_string(n));
  if (!std::isfinite(r) || r < 0.0) throw InvalidArgument("rate r must be finite and >= 0");

  ModelParams p;
  p.n = n;
  p.r = r;
  p.delta = r - 1.0;
  p.gamma = -p.delta;
  p.c = std::sqrt(static_cast<double>(n)) * p.delta;
  p.critical_exact = std::abs(p.gamma) < 1e-12;
  if (r > 1.0) {
    const double x_star = 1.0 - 1.0 / r;
    p.x_star = x_star;
    p.X_star = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * x_star));
    p.V_star = std::log(r) + 1.0 / r - 1.0;
  }
  return p;
}

std::int64_t require_X_star(const ModelParams& params) {
  if (!params.X_star) {
    throw NotSupercritical("operation requires r > 1 (X_star undefined for r = " + std::to_string(params.r) + ")");
  }
  return *params.X_star;
}

std::string_view to_string(RateKind kind) {
  switch (kind) {
    case RateKind::Logistic: return "logistic";
    case RateKind::BBP: return "bbp";
    case RateKind::ConditionedUp: return "conditioned_up";
    case RateKind::ConditionedDown: return "conditioned_down";
    case RateKind::PureDeath: return "pure_death";
  }
  return "unknown";
}

BDRateSpec BDRateSpec::logistic(const ModelParams& params) {
  return {RateKind::Logistic, params, params.n};
}

BDRateSpec BDRateSpec::bbp(double r) {
  // The n field is irrelevant for the branching process; only r matters.
  return {RateKind::BBP, make_params(1, r), -1};
}

BDRateSpec BDRateSpec::pure_death(std::int64_t n) {
  return {RateKind::PureDeath, make_params(n, 0.0), n};
}

BDRateSpec BDRateSpec::conditioned(const ModelParams& params, bool toward_x_star) {
  const std::int64_t x_star = require_X_star(params);
  return {toward_x_star ? RateKind::ConditionedUp : RateKind::ConditionedDown, params, x_star};
}

JumpRatePair rates(const BDRateSpec& spec, std::int64_t j) {
  if (j < 0 || (spec.bounded() && j > spec.state_space_max)) {
    throw InvalidArgument("state " + std::to_string(j) + " outside the state space of a " +
                          std::string(to_string(spec.kind)) + " chain");
  }
  const double x = static_cast<double>(j);
  switch (spec.kind) {
    case RateKind::Logistic: {
      const double n = static_cast<double>(spec.params.n);
      return {spec.params.r * x * (1.0 - x / n), x};
    }
    case RateKind::BBP:
      return {spec.params.r * x, x};
    case RateKind::PureDeath:
      return {0.0, x};
    case RateKind::ConditionedUp:
    case RateKind::ConditionedDown:
      throw InvalidArgument("conditioned rates depend on hitting probabilities; use exact::conditioned_rates");
  }
  return {};
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Subcritical: return "Subcritical";
    case Phase::Critical: return "Critical";
    case Phase::Supercritical: return "Supercritical";
  }
  return "unknown";
}

PhaseClassification classify_phase(const ModelParams& params, double cutoff) {
  if (!(cutoff > 0.0)) throw InvalidArgument("phase cutoff must be positive");
  PhaseClassification out;
  out.c_value = params.c;
  if (params.c >= cutoff) {
    out.phase = Phase::Supercritical;
  } else if (params.c <= -cutoff) {
    out.phase = Phase::Subcritical;
  } else {
    out.phase = Phase::Critical;
  }
  return out;
}

}  // namespace logext
