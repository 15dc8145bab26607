#ifndef LOGEXT_CHAIN_MODEL_HPP
#define LOGEXT_CHAIN_MODEL_HPP

#include <cstdint>
#include <optional>
#include <string_view>

namespace logext {

// One logistic instance: birth rate r*j*(1 - j/n), death rate j, on {0, ..., n}.
struct ModelParams {
  std::int64_t n = 1;
  double r = 0.0;
  double delta = 0.0;  // r - 1
  double gamma = 0.0;  // 1 - r
  double c = 0.0;      // sqrt(n) * (r - 1)
  // Present iff r > 1.
  std::optional<double> x_star;
  std::optional<std::int64_t> X_star;
  std::optional<double> V_star;
  // |gamma| < 1e-12: downstream code uses the gamma -> 0 limit forms.
  bool critical_exact = false;

  bool supercritical() const { return X_star.has_value(); }
};

// Throws InvalidArgument for n < 1 or r negative / non-finite.
ModelParams make_params(std::int64_t n, double r);

// Requires r > 1; throws NotSupercritical otherwise.
std::int64_t require_X_star(const ModelParams& params);

enum class RateKind { Logistic, BBP, ConditionedUp, ConditionedDown, PureDeath };

std::string_view to_string(RateKind kind);

struct BDRateSpec {
  RateKind kind = RateKind::Logistic;
  ModelParams params;
  // n for finite chains; -1 marks an unbounded state space (BBP).
  std::int64_t state_space_max = 0;

  static BDRateSpec logistic(const ModelParams& params);
  static BDRateSpec bbp(double r);
  static BDRateSpec pure_death(std::int64_t n);
  // h-transformed logistic chains; rates come from exact::conditioned_rates.
  static BDRateSpec conditioned(const ModelParams& params, bool toward_x_star);

  bool bounded() const { return state_space_max >= 0; }
};

struct JumpRatePair {
  double up = 0.0;
  double down = 0.0;
  double total() const { return up + down; }
};

// Logistic, BBP and PureDeath rates. Conditioned kinds need the hitting
// probabilities and are served by exact::conditioned_rates; asking here throws.
JumpRatePair rates(const BDRateSpec& spec, std::int64_t j);

enum class Phase { Subcritical, Critical, Supercritical };

std::string_view to_string(Phase phase);

struct PhaseClassification {
  Phase phase = Phase::Critical;
  double c_value = 0.0;
};

inline constexpr double kDefaultPhaseCutoff = 3.0;

// Supercritical iff c >= cutoff, subcritical iff c <= -cutoff.
PhaseClassification classify_phase(const ModelParams& params, double cutoff = kDefaultPhaseCutoff);

}  // namespace logext

#endif  // LOGEXT_CHAIN_MODEL_HPP
