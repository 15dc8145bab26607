#ifndef LOGEXT_SIMULATOR_HPP
#define LOGEXT_SIMULATOR_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logext/chain_model.hpp"
#include "logext/parallel.hpp"
#include "logext/rng.hpp"

namespace logext::sim {

inline constexpr double kDefaultTCap = 1e6;

enum class Terminal { Absorbed0, AbsorbedTarget, Censored };
std::string_view to_string(Terminal terminal);

struct SamplePath {
  std::vector<double> times;          // event times, strictly increasing
  std::vector<std::int64_t> states;   // states[0] is the initial state
  Terminal terminal = Terminal::Absorbed0;
  double end_time = 0.0;              // absorption time, or t_cap when censored

  std::int64_t final_state() const { return states.back(); }
};

enum class Conditioning { None, HitsZeroFirst, HitsXstarFirst };
std::string_view to_string(Conditioning conditioning);

struct SampleMeta {
  RateKind kind = RateKind::Logistic;
  ModelParams params;
  std::int64_t x0 = 0;
  Conditioning conditioning = Conditioning::None;
  std::uint64_t seed = 0;
  std::size_t replicates = 0;
  std::size_t censored_count = 0;
  double t_cap = kDefaultTCap;
};

// values holds the uncensored times in replicate order.
struct ExtinctionSamples {
  std::vector<double> values;
  SampleMeta meta;
};

// Rates in the form the event loop wants: 1 / q(j) and q_+(j) / q(j), tabulated
// for bounded chains and computed on the fly for the bbp.
class JumpTable {
 public:
  static JumpTable from_spec(const BDRateSpec& spec);
  // h-transformed logistic chain on {0, ..., X_star}.
  static JumpTable conditioned(const ModelParams& params, bool toward_x_star);

  double inv_rate(std::int64_t j) const {
    if (bbp_) return j == 0 ? 0.0 : bbp_inv_unit_ / static_cast<double>(j);
    return inv_rate_[static_cast<std::size_t>(j)];
  }
  double up_probability(std::int64_t j) const {
    if (bbp_) return bbp_up_;
    return up_prob_[static_cast<std::size_t>(j)];
  }
  // Largest state for bounded tables, max int64 for the bbp.
  std::int64_t max_state() const { return bbp_ ? std::numeric_limits<std::int64_t>::max() : max_state_; }

 private:
  bool bbp_ = false;
  double bbp_inv_unit_ = 0.0;
  double bbp_up_ = 0.0;
  std::int64_t max_state_ = 0;
  std::vector<double> inv_rate_;  // 0 at absorbing states
  std::vector<double> up_prob_;
};

struct RunOutcome {
  double time = 0.0;
  std::int64_t state = 0;
  Terminal terminal = Terminal::Absorbed0;
  std::uint64_t events = 0;
};

// Event loop without path storage. Stops at a zero-rate state, at upper_stop, or at t_cap.
RunOutcome run_to_absorption(const JumpTable& table, std::int64_t x0, RngStream& rng, double t_cap,
                             std::int64_t upper_stop = std::numeric_limits<std::int64_t>::max());

// Exact path. Stops at absorption, on entering any state of stop_set (AbsorbedTarget), or at t_cap.
SamplePath simulate_path(const BDRateSpec& spec, std::int64_t x0, std::uint64_t seed, double t_cap = kDefaultTCap,
                         std::span<const std::int64_t> stop_set = {});
SamplePath simulate_path(const JumpTable& table, std::int64_t x0, RngStream& rng, double t_cap,
                         std::span<const std::int64_t> stop_set = {});

// Extinction times of independent replicates; replicate i uses stream i under seed.
ExtinctionSamples sample_extinction(const BDRateSpec& spec, std::int64_t x0, std::size_t replicates,
                                    std::uint64_t seed, double t_cap = kDefaultTCap,
                                    const ExecutionOptions& exec = {});

// Hitting times of 0 (HitsZeroFirst) or X_star (HitsXstarFirst) under the h-transformed chain.
// Requires r > 1 and 0 < x0 < X_star.
ExtinctionSamples sample_conditioned(const ModelParams& params, std::int64_t x0, Conditioning target,
                                     std::size_t replicates, std::uint64_t seed, double t_cap = kDefaultTCap,
                                     const ExecutionOptions& exec = {});

// Unconditioned runs stopped at 0 or X_star; times split by which end was hit first.
// The zero-first times are the rejection sampler for HitsZeroFirst.
struct FirstExitSamples {
  std::vector<double> zero_first;
  std::vector<double> xstar_first;
  std::size_t replicates = 0;
  std::size_t censored_count = 0;
  std::uint64_t seed = 0;

  double zero_first_fraction() const;
  // Binomial standard error of zero_first_fraction.
  double zero_first_se() const;
};

FirstExitSamples sample_first_exit(const ModelParams& params, std::int64_t x0, std::size_t replicates,
                                   std::uint64_t seed, double t_cap = kDefaultTCap,
                                   const ExecutionOptions& exec = {});

// Natural coupling of several chains started from sorted initial states. Chains
// at a common state share their jump events: a uniform level v on [0, max rate)
// moves every chain whose birth (death) rate exceeds v, which is the ranked
// increment construction with equal rates tied. Chains at distinct states jump
// at distinct times, so ordering is preserved and merged chains stay merged.
std::vector<SamplePath> simulate_coupled(std::span<const BDRateSpec> specs,
                                         std::span<const std::int64_t> initial_states, std::uint64_t seed,
                                         double t_cap = kDefaultTCap);
std::vector<SamplePath> simulate_coupled(const ModelParams& params, std::span<const std::int64_t> initial_states,
                                         std::uint64_t seed, double t_cap = kDefaultTCap);

// State of a path at time t (right-continuous).
std::int64_t state_at(const SamplePath& path, double t);

// CSV "time,state", one row per state including the initial one.
void write_path_csv(std::ostream& out, const SamplePath& path);
// CSV with header "value" and one sample per line.
void write_samples_csv(std::ostream& out, const ExtinctionSamples& samples);
// JSON metadata for a samples file.
std::string samples_sidecar_json(const ExtinctionSamples& samples);

}  // namespace logext::sim

#endif  // LOGEXT_SIMULATOR_HPP
