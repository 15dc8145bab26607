#include "logext/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <json.hpp>

#include "logext/error.hpp"
#include "logext/exact_solver.hpp"
#include "logext/io.hpp"

namespace logext::sim {
namespace {

constexpr std::uint64_t kConditionedSalt = 0x636f6e64;  // "cond"
constexpr std::uint64_t kFirstExitSalt = 0x65786974;    // "exit"
constexpr std::uint64_t kCouplingStream = 0;

void check_x0(const JumpTable& table, std::int64_t x0) {
  if (x0 < 0 || x0 > table.max_state()) {
    throw InvalidArgument("initial state " + std::to_string(x0) + " outside [0, " +
                          std::to_string(table.max_state()) + "]");
  }
}

void check_t_cap(double t_cap) {
  if (!(t_cap > 0.0)) throw InvalidArgument("t_cap must be positive");
}

Terminal stopped_terminal(std::int64_t state) { return state == 0 ? Terminal::Absorbed0 : Terminal::AbsorbedTarget; }

}  // namespace

std::string_view to_string(Terminal terminal) {
  switch (terminal) {
    case Terminal::Absorbed0: return "Absorbed0";
    case Terminal::AbsorbedTarget: return "AbsorbedTarget";
    case Terminal::Censored: return "Censored";
  }
  return "?";
}

std::string_view to_string(Conditioning conditioning) {
  switch (conditioning) {
    case Conditioning::None: return "None";
    case Conditioning::HitsZeroFirst: return "HitsZeroFirst";
    case Conditioning::HitsXstarFirst: return "HitsXstarFirst";
  }
  return "?";
}

JumpTable JumpTable::from_spec(const BDRateSpec& spec) {
  if (spec.kind == RateKind::ConditionedUp || spec.kind == RateKind::ConditionedDown) {
    return conditioned(spec.params, spec.kind == RateKind::ConditionedUp);
  }
  JumpTable t;
  if (!spec.bounded()) {
    const double r = spec.params.r;
    t.bbp_ = true;
    t.bbp_inv_unit_ = 1.0 / (1.0 + r);
    t.bbp_up_ = r / (1.0 + r);
    return t;
  }
  t.max_state_ = spec.state_space_max;
  const auto size = static_cast<std::size_t>(t.max_state_) + 1;
  t.inv_rate_.assign(size, 0.0);
  t.up_prob_.assign(size, 0.0);
  for (std::int64_t j = 1; j <= t.max_state_; ++j) {
    const auto q = rates(spec, j);
    const double total = q.total();
    if (total > 0.0) {
      t.inv_rate_[static_cast<std::size_t>(j)] = 1.0 / total;
      t.up_prob_[static_cast<std::size_t>(j)] = q.up / total;
    }
  }
  return t;
}

JumpTable JumpTable::conditioned(const ModelParams& params, bool toward_x_star) {
  const exact::LogNuTable nu(params);
  const auto h = exact::hitting_probs(nu);
  JumpTable t;
  t.max_state_ = h.X_star;
  const auto size = static_cast<std::size_t>(h.X_star) + 1;
  t.inv_rate_.assign(size, 0.0);
  t.up_prob_.assign(size, 0.0);
  const auto target = toward_x_star ? exact::Target::Up : exact::Target::Down;
  for (std::int64_t j = 1; j < h.X_star; ++j) {
    const auto q = exact::conditioned_rates(nu, h, target, j);
    const double total = q.total();
    t.inv_rate_[static_cast<std::size_t>(j)] = 1.0 / total;
    t.up_prob_[static_cast<std::size_t>(j)] = q.up / total;
  }
  return t;
}

RunOutcome run_to_absorption(const JumpTable& table, std::int64_t x0, RngStream& rng, double t_cap,
                             std::int64_t upper_stop) {
  check_x0(table, x0);
  RunOutcome out;
  double t = 0.0;
  std::int64_t j = x0;
  for (;;) {
    if (j == upper_stop) {
      out.terminal = Terminal::AbsorbedTarget;
      break;
    }
    const double inv = table.inv_rate(j);
    if (inv == 0.0) {
      out.terminal = stopped_terminal(j);
      break;
    }
    t += -std::log(rng.uniform()) * inv;
    if (t > t_cap) {
      t = t_cap;
      out.terminal = Terminal::Censored;
      break;
    }
    j += rng.uniform() < table.up_probability(j) ? 1 : -1;
    ++out.events;
  }
  out.time = t;
  out.state = j;
  return out;
}

SamplePath simulate_path(const JumpTable& table, std::int64_t x0, RngStream& rng, double t_cap,
                         std::span<const std::int64_t> stop_set) {
  check_x0(table, x0);
  check_t_cap(t_cap);
  std::vector<std::int64_t> stops(stop_set.begin(), stop_set.end());
  std::sort(stops.begin(), stops.end());
  auto is_stop = [&](std::int64_t j) { return !stops.empty() && std::binary_search(stops.begin(), stops.end(), j); };

  SamplePath path;
  path.states.push_back(x0);
  double t = 0.0;
  std::int64_t j = x0;
  for (;;) {
    if (is_stop(j)) {
      path.terminal = j == 0 ? Terminal::Absorbed0 : Terminal::AbsorbedTarget;
      break;
    }
    const double inv = table.inv_rate(j);
    if (inv == 0.0) {
      path.terminal = stopped_terminal(j);
      break;
    }
    t += -std::log(rng.uniform()) * inv;
    if (t > t_cap) {
      t = t_cap;
      path.terminal = Terminal::Censored;
      break;
    }
    j += rng.uniform() < table.up_probability(j) ? 1 : -1;
    path.times.push_back(t);
    path.states.push_back(j);
  }
  path.end_time = t;
  return path;
}

SamplePath simulate_path(const BDRateSpec& spec, std::int64_t x0, std::uint64_t seed, double t_cap,
                         std::span<const std::int64_t> stop_set) {
  RngStream rng(seed, 0);
  return simulate_path(JumpTable::from_spec(spec), x0, rng, t_cap, stop_set);
}

namespace {

ExtinctionSamples collect(const JumpTable& table, std::int64_t x0, std::size_t replicates, std::uint64_t stream_key,
                          double t_cap, const ExecutionOptions& exec, std::int64_t upper_stop, SampleMeta meta) {
  if (replicates < 1) throw InvalidArgument("replicates must be >= 1");
  check_x0(table, x0);
  check_t_cap(t_cap);
  std::vector<double> times(replicates);
  std::vector<char> censored(replicates, 0);
  parallel_for(replicates, exec, [&](std::size_t i) {
    RngStream rng(stream_key, i);
    const auto outcome = run_to_absorption(table, x0, rng, t_cap, upper_stop);
    times[i] = outcome.time;
    censored[i] = outcome.terminal == Terminal::Censored;
  });
  ExtinctionSamples out;
  out.meta = meta;
  out.meta.x0 = x0;
  out.meta.replicates = replicates;
  out.meta.t_cap = t_cap;
  out.values.reserve(replicates);
  for (std::size_t i = 0; i < replicates; ++i) {
    if (censored[i]) {
      ++out.meta.censored_count;
    } else {
      out.values.push_back(times[i]);
    }
  }
  return out;
}

}  // namespace

ExtinctionSamples sample_extinction(const BDRateSpec& spec, std::int64_t x0, std::size_t replicates,
                                    std::uint64_t seed, double t_cap, const ExecutionOptions& exec) {
  SampleMeta meta;
  meta.kind = spec.kind;
  meta.params = spec.params;
  meta.seed = seed;
  return collect(JumpTable::from_spec(spec), x0, replicates, seed, t_cap, exec,
                 std::numeric_limits<std::int64_t>::max(), meta);
}

ExtinctionSamples sample_conditioned(const ModelParams& params, std::int64_t x0, Conditioning target,
                                     std::size_t replicates, std::uint64_t seed, double t_cap,
                                     const ExecutionOptions& exec) {
  if (target == Conditioning::None) throw InvalidArgument("sample_conditioned needs a conditioning target");
  const std::int64_t x_star = require_X_star(params);
  const bool up = target == Conditioning::HitsXstarFirst;
  if (x0 < 0 || x0 > x_star) {
    throw InvalidArgument("conditioned sampling needs 0 <= x0 <= X_star, got x0 = " + std::to_string(x0));
  }
  if ((up && x0 == 0) || (!up && x0 == x_star)) {
    throw NullConditioning("conditioning event has probability 0 from x0 = " + std::to_string(x0));
  }
  SampleMeta meta;
  meta.kind = up ? RateKind::ConditionedUp : RateKind::ConditionedDown;
  meta.params = params;
  meta.conditioning = target;
  meta.seed = seed;
  return collect(JumpTable::conditioned(params, up), x0, replicates, mix_seed(seed, kConditionedSalt), t_cap, exec,
                 std::numeric_limits<std::int64_t>::max(), meta);
}

double FirstExitSamples::zero_first_fraction() const {
  const std::size_t decided = zero_first.size() + xstar_first.size();
  return decided == 0 ? 0.0 : static_cast<double>(zero_first.size()) / static_cast<double>(decided);
}

double FirstExitSamples::zero_first_se() const {
  const std::size_t decided = zero_first.size() + xstar_first.size();
  if (decided == 0) return 0.0;
  const double p = zero_first_fraction();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(decided));
}

FirstExitSamples sample_first_exit(const ModelParams& params, std::int64_t x0, std::size_t replicates,
                                   std::uint64_t seed, double t_cap, const ExecutionOptions& exec) {
  const std::int64_t x_star = require_X_star(params);
  if (x0 <= 0 || x0 >= x_star) {
    throw InvalidArgument("first-exit sampling needs 0 < x0 < X_star = " + std::to_string(x_star));
  }
  if (replicates < 1) throw InvalidArgument("replicates must be >= 1");
  check_t_cap(t_cap);
  const auto table = JumpTable::from_spec(BDRateSpec::logistic(params));
  const std::uint64_t key = mix_seed(seed, kFirstExitSalt);
  std::vector<RunOutcome> outcomes(replicates);
  parallel_for(replicates, exec, [&](std::size_t i) {
    RngStream rng(key, i);
    outcomes[i] = run_to_absorption(table, x0, rng, t_cap, x_star);
  });
  FirstExitSamples out;
  out.replicates = replicates;
  out.seed = seed;
  for (const auto& o : outcomes) {
    switch (o.terminal) {
      case Terminal::Absorbed0: out.zero_first.push_back(o.time); break;
      case Terminal::AbsorbedTarget: out.xstar_first.push_back(o.time); break;
      case Terminal::Censored: ++out.censored_count; break;
    }
  }
  return out;
}

std::vector<SamplePath> simulate_coupled(std::span<const BDRateSpec> specs,
                                         std::span<const std::int64_t> initial_states, std::uint64_t seed,
                                         double t_cap) {
  if (specs.size() != initial_states.size()) throw InvalidArgument("one rate spec per initial state required");
  if (!std::is_sorted(initial_states.begin(), initial_states.end())) {
    throw InvalidArgument("coupled initial states must be sorted ascending");
  }
  check_t_cap(t_cap);
  const std::size_t m = initial_states.size();
  std::vector<SamplePath> paths(m);
  std::vector<std::int64_t> state(initial_states.begin(), initial_states.end());
  for (std::size_t i = 0; i < m; ++i) {
    if (specs[i].bounded() && (state[i] < 0 || state[i] > specs[i].state_space_max)) {
      throw InvalidArgument("initial state outside the state space");
    }
    paths[i].states.push_back(state[i]);
  }

  struct Level {
    std::int64_t x;
    double up_max;
    double down_max;
  };
  std::vector<Level> levels;
  std::vector<JumpRatePair> q(m);
  RngStream rng(seed, kCouplingStream);
  double t = 0.0;
  bool censored = false;
  for (;;) {
    for (std::size_t i = 0; i < m; ++i) q[i] = rates(specs[i], state[i]);
    // Occupied states in ascending order, each with the largest rates present there.
    levels.clear();
    for (std::size_t i = 0; i < m; ++i) {
      auto it = std::find_if(levels.begin(), levels.end(), [&](const Level& l) { return l.x == state[i]; });
      if (it == levels.end()) {
        levels.push_back({state[i], q[i].up, q[i].down});
      } else {
        it->up_max = std::max(it->up_max, q[i].up);
        it->down_max = std::max(it->down_max, q[i].down);
      }
    }
    std::sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) { return a.x < b.x; });
    double total = 0.0;
    for (const auto& l : levels) total += l.up_max + l.down_max;
    if (total == 0.0) break;

    t += rng.exponential(total);
    if (t > t_cap) {
      censored = true;
      break;
    }
    double u = rng.uniform() * total;
    const Level* chosen = &levels.back();
    for (const auto& l : levels) {
      const double width = l.up_max + l.down_max;
      if (u < width) {
        chosen = &l;
        break;
      }
      u -= width;
    }
    const bool up = u < chosen->up_max;
    const double level = up ? u : u - chosen->up_max;
    for (std::size_t i = 0; i < m; ++i) {
      if (state[i] != chosen->x) continue;
      if (level < (up ? q[i].up : q[i].down)) {
        state[i] += up ? 1 : -1;
        paths[i].times.push_back(t);
        paths[i].states.push_back(state[i]);
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (censored && rates(specs[i], state[i]).total() > 0.0) {
      paths[i].terminal = Terminal::Censored;
      paths[i].end_time = t_cap;
    } else {
      paths[i].terminal = stopped_terminal(state[i]);
      paths[i].end_time = paths[i].times.empty() ? 0.0 : paths[i].times.back();
    }
  }
  return paths;
}

std::vector<SamplePath> simulate_coupled(const ModelParams& params, std::span<const std::int64_t> initial_states,
                                         std::uint64_t seed, double t_cap) {
  const std::vector<BDRateSpec> specs(initial_states.size(), BDRateSpec::logistic(params));
  return simulate_coupled(specs, initial_states, seed, t_cap);
}

std::int64_t state_at(const SamplePath& path, double t) {
  const auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
  return path.states[static_cast<std::size_t>(it - path.times.begin())];
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
  out << "time,state\n";
  out << "0," << path.states.front() << '\n';
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    out << format_double(path.times[k]) << ',' << path.states[k + 1] << '\n';
  }
}

void write_samples_csv(std::ostream& out, const ExtinctionSamples& samples) {
  out << "value\n";
  for (double v : samples.values) out << format_double(v) << '\n';
}

std::string samples_sidecar_json(const ExtinctionSamples& samples) {
  const auto& m = samples.meta;
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(m.kind));
  j["n"] = m.kind == RateKind::BBP ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(m.params.n);
  j["r"] = m.params.r;
  j["x0"] = m.x0;
  j["conditioning"] = std::string(to_string(m.conditioning));
  j["seed"] = m.seed;
  j["replicates"] = m.replicates;
  j["censored"] = m.censored_count;
  j["t_cap"] = m.t_cap;
  j["values"] = samples.values.size();
  return j.dump(2) + "\n";
}

}  // namespace logext::sim
