#include "logext/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "logext/error.hpp"
#include "logext/io.hpp"
#include "logext/simulator.hpp"

namespace logext::diffusion {
namespace {

constexpr std::uint64_t kOuSalt = 0x6f75;  // "ou"

void require_absorbing(const DiffusionSpec& spec) {
  if (spec.kind == Kind::OU) throw InvalidArgument("OU diffusion has no absorbing boundary");
  if (spec.infinite_start) throw InvalidArgument("infinite start: call infinite_entrance_start first");
}

}  // namespace

DiffusionSpec DiffusionSpec::critical(double c_inf, double y0, double dt, double t_cap) {
  DiffusionSpec s{Kind::CriticalLogistic, c_inf, y0, false, dt, t_cap};
  s.validate();
  return s;
}

DiffusionSpec DiffusionSpec::critical_from_infinity(double c_inf, double dt, double t_cap) {
  DiffusionSpec s{Kind::CriticalLogistic, c_inf, 0.0, true, dt, t_cap};
  s.validate();
  return s;
}

DiffusionSpec DiffusionSpec::feller(double a_inf, double y0, double dt, double t_cap) {
  DiffusionSpec s{Kind::Feller, a_inf, y0, false, dt, t_cap};
  s.validate();
  return s;
}

DiffusionSpec DiffusionSpec::ou(double r, double w0, double dt, double t_cap) {
  DiffusionSpec s{Kind::OU, r, w0, false, dt, t_cap};
  s.validate();
  return s;
}

double DiffusionSpec::drift(double y) const {
  switch (kind) {
    case Kind::CriticalLogistic: return y * (param - y);
    case Kind::Feller: return -param * y;
    case Kind::OU: return -y;
  }
  return 0.0;
}

double DiffusionSpec::variance_rate(double y) const {
  switch (kind) {
    case Kind::CriticalLogistic:
    case Kind::Feller: return 2.0 * y;
    case Kind::OU: return 2.0 / param;
  }
  return 0.0;
}

void DiffusionSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (!(t_cap > 0.0)) throw InvalidArgument("t_cap must be positive");
  if (!std::isfinite(param)) throw InvalidArgument("diffusion parameter must be finite");
  if (kind == Kind::Feller && param < 0.0) throw InvalidArgument("Feller a_inf must be >= 0");
  if (kind == Kind::OU && !(param > 0.0)) throw InvalidArgument("OU needs r > 0");
  if (kind != Kind::OU && !infinite_start && !(y0 >= 0.0 && std::isfinite(y0))) {
    throw InvalidArgument("y0 must be finite and >= 0");
  }
}

HittingTime simulate_hitting_time(const DiffusionSpec& spec, RngStream& rng) {
  spec.validate();
  require_absorbing(spec);
  double y = spec.y0;
  if (y <= 0.0) return {0.0, false};
  const double dt = spec.dt;
  const double sqrt_dt = std::sqrt(dt);
  const auto max_steps = static_cast<std::uint64_t>(std::ceil(spec.t_cap / dt));
  for (std::uint64_t k = 0; k < max_steps; ++k) {
    y += spec.drift(y) * dt + std::sqrt(spec.variance_rate(y)) * sqrt_dt * rng.normal();
    if (y <= 0.0) return {static_cast<double>(k) * dt, false};
  }
  return {spec.t_cap, true};
}

HittingTime simulate_hitting_time(const DiffusionSpec& spec, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return simulate_hitting_time(spec, rng);
}

DiffusionSpec infinite_entrance_start(const DiffusionSpec& spec, double y_start_proxy) {
  if (spec.kind != Kind::CriticalLogistic) throw InvalidArgument("infinite entrance only applies to the critical SDE");
  if (!(y_start_proxy > 0.0) || !std::isfinite(y_start_proxy)) throw InvalidArgument("proxy must be positive");
  if (spec.param > 0.0 && y_start_proxy < 10.0 * std::max(1.0, spec.param)) {
    throw InvalidArgument("entrance proxy " + format_double(y_start_proxy) + " too small for c_inf = " +
                          format_double(spec.param));
  }
  DiffusionSpec out = spec;
  out.infinite_start = false;
  out.y0 = y_start_proxy;
  return out;
}

HittingSamples sample_hitting_times(const DiffusionSpec& spec, std::size_t replicates, std::uint64_t seed,
                                    const ExecutionOptions& exec) {
  spec.validate();
  require_absorbing(spec);
  if (replicates < 1) throw InvalidArgument("replicates must be >= 1");
  std::vector<HittingTime> raw(replicates);
  parallel_for(replicates, exec, [&](std::size_t i) {
    RngStream rng(seed, i);
    raw[i] = simulate_hitting_time(spec, rng);
  });
  HittingSamples out;
  out.replicates = replicates;
  out.seed = seed;
  out.values.reserve(replicates);
  for (const auto& h : raw) {
    if (h.censored) {
      ++out.censored_count;
    } else {
      out.values.push_back(h.time);
    }
  }
  return out;
}

std::vector<HittingTime> coupled_hitting_times(const DiffusionSpec& spec, std::span<const double> y0s,
                                               std::uint64_t seed) {
  spec.validate();
  require_absorbing(spec);
  if (!std::is_sorted(y0s.begin(), y0s.end())) throw InvalidArgument("coupled starts must be sorted ascending");
  const std::size_t m = y0s.size();
  std::vector<double> y(y0s.begin(), y0s.end());
  std::vector<HittingTime> out(m);
  std::vector<char> alive(m);
  std::size_t live = 0;
  for (std::size_t i = 0; i < m; ++i) {
    alive[i] = y[i] > 0.0;
    live += alive[i];
  }
  RngStream rng(seed, 0);
  const double dt = spec.dt;
  const double sqrt_dt = std::sqrt(dt);
  const auto max_steps = static_cast<std::uint64_t>(std::ceil(spec.t_cap / dt));
  for (std::uint64_t k = 0; k < max_steps && live > 0; ++k) {
    const double z = rng.normal();
    const double t = static_cast<double>(k) * dt;
    for (std::size_t i = 0; i < m; ++i) {
      if (!alive[i]) continue;
      y[i] += spec.drift(y[i]) * dt + std::sqrt(spec.variance_rate(y[i])) * sqrt_dt * z;
    }
    for (std::size_t i = m; i-- > 0;) {
      if (!alive[i]) continue;
      const bool above_dead = i + 1 < m && !alive[i + 1];
      if (i + 1 < m && alive[i + 1] && y[i] > y[i + 1]) y[i] = y[i + 1];
      if (y[i] <= 0.0 || above_dead) {
        alive[i] = 0;
        --live;
        out[i] = {t, false};
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (alive[i]) out[i] = {spec.t_cap, true};
  }
  return out;
}

TabulatedCdf::TabulatedCdf(std::vector<double> values, std::size_t censored, std::size_t grid_points)
    : sorted_(std::move(values)), total_(sorted_.size() + censored) {
  if (total_ == 0) throw InvalidArgument("empty sample");
  if (grid_points < 2) throw InvalidArgument("grid needs at least two points");
  std::sort(sorted_.begin(), sorted_.end());
  double top = quantile(0.995);
  if (!std::isfinite(top)) top = sorted_.empty() ? 1.0 : sorted_.back();
  if (!(top > 0.0)) top = 1.0;
  grid_.resize(grid_points);
  for (std::size_t k = 0; k < grid_points; ++k) {
    grid_[k] = top * static_cast<double>(k) / static_cast<double>(grid_points - 1);
  }
}

double TabulatedCdf::operator()(double t) const {
  if (total_ == 0) return 0.0;
  const auto below = std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin();
  return static_cast<double>(below) / static_cast<double>(total_);
}

double TabulatedCdf::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(total_)));
  if (rank == 0) return sorted_.empty() ? 0.0 : sorted_.front();
  if (rank > sorted_.size()) return std::numeric_limits<double>::infinity();
  return sorted_[rank - 1];
}

void TabulatedCdf::write_csv(std::ostream& out) const {
  out << "t,F\n";
  for (double t : grid_) out << format_double(t) << ',' << format_double((*this)(t)) << '\n';
}

TabulatedCdf hitting_cdf_numeric(const DiffusionSpec& spec, std::size_t replicates, std::uint64_t seed,
                                 const ExecutionOptions& exec) {
  if (replicates < 1000) throw InvalidArgument("hitting_cdf_numeric needs at least 1000 replicates");
  auto samples = sample_hitting_times(spec, replicates, seed, exec);
  if (static_cast<double>(samples.censored_count) > 0.01 * static_cast<double>(replicates)) {
    throw ExcessiveCensoring(std::to_string(samples.censored_count) + " of " + std::to_string(replicates) +
                             " runs censored at t_cap = " + format_double(spec.t_cap) + "; raise t_cap");
  }
  return TabulatedCdf(std::move(samples.values), samples.censored_count);
}

OuReport ou_fluctuation_check(const ModelParams& params, double horizon, std::size_t replicates, std::uint64_t seed,
                              const ExecutionOptions& exec, double lag, double sample_dt, double burn_in) {
  const std::int64_t x_star = require_X_star(params);
  const double nv = static_cast<double>(params.n) * params.V_star.value();
  if (nv < 4.0) {
    throw RegimeViolation("metastability too weak for a stationary window: n V_star = " + format_double(nv) +
                          " < 4");
  }
  if (!(horizon > 0.0) || !(sample_dt > 0.0) || !(lag > 0.0) || burn_in < 0.0) {
    throw InvalidArgument("horizon, sample_dt and lag must be positive, burn_in nonnegative");
  }
  if (replicates < 2) throw InvalidArgument("ou_fluctuation_check needs at least 2 replicates");
  const auto samples = static_cast<std::size_t>(std::floor(horizon / sample_dt)) + 1;
  const auto lag_steps = static_cast<std::size_t>(std::llround(lag / sample_dt));
  if (lag_steps == 0 || lag_steps >= samples) throw InvalidArgument("lag must fit inside the horizon");

  const double n = static_cast<double>(params.n);
  const double sqrt_n = std::sqrt(n);
  const double centre = n * params.x_star.value();
  const double delta = params.delta;
  const auto table = sim::JumpTable::from_spec(BDRateSpec::logistic(params));
  const std::uint64_t key = mix_seed(seed, kOuSalt);

  std::vector<std::vector<double>> w(replicates, std::vector<double>(samples));
  parallel_for(replicates, exec, [&](std::size_t rep) {
    RngStream rng(key, rep);
    auto& out = w[rep];
    double t = 0.0;
    std::int64_t j = x_star;
    std::size_t k = 0;
    auto grid_time = [&](std::size_t idx) { return (burn_in + sample_dt * static_cast<double>(idx)) / delta; };
    while (k < samples) {
      const double inv = table.inv_rate(j);
      const double next = inv == 0.0 ? std::numeric_limits<double>::infinity()
                                     : t - std::log(rng.uniform()) * inv;
      while (k < samples && grid_time(k) < next) out[k++] = (static_cast<double>(j) - centre) / sqrt_n;
      if (k == samples) break;
      j += rng.uniform() < table.up_probability(j) ? 1 : -1;
      t = next;
    }
  });

  OuReport rep;
  rep.lag = lag;
  rep.replicates = replicates;
  rep.samples_per_replicate = samples;
  rep.variance_target = 1.0 / params.r;
  rep.autocorrelation_target = std::exp(-lag);

  const double R = static_cast<double>(replicates);
  std::vector<double> means(replicates), var_i(replicates), corr_i(replicates);
  double grand_mean = 0.0, grand_m2 = 0.0, grand_lag = 0.0;
  for (std::size_t i = 0; i < replicates; ++i) {
    double s = 0.0, s2 = 0.0, sl = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      s += w[i][k];
      s2 += w[i][k] * w[i][k];
      if (k + lag_steps < samples) sl += w[i][k] * w[i][k + lag_steps];
    }
    const double m = s / static_cast<double>(samples);
    const double m2 = s2 / static_cast<double>(samples);
    const double ml = sl / static_cast<double>(samples - lag_steps);
    means[i] = m;
    var_i[i] = m2 - m * m;
    corr_i[i] = (ml - m * m) / var_i[i];
    grand_mean += m / R;
    grand_m2 += m2 / R;
    grand_lag += ml / R;
  }
  rep.variance = grand_m2 - grand_mean * grand_mean;
  rep.autocorrelation = (grand_lag - grand_mean * grand_mean) / rep.variance;
  auto spread = [&](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x / R;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (R - 1.0) / R);
  };
  rep.variance_se = spread(var_i);
  rep.autocorrelation_se = spread(corr_i);

  // SE from the pooled window variance; per-point estimates from a handful of replicates are too noisy.
  const double se = std::sqrt(rep.variance / R);
  for (std::size_t k = 0; k < samples; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < replicates; ++i) s += w[i][k];
    rep.max_abs_mean_z = std::max(rep.max_abs_mean_z, std::fabs(s / R) / se);
  }
  return rep;
}

}  // namespace logext::diffusion
