#include "logext/exact_solver.hpp"

#include <cmath>
#include <string>

#include "logext/error.hpp"
#include "logext/log_math.hpp"

namespace logext::exact {
namespace {

double log_up_rate(const ModelParams& p, std::int64_t j) {
  const double x = static_cast<double>(j);
  return std::log(p.r) + std::log(x) + std::log1p(-x / static_cast<double>(p.n));
}

double log_down_rate(std::int64_t j) { return std::log(static_cast<double>(j)); }

void check_state(const LogNuTable& table, std::int64_t j, std::int64_t lo, std::int64_t hi, const char* what) {
  if (j < lo || j > hi) {
    throw InvalidArgument(std::string(what) + ": state " + std::to_string(j) + " outside [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "] for n = " + std::to_string(table.n()));
  }
}

std::int64_t require_window(const ModelParams& params, std::int64_t minimum, const char* what) {
  const std::int64_t x_star = require_X_star(params);
  if (x_star < minimum) {
    throw WindowTooSmall(std::string(what) + " needs X_star >= " + std::to_string(minimum) + ", got X_star = " +
                         std::to_string(x_star) + " (n = " + std::to_string(params.n) + ", r = " +
                         std::to_string(params.r) + ")");
  }
  return x_star;
}

// log of the h-ratio h(j + step) / h(j); -inf when h(j + step) == 0.
double log_h_ratio(const std::vector<double>& log_h, std::int64_t j, int step) {
  const double num = log_h[static_cast<std::size_t>(j + step)];
  const double den = log_h[static_cast<std::size_t>(j)];
  if (den == kNegInf) throw NullConditioning("conditioning on a null event: h(" + std::to_string(j) + ") = 0");
  if (num == kNegInf) return kNegInf;
  return num - den;
}

const std::vector<double>& log_h_for(const HittingProbabilities& h, Target target) {
  return target == Target::Up ? h.log_h_plus : h.log_h_minus;
}

}  // namespace

LogNuTable::LogNuTable(const ModelParams& params) : params_(params) {
  if (!(params.r > 0.0)) throw InvalidArgument("log nu table needs r > 0 (q_- / q_+ is infinite at r = 0)");
  const auto n = params.n;
  prefix_.resize(static_cast<std::size_t>(n));
  cumulative_.resize(static_cast<std::size_t>(n) + 1);

  // log(q_-(k) / q_+(k)) = -log r - log(1 - k/n)
  const double log_r = std::log(params.r);
  CompensatedSum running;
  prefix_[0] = 0.0;
  for (std::int64_t k = 1; k < n; ++k) {
    running.add(-log_r - std::log1p(-static_cast<double>(k) / static_cast<double>(n)));
    prefix_[static_cast<std::size_t>(k)] = running.value();
  }

  LogAccumulator acc;
  cumulative_[0] = kNegInf;
  for (std::int64_t m = 1; m <= n; ++m) {
    acc.add(prefix_[static_cast<std::size_t>(m - 1)]);
    cumulative_[static_cast<std::size_t>(m)] = acc.value();
  }
}

double LogNuTable::log_nu(std::int64_t j, std::int64_t k) const {
  if (j < 0 || k < 0 || j >= n() || k >= n()) {
    throw InvalidArgument("log_nu indices must lie in [0, n-1]; got (" + std::to_string(j) + ", " +
                          std::to_string(k) + ")");
  }
  return prefix_[static_cast<std::size_t>(k)] - prefix_[static_cast<std::size_t>(j)];
}

double LogNuTable::log_cumulative(std::int64_t m) const {
  if (m < 0 || m > n()) throw InvalidArgument("log_cumulative index out of range");
  return cumulative_[static_cast<std::size_t>(m)];
}

LogNuTable build_log_nu(const ModelParams& params) { return LogNuTable(params); }

double potential_V(const ModelParams& params, double x) {
  if (!(x >= 0.0) || !(x < 1.0)) throw InvalidArgument("potential_V needs 0 <= x < 1");
  if (x == 0.0) return 0.0;
  return x * (std::log(params.r) - 1.0) - (1.0 - x) * std::log1p(-x);
}

namespace {
// V extended continuously to x = 1, used only by the Lemma-style upper bound.
double potential_V_closed(const ModelParams& params, double x) {
  if (x >= 1.0) return std::log(params.r) - 1.0;
  return potential_V(params, x);
}
}  // namespace

PotentialEstimate nu_estimate(const ModelParams& params, double a, double b) {
  const double n = static_cast<double>(params.n);
  const double ja = std::round(a * n);
  const double jb = std::round(b * n);
  if (!(ja >= 0.0) || !(jb > ja)) throw InvalidArgument("nu_estimate needs 0 <= a < b on the 1/n grid");
  if (!(jb < n)) throw InvalidArgument("nu_estimate needs b < 1");
  if (!(params.r > 0.0)) throw InvalidArgument("nu_estimate needs r > 0");

  PotentialEstimate est;
  est.a = ja / n;
  est.b = jb / n;
  const double step = 1.0 / n;
  est.log_nu_upper =
      -n * (potential_V_closed(params, est.b + step) - potential_V_closed(params, est.a + step));
  est.log_nu_central = 0.5 * (std::log1p(-est.a) - std::log1p(-est.b)) -
                       n * (potential_V(params, est.b) - potential_V(params, est.a));
  const double one_minus_b = 1.0 - est.b;
  est.log_error_bound = 1.0 / (12.0 * n * one_minus_b * one_minus_b * (est.b - est.a));
  return est;
}

HittingProbabilities hitting_probs(const LogNuTable& table) {
  const std::int64_t x_star = require_window(table.params(), 1, "hitting_probs");
  const auto size = static_cast<std::size_t>(x_star) + 1;
  HittingProbabilities h;
  h.X_star = x_star;
  h.log_h_plus.resize(size);
  h.log_h_minus.resize(size);
  h.h_plus.resize(size);
  h.h_minus.resize(size);

  const double log_total = table.log_cumulative(x_star);
  for (std::int64_t j = 0; j <= x_star; ++j) {
    h.log_h_plus[static_cast<std::size_t>(j)] = j == x_star ? 0.0 : table.log_cumulative(j) - log_total;
  }
  // Suffix sums accumulated from the top so small h_minus values are not
  // obtained by cancellation.
  LogAccumulator suffix;
  h.log_h_minus[static_cast<std::size_t>(x_star)] = kNegInf;
  for (std::int64_t j = x_star - 1; j >= 0; --j) {
    suffix.add(table.prefix()[static_cast<std::size_t>(j)]);
    h.log_h_minus[static_cast<std::size_t>(j)] = j == 0 ? 0.0 : suffix.value() - log_total;
  }
  for (std::size_t j = 0; j < size; ++j) {
    h.h_plus[j] = std::exp(h.log_h_plus[j]);
    h.h_minus[j] = std::exp(h.log_h_minus[j]);
  }
  return h;
}

JumpRatePair conditioned_rates(const LogNuTable& table, const HittingProbabilities& h, Target target,
                               std::int64_t j) {
  check_state(table, j, 1, h.X_star - 1, "conditioned_rates");
  const auto& log_h = log_h_for(h, target);
  const double up_ratio = log_h_ratio(log_h, j, +1);
  const double down_ratio = log_h_ratio(log_h, j, -1);
  const ModelParams& p = table.params();
  JumpRatePair out;
  out.up = up_ratio == kNegInf ? 0.0 : std::exp(log_up_rate(p, j) + up_ratio);
  out.down = down_ratio == kNegInf ? 0.0 : std::exp(log_down_rate(j) + down_ratio);
  return out;
}

JumpRatePair conditioned_rates(const LogNuTable& table, Target target, std::int64_t j) {
  return conditioned_rates(table, hitting_probs(table), target, j);
}

double crossing_up_star(const LogNuTable& table, const HittingProbabilities& h, std::int64_t j) {
  check_state(table, j, 1, h.X_star - 1, "crossing_up_star");
  const ModelParams& p = table.params();
  const auto& lh = h.log_h_plus;
  const auto prefix = table.prefix();
  // S_+*(j) = q_-(j) / q_+*(j) * sum_{i=1}^{j} nu(i, j-1) (h_+(i)/h_+(j))^2 / q_+(i)
  LogAccumulator sum;
  const double log_hj = lh[static_cast<std::size_t>(j)];
  const double prefix_jm1 = prefix[static_cast<std::size_t>(j - 1)];
  for (std::int64_t i = 1; i <= j; ++i) {
    sum.add(prefix_jm1 - prefix[static_cast<std::size_t>(i)] + 2.0 * (lh[static_cast<std::size_t>(i)] - log_hj) -
            log_up_rate(p, i));
  }
  const double log_q_up_star = log_up_rate(p, j) + log_h_ratio(lh, j, +1);
  return std::exp(log_down_rate(j) - log_q_up_star + sum.value());
}

double crossing_up_star(const LogNuTable& table, std::int64_t j) {
  return crossing_up_star(table, hitting_probs(table), j);
}

double log_crossing_down(const LogNuTable& table, std::int64_t j) {
  const std::int64_t n = table.n();
  check_state(table, j, 1, n, "crossing_down");
  if (j == n) return -std::log(static_cast<double>(n));
  // S_-(j) = q_+(j)/q_-(j) * sum_{i=j}^{n} nu(i-1, j) / q_-(i)
  const auto prefix = table.prefix();
  const double prefix_j = prefix[static_cast<std::size_t>(j)];
  LogAccumulator sum;
  for (std::int64_t i = j; i <= n; ++i) {
    sum.add(prefix_j - prefix[static_cast<std::size_t>(i - 1)] - log_down_rate(i));
  }
  return log_up_rate(table.params(), j) - log_down_rate(j) + sum.value();
}

double crossing_down(const LogNuTable& table, std::int64_t j) { return std::exp(log_crossing_down(table, j)); }

std::vector<double> log_crossing_down_all(const LogNuTable& table) {
  const std::int64_t n = table.n();
  const auto prefix = table.prefix();
  std::vector<double> out(static_cast<std::size_t>(n) + 1, kNegInf);
  out[static_cast<std::size_t>(n)] = -std::log(static_cast<double>(n));
  // Same sum as log_crossing_down with prefix[j] factored out of a suffix accumulation.
  LogAccumulator suffix;
  suffix.add(-prefix[static_cast<std::size_t>(n - 1)] - log_down_rate(n));
  for (std::int64_t j = n - 1; j >= 1; --j) {
    suffix.add(-prefix[static_cast<std::size_t>(j - 1)] - log_down_rate(j));
    out[static_cast<std::size_t>(j)] = log_up_rate(table.params(), j) - log_down_rate(j) +
                                       prefix[static_cast<std::size_t>(j)] + suffix.value();
  }
  return out;
}

double crossing_down_conditioned(const LogNuTable& table, const HittingProbabilities& h, std::int64_t j) {
  check_state(table, j, 1, h.X_star - 1, "crossing_down_conditioned");
  const ModelParams& p = table.params();
  const auto& lh = h.log_h_minus;
  const std::int64_t x_star = h.X_star;
  auto log_q_down0 = [&](std::int64_t k) { return log_down_rate(k) + log_h_ratio(lh, k, -1); };
  // log(q_+^0(k) / q_-^0(k)) = log(q_+(k)/q_-(k)) + log h_-(k+1) - log h_-(k-1); only used for k < X_star - 1.
  auto log_ratio0 = [&](std::int64_t k) {
    return log_up_rate(p, k) - log_down_rate(k) + lh[static_cast<std::size_t>(k + 1)] -
           lh[static_cast<std::size_t>(k - 1)];
  };
  // S_-^0(j) = sum_{i=j}^{X_star-1} [prod_{k=j}^{i-1} q_+^0(k)/q_-^0(k)] / q_-^0(i).
  // The i = j term is 1/q_-^0(j); this is the nu^0 form with the q_+^0(j) nu^0(j-1, j) factor cancelled.
  LogAccumulator sum;
  double log_running = 0.0;
  for (std::int64_t i = j; i < x_star; ++i) {
    if (i > j) log_running += log_ratio0(i - 1);
    sum.add(log_running - log_q_down0(i));
  }
  return std::exp(sum.value());
}

double crossing_down_conditioned(const LogNuTable& table, std::int64_t j) {
  return crossing_down_conditioned(table, hitting_probs(table), j);
}

double log_p_star_exact(const LogNuTable& table, const HittingProbabilities& h) {
  const ModelParams& p = table.params();
  const std::int64_t x_star = h.X_star;
  const double up = std::exp(log_up_rate(p, x_star));
  const double down = static_cast<double>(x_star);
  return std::log(down / (up + down)) + h.log_h_minus[static_cast<std::size_t>(x_star - 1)];
}

double log_p_star_exact(const LogNuTable& table) { return log_p_star_exact(table, hitting_probs(table)); }

double L_star_exact(const LogNuTable& table, const HittingProbabilities& h) {
  const ModelParams& p = table.params();
  const std::int64_t x_star = require_window(p, 2, "L_star_exact");
  const double up = std::exp(log_up_rate(p, x_star));
  const double down = static_cast<double>(x_star);
  const double s_up = crossing_up_star(table, h, x_star - 1);
  const double s_down = crossing_down(table, x_star + 1);
  return (1.0 + down * s_up + up * s_down) / (up + down);
}

double L_star_exact(const LogNuTable& table) { return L_star_exact(table, hitting_probs(table)); }

double log_sojourn_expectation(const LogNuTable& table, const HittingProbabilities& h) {
  const double log_p = log_p_star_exact(table, h);
  // log(1/p - 1) = log(1 - p) - log p
  return std::log(L_star_exact(table, h)) + log1mexp(log_p) - log_p;
}

double log_sojourn_expectation(const LogNuTable& table) {
  return log_sojourn_expectation(table, hitting_probs(table));
}

std::vector<double> log_mean_extinction_all(const LogNuTable& table) {
  const auto log_s = log_crossing_down_all(table);
  std::vector<double> out(log_s.size(), kNegInf);
  LogAccumulator acc;
  for (std::size_t j = 1; j < log_s.size(); ++j) {
    acc.add(log_s[j]);
    out[j] = acc.value();
  }
  return out;
}

double log_mean_extinction_exact(const LogNuTable& table, std::int64_t j) {
  check_state(table, j, 0, table.n(), "mean_extinction_exact");
  if (j == 0) return kNegInf;
  LogAccumulator acc;
  for (std::int64_t i = 1; i <= j; ++i) acc.add(log_crossing_down(table, i));
  return acc.value();
}

double mean_extinction_exact(const LogNuTable& table, std::int64_t j) {
  return std::exp(log_mean_extinction_exact(table, j));
}

ExactResults solve(const ModelParams& params) {
  ExactResults out;
  out.params = params;
  if (params.r == 0.0) {
    // Pure death: E[tau | j] = H_j.
    out.log_mean_extinction.assign(static_cast<std::size_t>(params.n) + 1, kNegInf);
    CompensatedSum harmonic;
    for (std::int64_t j = 1; j <= params.n; ++j) {
      harmonic.add(1.0 / static_cast<double>(j));
      out.log_mean_extinction[static_cast<std::size_t>(j)] = std::log(harmonic.value());
    }
    return out;
  }
  const LogNuTable table(params);
  out.log_mean_extinction = log_mean_extinction_all(table);
  if (params.X_star && *params.X_star >= 1) {
    const auto h = hitting_probs(table);
    out.h_plus = h.h_plus;
    out.h_minus = h.h_minus;
    out.log_p_star = log_p_star_exact(table, h);
    if (*params.X_star >= 2) {
      const double l_star = L_star_exact(table, h);
      out.log_L_star = std::log(l_star);
      out.log_E_star_o = log_sojourn_expectation(table, h);
    }
  }
  return out;
}

}  // namespace logext::exact
