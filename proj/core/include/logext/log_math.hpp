#ifndef LOGEXT_LOG_MATH_HPP
#define LOGEXT_LOG_MATH_HPP

#include <cmath>
#include <limits>
#include <span>

namespace logext {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// log(exp(a) - exp(b)) for a >= b. Returns -inf when a == b.
inline double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (b >= a) return kNegInf;
  const double d = b - a;
  // log(1 - e^d): choose the branch that keeps precision (Maechler 2012).
  return a + (d > -M_LN2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
}

// log(1 - exp(x)) for x <= 0.
inline double log1mexp(double x) {
  if (x == 0.0) return kNegInf;
  return x > -M_LN2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

// Max-shifted log-sum-exp with compensated accumulation of the shifted terms.
double log_sum_exp(std::span<const double> terms);

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Running log-sum-exp: accumulates exp(x_i) relative to the running maximum.
class LogAccumulator {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (log_term <= max_) {
      sum_.add(std::exp(log_term - max_));
    } else {
      const double scale = max_ == kNegInf ? 0.0 : std::exp(max_ - log_term);
      CompensatedSum rescaled;
      rescaled.add(sum_.value() * scale);
      rescaled.add(1.0);
      sum_ = rescaled;
      max_ = log_term;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_.value()); }

 private:
  double max_ = kNegInf;
  CompensatedSum sum_;
};

}  // namespace logext

#endif  // LOGEXT_LOG_MATH_HPP
