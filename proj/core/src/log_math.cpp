#include "logext/log_math.hpp"

#include <algorithm>

namespace logext {

double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) return kNegInf;
  const double max_term = *std::max_element(terms.begin(), terms.end());
  if (max_term == kNegInf) return kNegInf;
  if (std::isinf(max_term)) return max_term;
  CompensatedSum sum;
  for (double t : terms) sum.add(std::exp(t - max_term));
  return max_term + std::log(sum.value());
}

}  // namespace logext
