#include "seqei/normal.hpp"

#include <cmath>
#include <numbers>

namespace seqei {

double norm_pdf(double z) {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double norm_cdf(double z) {
  // erfc keeps full relative precision in the lower tail.
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

}  // namespace seqei
