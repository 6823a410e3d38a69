#pragma once

#include <cmath>

namespace fewbose {

// Scaled complementary error function erfcx(x) = exp(x^2) erfc(x), x >= 0.
// Direct product is safe and accurate below the exp overflow threshold;
// beyond that the asymptotic series in 1/x^2 converges to machine precision.
inline double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  const double z = 1.0 / (2.0 * x * x);
  // 1 - z + 3 z^2 - 15 z^3 + 105 z^4 ...
  double sum = 1.0, term = 1.0;
  for (int n = 1; n <= 8; ++n) {
    term *= -(2 * n - 1) * z;
    sum += term;
  }
  return sum / (x * 1.7724538509055160273);  // x * sqrt(pi)
}

}  // namespace fewbose
