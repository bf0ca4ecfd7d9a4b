#pragma once

// Scalar special functions shared by the NIG algebra, the losses and the
// network heads.

#include <cmath>

namespace edr::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLogPi = 1.14472988584940017414;
inline constexpr double kLog2Pi = 1.83787706640934548356;

double log_gamma(double x);
double digamma(double x);
double trigamma(double x);
/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// log(1 + e^x) without overflow: max(x, 0) + log1p(e^{-|x|}).
inline double softplus(double x) {
  return std::fmax(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

/// Derivative of softplus.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace edr::special
