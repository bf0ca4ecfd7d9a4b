#pragma once

// Training objectives for evidential regression and the Gaussian MLE
// baseline, with analytic gradients.

#include <array>

#include "edr/nig.hpp"

namespace edr {

enum class RegularizerKind {
  abs_error,       ///< |y - gamma| * (2 nu + alpha)
  standard_score,  ///< |y - gamma| / sqrt(beta / (alpha - 1)) * (2 nu + alpha)
  soft_kl,         ///< KL to an epsilon-evidence NIG, independent of y
};

struct LossConfig {
  double lambda = 0.01;
  RegularizerKind regularizer = RegularizerKind::abs_error;
  double epsilon = 1e-2;  ///< only used by soft_kl

  /// Throws ConfigError on lambda < 0 or epsilon <= 0 with soft_kl.
  void validate() const;
};

/// Gradient with respect to (gamma, nu, alpha, beta).
using ParamGradient = std::array<double, 4>;

struct LossBreakdown {
  double nll = 0.0;
  double regularizer = 0.0;
  double total = 0.0;
  ParamGradient grad{};
};

/// -log of the Student-t model evidence written with Omega = 2 beta (1 + nu).
double evidential_nll(double y, const EvidentialParams& p);

double evidence_regularizer(double y, const EvidentialParams& p, RegularizerKind kind,
                            double epsilon = 1e-2);

/// nll + lambda * regularizer and the analytic gradient of the total. The
/// abs-value subgradient at y == gamma is taken as 0.
LossBreakdown total_loss(double y, const EvidentialParams& p, const LossConfig& cfg);

struct GaussianLoss {
  double value = 0.0;
  double d_mu = 0.0;
  double d_log_sigma2 = 0.0;
  double d_sigma2 = 0.0;
};

/// 1/2 log(2 pi sigma^2) + (y - mu)^2 / (2 sigma^2) and its gradient.
GaussianLoss gaussian_nll(double y, double mu, double sigma2);

}  // namespace edr
