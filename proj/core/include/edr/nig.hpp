#pragma once

// Closed-form algebra of the Normal-Inverse-Gamma (NIG) evidential
// distribution over an unknown Gaussian mean and variance:
//
//   sigma^2 ~ InvGamma(alpha, beta),   mu | sigma^2 ~ N(gamma, sigma^2 / nu)
//
// All functions are pure; invalid parameters raise edr::DomainError.

#include <string>
#include <string_view>
#include <vector>

#include "edr/distributions.hpp"

namespace edr {

struct EvidentialParams {
  double gamma = 0.0;  ///< location, target units
  double nu = 1.0;     ///< virtual observations supporting the mean
  double alpha = 2.0;  ///< virtual observations supporting the variance, > 1
  double beta = 1.0;   ///< scaled sum of squared deviations, target units^2

  friend bool operator==(const EvidentialParams&, const EvidentialParams&) = default;
};

enum class ParamViolation {
  gamma_not_finite,
  nu_not_finite,
  nu_not_positive,
  alpha_not_finite,
  alpha_not_above_one,
  beta_not_finite,
  beta_not_positive,
};

std::string_view describe(ParamViolation v);

/// Every violated constraint; empty when `p` is valid. alpha == 1 is rejected.
std::vector<ParamViolation> validate(const EvidentialParams& p);

/// Throws DomainError naming the first violated constraint, prefixed by `op`.
void require_valid(const EvidentialParams& p, std::string_view op);

struct PredictiveSummary {
  double prediction = 0.0;      ///< E[mu]
  double aleatoric = 0.0;       ///< E[sigma^2]
  double epistemic = 0.0;       ///< Var[mu] = aleatoric / nu
  double total_evidence = 0.0;  ///< 2 nu + alpha
  double entropy = 0.0;         ///< nats, of the marginal Student-t
};

PredictiveSummary predictive_summary(const EvidentialParams& p);

/// Joint density of (mu, sigma^2).
double nig_pdf(double mu, double sigma2, const EvidentialParams& p);
double nig_log_pdf(double mu, double sigma2, const EvidentialParams& p);

/// Marginal of y after integrating out (mu, sigma^2):
/// St(y; gamma, beta (1 + nu) / (nu alpha), 2 alpha).
StudentT evidence_distribution(const EvidentialParams& p);

double model_evidence(double y, const EvidentialParams& p);
double log_model_evidence(double y, const EvidentialParams& p);

/// Differential entropy (nats) of evidence_distribution(p).
double predictive_entropy(const EvidentialParams& p);

/// KL(NIG(p) || NIG(q)).
double nig_kl(const EvidentialParams& p, const EvidentialParams& q);

/// KL(NIG(gamma, nu, alpha, beta) || NIG(gamma, eps, 1 + eps, beta)); grows
/// without bound as eps -> 0.
double soft_prior_kl(const EvidentialParams& p, double epsilon);

}  // namespace edr
