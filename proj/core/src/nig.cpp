#include "edr/nig.hpp"

#include <cmath>

#include "edr/errors.hpp"
#include "edr/special.hpp"

namespace edr {

std::string_view describe(ParamViolation v) {
  switch (v) {
    case ParamViolation::gamma_not_finite: return "gamma is not finite";
    case ParamViolation::nu_not_finite: return "nu is not finite";
    case ParamViolation::nu_not_positive: return "nu <= 0";
    case ParamViolation::alpha_not_finite: return "alpha is not finite";
    case ParamViolation::alpha_not_above_one: return "alpha <= 1";
    case ParamViolation::beta_not_finite: return "beta is not finite";
    case ParamViolation::beta_not_positive: return "beta <= 0";
  }
  return "unknown violation";
}

std::vector<ParamViolation> validate(const EvidentialParams& p) {
  std::vector<ParamViolation> out;
  if (!std::isfinite(p.gamma)) out.push_back(ParamViolation::gamma_not_finite);
  if (std::isinf(p.nu)) out.push_back(ParamViolation::nu_not_finite);
  if (!(p.nu > 0.0)) out.push_back(ParamViolation::nu_not_positive);
  if (std::isinf(p.alpha)) out.push_back(ParamViolation::alpha_not_finite);
  if (!(p.alpha > 1.0)) out.push_back(ParamViolation::alpha_not_above_one);
  if (std::isinf(p.beta)) out.push_back(ParamViolation::beta_not_finite);
  if (!(p.beta > 0.0)) out.push_back(ParamViolation::beta_not_positive);
  return out;
}

void require_valid(const EvidentialParams& p, std::string_view op) {
  const auto violations = validate(p);
  if (!violations.empty()) {
    throw DomainError(std::string(op) + ": invalid evidential parameters (" +
                      std::string(describe(violations.front())) + ")");
  }
}

PredictiveSummary predictive_summary(const EvidentialParams& p) {
  require_valid(p, "predictive_summary");
  PredictiveSummary s;
  s.prediction = p.gamma;
  s.aleatoric = p.beta / (p.alpha - 1.0);
  s.epistemic = s.aleatoric / p.nu;
  s.total_evidence = 2.0 * p.nu + p.alpha;
  s.entropy = predictive_entropy(p);
  return s;
}

double nig_log_pdf(double mu, double sigma2, const EvidentialParams& p) {
  if (!(sigma2 > 0.0)) throw DomainError("nig_pdf: sigma2 must be positive");
  require_valid(p, "nig_pdf");
  const double dev = p.gamma - mu;
  const double log_sigma2 = std::log(sigma2);
  return 0.5 * std::log(p.nu) - 0.5 * (special::kLog2Pi + log_sigma2) +
         p.alpha * std::log(p.beta) - special::log_gamma(p.alpha) -
         (p.alpha + 1.0) * log_sigma2 - (2.0 * p.beta + p.nu * dev * dev) / (2.0 * sigma2);
}

double nig_pdf(double mu, double sigma2, const EvidentialParams& p) {
  return std::exp(nig_log_pdf(mu, sigma2, p));
}

StudentT evidence_distribution(const EvidentialParams& p) {
  require_valid(p, "model_evidence");
  const double scale2 = p.beta * (1.0 + p.nu) / (p.nu * p.alpha);
  return StudentT{p.gamma, std::sqrt(scale2), 2.0 * p.alpha};
}

double log_model_evidence(double y, const EvidentialParams& p) {
  return log_pdf(evidence_distribution(p), y);
}

double model_evidence(double y, const EvidentialParams& p) {
  return std::exp(log_model_evidence(y, p));
}

double predictive_entropy(const EvidentialParams& p) {
  return entropy(evidence_distribution(p));
}

double nig_kl(const EvidentialParams& p, const EvidentialParams& q) {
  require_valid(p, "nig_kl");
  require_valid(q, "nig_kl");
  const double dmu = p.gamma - q.gamma;
  const double precision = p.alpha / p.beta;  // E_p[1 / sigma^2]
  const double nu_ratio = q.nu / p.nu;
  return 0.5 * precision * dmu * dmu * q.nu + 0.5 * nu_ratio - 0.5 * std::log(nu_ratio) - 0.5 +
         q.alpha * std::log(p.beta / q.beta) - special::log_gamma(p.alpha) +
         special::log_gamma(q.alpha) + (p.alpha - q.alpha) * special::digamma(p.alpha) -
         (p.beta - q.beta) * precision;
}

double soft_prior_kl(const EvidentialParams& p, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("soft_prior_kl: epsilon must be positive");
  require_valid(p, "soft_prior_kl");
  // nig_kl with q = (gamma, eps, 1 + eps, beta): the location and beta terms vanish.
  const double nu_ratio = epsilon / p.nu;
  return 0.5 * nu_ratio - 0.5 * std::log(nu_ratio) - 0.5 - special::log_gamma(p.alpha) +
         special::log_gamma(1.0 + epsilon) +
         (p.alpha - 1.0 - epsilon) * special::digamma(p.alpha);
}

}  // namespace edr
