#include "edr/losses.hpp"

#include <algorithm>
#include <cmath>

#include "edr/errors.hpp"
#include "edr/special.hpp"

namespace edr {
namespace {

constexpr double kLogFloor = 1e-300;

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Value and gradient of the regularizer for one kind.
struct RegTerm {
  double value = 0.0;
  ParamGradient grad{};
};

RegTerm regularizer_term(double y, const EvidentialParams& p, RegularizerKind kind,
                         double epsilon) {
  RegTerm r;
  const double err = y - p.gamma;
  const double abs_err = std::fabs(err);
  const double evidence = 2.0 * p.nu + p.alpha;
  switch (kind) {
    case RegularizerKind::abs_error:
      r.value = abs_err * evidence;
      r.grad = {-sign(err) * evidence, 2.0 * abs_err, abs_err, 0.0};
      break;
    case RegularizerKind::standard_score: {
      // inv_scale = 1 / sqrt(beta / (alpha - 1))
      const double inv_scale = std::sqrt((p.alpha - 1.0) / p.beta);
      r.value = abs_err * inv_scale * evidence;
      const double d_inv_scale_d_alpha = 0.5 / std::sqrt((p.alpha - 1.0) * p.beta);
      const double d_inv_scale_d_beta = -0.5 * inv_scale / p.beta;
      r.grad = {-sign(err) * inv_scale * evidence, 2.0 * abs_err * inv_scale,
                abs_err * (inv_scale + evidence * d_inv_scale_d_alpha),
                abs_err * evidence * d_inv_scale_d_beta};
      break;
    }
    case RegularizerKind::soft_kl:
      r.value = soft_prior_kl(p, epsilon);
      r.grad = {0.0, 0.5 / p.nu - 0.5 * epsilon / (p.nu * p.nu),
                (p.alpha - 1.0 - epsilon) * special::trigamma(p.alpha), 0.0};
      break;
  }
  return r;
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("loss: lambda must be finite and >= 0");
  }
  if (regularizer == RegularizerKind::soft_kl && !(epsilon > 0.0)) {
    throw ConfigError("loss: soft_kl regularizer needs epsilon > 0");
  }
}

double evidential_nll(double y, const EvidentialParams& p) {
  require_valid(p, "evidential_nll");
  const double err = y - p.gamma;
  const double omega = 2.0 * p.beta * (1.0 + p.nu);
  const double spread = std::max(err * err * p.nu + omega, kLogFloor);
  return 0.5 * (special::kLogPi - std::log(p.nu)) - p.alpha * std::log(omega) +
         (p.alpha + 0.5) * std::log(spread) + special::log_gamma(p.alpha) -
         special::log_gamma(p.alpha + 0.5);
}

double evidence_regularizer(double y, const EvidentialParams& p, RegularizerKind kind,
                            double epsilon) {
  require_valid(p, "evidence_regularizer");
  return regularizer_term(y, p, kind, epsilon).value;
}

LossBreakdown total_loss(double y, const EvidentialParams& p, const LossConfig& cfg) {
  cfg.validate();
  LossBreakdown out;
  out.nll = evidential_nll(y, p);

  const double err = y - p.gamma;
  const double one_plus_nu = 1.0 + p.nu;
  const double omega = 2.0 * p.beta * one_plus_nu;
  const double spread = std::max(err * err * p.nu + omega, kLogFloor);
  const double a_half = p.alpha + 0.5;
  out.grad = {
      -2.0 * a_half * err * p.nu / spread,
      -0.5 / p.nu - p.alpha / one_plus_nu + a_half * (err * err + 2.0 * p.beta) / spread,
      std::log(spread) - std::log(omega) + special::digamma(p.alpha) -
          special::digamma(a_half),
      -p.alpha / p.beta + 2.0 * a_half * one_plus_nu / spread,
  };

  const RegTerm reg = regularizer_term(y, p, cfg.regularizer, cfg.epsilon);
  out.regularizer = reg.value;
  if (cfg.lambda == 0.0) {
    out.total = out.nll;
    return out;
  }
  out.total = out.nll + cfg.lambda * reg.value;
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += cfg.lambda * reg.grad[i];
  return out;
}

GaussianLoss gaussian_nll(double y, double mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("gaussian_nll: sigma2 must be positive");
  const double r = y - mu;
  const double scaled = r * r / sigma2;
  GaussianLoss out;
  out.value = 0.5 * (special::kLog2Pi + std::log(sigma2)) + 0.5 * scaled;
  out.d_mu = -r / sigma2;
  out.d_log_sigma2 = 0.5 - 0.5 * scaled;
  out.d_sigma2 = out.d_log_sigma2 / sigma2;
  return out;
}

}  // namespace edr
