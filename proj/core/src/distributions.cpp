#include "edr/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

#include "edr/errors.hpp"
#include "edr/special.hpp"

namespace edr {
namespace {

constexpr double kQuantileTolerance = 1e-10;

void require_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("quantile: probability must lie in (0, 1)");
  }
}

// Bisection on a nondecreasing function of a standardized variable.
template <typename Cdf>
double invert_cdf(Cdf&& f, double p) {
  double lo = -1.0;
  double hi = 1.0;
  while (f(lo) > p) lo *= 2.0;
  while (f(hi) < p) hi *= 2.0;
  while (hi - lo > kQuantileTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double standard_t_cdf(double t, double dof) {
  const double t2 = t * t;
  if (t2 < dof) {
    // Near the center dof / (dof + t^2) rounds to 1; use the complementary form.
    const double central = 0.5 * special::incomplete_beta(0.5, 0.5 * dof, t2 / (dof + t2));
    return t > 0.0 ? 0.5 + central : 0.5 - central;
  }
  const double tail = 0.5 * special::incomplete_beta(0.5 * dof, 0.5, dof / (dof + t2));
  return t > 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double log_pdf(const StudentT& d, double y) {
  const double z = (y - d.location) / d.scale;
  const double nu = d.dof;
  return special::log_gamma(0.5 * (nu + 1.0)) - special::log_gamma(0.5 * nu) -
         0.5 * std::log(nu * special::kPi) - std::log(d.scale) -
         0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

double log_pdf(const Gaussian& d, double y) {
  const double r = y - d.mean;
  return -0.5 * (special::kLog2Pi + std::log(d.variance)) - 0.5 * r * r / d.variance;
}

double log_pdf(const GaussianMixture& d, double y) {
  if (d.components.empty()) throw DomainError("log_pdf: empty mixture");
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(d.components.size());
  for (const auto& c : d.components) {
    terms.push_back(log_pdf(c, y));
    peak = std::max(peak, terms.back());
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - peak);
  return peak + std::log(sum / static_cast<double>(terms.size()));
}

double cdf(const StudentT& d, double y) {
  return standard_t_cdf((y - d.location) / d.scale, d.dof);
}

double cdf(const Gaussian& d, double y) {
  return 0.5 * std::erfc(-(y - d.mean) / std::sqrt(2.0 * d.variance));
}

double cdf(const GaussianMixture& d, double y) {
  if (d.components.empty()) throw DomainError("cdf: empty mixture");
  double sum = 0.0;
  for (const auto& c : d.components) sum += cdf(c, y);
  return sum / static_cast<double>(d.components.size());
}

double quantile(const StudentT& d, double p) {
  require_probability(p);
  const double t = invert_cdf([&](double z) { return standard_t_cdf(z, d.dof); }, p);
  return d.location + d.scale * t;
}

double quantile(const Gaussian& d, double p) {
  require_probability(p);
  return d.mean - std::sqrt(2.0 * d.variance) * boost::math::erfc_inv(2.0 * p);
}

double quantile(const GaussianMixture& d, double p) {
  require_probability(p);
  const double center = mixture_mean(d);
  const double spread = std::sqrt(mixture_variance(d));
  const double z = invert_cdf([&](double u) { return cdf(d, center + spread * u); }, p);
  return center + spread * z;
}

double entropy(const StudentT& d) {
  const double nu = d.dof;
  const double half_up = 0.5 * (nu + 1.0);
  const double log_beta = special::log_gamma(0.5 * nu) + special::log_gamma(0.5) -
                          special::log_gamma(half_up);
  return half_up * (special::digamma(half_up) - special::digamma(0.5 * nu)) +
         0.5 * std::log(nu) + log_beta + std::log(d.scale);
}

double entropy(const Gaussian& d) {
  return 0.5 * (special::kLog2Pi + 1.0 + std::log(d.variance));
}

double entropy(const GaussianMixture& d) {
  return entropy(Gaussian{mixture_mean(d), mixture_variance(d)});
}

double mixture_mean(const GaussianMixture& d) {
  if (d.components.empty()) throw DomainError("mixture_mean: empty mixture");
  double sum = 0.0;
  for (const auto& c : d.components) sum += c.mean;
  return sum / static_cast<double>(d.components.size());
}

double mixture_variance(const GaussianMixture& d) {
  // Aleatoric mean plus spread of the member means.
  const double m = mixture_mean(d);
  double aleatoric = 0.0;
  double spread = 0.0;
  for (const auto& c : d.components) {
    aleatoric += c.variance;
    spread += (c.mean - m) * (c.mean - m);
  }
  const auto n = static_cast<double>(d.components.size());
  return aleatoric / n + spread / n;
}

}  // namespace edr
