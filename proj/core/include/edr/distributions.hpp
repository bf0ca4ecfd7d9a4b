#pragma once

// Univariate distributions used for predictive densities, CDFs and entropies.

#include <vector>

namespace edr {

/// Location-scale Student-t. `scale` is the standard deviation-like scale
/// (square root of the scale² parameter), `dof` the degrees of freedom.
struct StudentT {
  double location = 0.0;
  double scale = 1.0;
  double dof = 1.0;
};

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};

/// Uniform-weight mixture of Gaussians (deep ensembles).
struct GaussianMixture {
  std::vector<Gaussian> components;
};

double log_pdf(const StudentT& d, double y);
double log_pdf(const Gaussian& d, double y);
double log_pdf(const GaussianMixture& d, double y);

double cdf(const StudentT& d, double y);
double cdf(const Gaussian& d, double y);
double cdf(const GaussianMixture& d, double y);

/// Inverse CDF. Student-t and mixtures are inverted by bisection on the CDF
/// to 1e-10 in standardized units; the Gaussian uses the inverse error function.
double quantile(const StudentT& d, double p);
double quantile(const Gaussian& d, double p);
double quantile(const GaussianMixture& d, double p);

/// Differential entropy in nats. A mixture reports the entropy of its
/// moment-matched Gaussian.
double entropy(const StudentT& d);
double entropy(const Gaussian& d);
double entropy(const GaussianMixture& d);

/// Moments of the uniform mixture.
double mixture_mean(const GaussianMixture& d);
double mixture_variance(const GaussianMixture& d);

}  // namespace edr
