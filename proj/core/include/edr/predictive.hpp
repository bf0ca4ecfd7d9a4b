#pragma once

// Per-sample predictive distribution shared by every method. The evidential
// alternative keeps the NIG parameters so its density goes through the same
// code as the training loss.

#include <variant>

#include "edr/distributions.hpp"
#include "edr/nig.hpp"

namespace edr {

using PredictiveDistribution = std::variant<EvidentialParams, Gaussian, GaussianMixture>;

double log_pdf(const PredictiveDistribution& d, double y);
double cdf(const PredictiveDistribution& d, double y);
double quantile(const PredictiveDistribution& d, double p);
double entropy(const PredictiveDistribution& d);
double mean(const PredictiveDistribution& d);

/// Distribution of shift + scale * Y (scale > 0). For NIG outputs this maps
/// gamma -> shift + scale gamma and beta -> scale^2 beta.
PredictiveDistribution affine(const PredictiveDistribution& d, double shift, double scale);

/// What every method reports per sample and target.
struct UncertainPrediction {
  double prediction = 0.0;
  double aleatoric = 0.0;
  double epistemic = 0.0;
  double entropy = 0.0;
  PredictiveDistribution distribution;
};

}  // namespace edr
