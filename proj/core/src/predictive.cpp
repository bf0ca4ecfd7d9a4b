#include "edr/predictive.hpp"

#include "edr/errors.hpp"
#include "edr/losses.hpp"

namespace edr {

double log_pdf(const PredictiveDistribution& d, double y) {
  struct Visitor {
    double y;
    double operator()(const EvidentialParams& p) const { return -evidential_nll(y, p); }
    double operator()(const Gaussian& g) const { return log_pdf(g, y); }
    double operator()(const GaussianMixture& m) const { return log_pdf(m, y); }
  };
  return std::visit(Visitor{y}, d);
}

double cdf(const PredictiveDistribution& d, double y) {
  struct Visitor {
    double y;
    double operator()(const EvidentialParams& p) const {
      return cdf(evidence_distribution(p), y);
    }
    double operator()(const Gaussian& g) const { return cdf(g, y); }
    double operator()(const GaussianMixture& m) const { return cdf(m, y); }
  };
  return std::visit(Visitor{y}, d);
}

double quantile(const PredictiveDistribution& d, double p) {
  struct Visitor {
    double p;
    double operator()(const EvidentialParams& e) const {
      return quantile(evidence_distribution(e), p);
    }
    double operator()(const Gaussian& g) const { return quantile(g, p); }
    double operator()(const GaussianMixture& m) const { return quantile(m, p); }
  };
  return std::visit(Visitor{p}, d);
}

double entropy(const PredictiveDistribution& d) {
  struct Visitor {
    double operator()(const EvidentialParams& p) const { return predictive_entropy(p); }
    double operator()(const Gaussian& g) const { return entropy(g); }
    double operator()(const GaussianMixture& m) const { return entropy(m); }
  };
  return std::visit(Visitor{}, d);
}

double mean(const PredictiveDistribution& d) {
  struct Visitor {
    double operator()(const EvidentialParams& p) const { return p.gamma; }
    double operator()(const Gaussian& g) const { return g.mean; }
    double operator()(const GaussianMixture& m) const { return mixture_mean(m); }
  };
  return std::visit(Visitor{}, d);
}

PredictiveDistribution affine(const PredictiveDistribution& d, double shift, double scale) {
  if (!(scale > 0.0)) throw DomainError("affine: scale must be positive");
  struct Visitor {
    double shift;
    double scale;
    PredictiveDistribution operator()(const EvidentialParams& p) const {
      return EvidentialParams{shift + scale * p.gamma, p.nu, p.alpha, scale * scale * p.beta};
    }
    PredictiveDistribution operator()(const Gaussian& g) const {
      return Gaussian{shift + scale * g.mean, scale * scale * g.variance};
    }
    PredictiveDistribution operator()(const GaussianMixture& m) const {
      GaussianMixture out;
      out.components.reserve(m.components.size());
      for (const auto& c : m.components) {
        out.components.push_back({shift + scale * c.mean, scale * scale * c.variance});
      }
      return out;
    }
  };
  return std::visit(Visitor{shift, scale}, d);
}

}  // namespace edr
