#pragma once

// Sampling and likelihood baselines: Gaussian MLE, deep ensembles (uniform
// mixture of Gaussian-head members) and MC dropout.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "edr/data.hpp"
#include "edr/diffnet.hpp"
#include "edr/distributions.hpp"
#include "edr/training.hpp"

namespace edr {

struct GaussianPrediction {
  double mu = 0.0;
  double sigma2 = 1.0;     ///< aleatoric variance
  double epistemic = 0.0;  ///< 0 for a single MLE model
  double entropy = 0.0;    ///< 1/2 log(2 pi e (sigma2 + epistemic))

  double total_variance() const { return sigma2 + epistemic; }
};

GaussianPrediction make_gaussian_prediction(double mu, double sigma2, double epistemic);

/// Train with the Gaussian NLL; the head is forced to `gaussian`.
TrainResult train_gaussian_mle(const Dataset& data, MlpConfig mlp_cfg, const TrainConfig& cfg);

inline constexpr std::size_t kDefaultEnsembleSize = 5;
inline constexpr std::size_t kDefaultDropoutSamples = 5;
inline constexpr double kDefaultDropoutP = 0.1;

/// `members` Gaussian MLE networks with seeds derive_seed(cfg.seed, i),
/// trained on up to `jobs` threads. Results do not depend on `jobs`.
std::vector<TrainResult> train_ensemble(const Dataset& data, const MlpConfig& mlp_cfg,
                                        const TrainConfig& cfg,
                                        std::size_t members = kDefaultEnsembleSize,
                                        std::size_t jobs = 1);

/// Uniform-mixture moments of member outputs for one sample. Needs >= 2 members.
GaussianPrediction combine_members(std::span<const GaussianOutput> members);

/// Per sample and target ([b * targets + t]).
std::vector<GaussianPrediction> ensemble_predict(std::span<const Mlp> members,
                                                 const Eigen::MatrixXd& x);
std::vector<GaussianMixture> ensemble_mixture(std::span<const Mlp> members,
                                              const Eigen::MatrixXd& x);

/// Both of the above from a single forward pass per member.
struct EnsembleOutput {
  std::vector<GaussianPrediction> predictions;
  std::vector<GaussianMixture> mixtures;
};
EnsembleOutput ensemble_forward(std::span<const Mlp> members, const Eigen::MatrixXd& x);

/// Sample statistics of MC-dropout outputs for one sample: mean of mu,
/// unbiased (n - 1) variance of mu, mean sigma^2. Needs n >= 2.
GaussianPrediction combine_dropout_samples(std::span<const GaussianOutput> samples);

std::vector<GaussianPrediction> dropout_predict(const Mlp& net, const Eigen::MatrixXd& x,
                                                std::size_t n, std::uint64_t seed);

}  // namespace edr
