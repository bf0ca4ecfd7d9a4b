#include "edr/baselines.hpp"

#include <algorithm>
#include <optional>

#include "edr/errors.hpp"
#include "edr/parallel.hpp"

namespace edr {

GaussianPrediction make_gaussian_prediction(double mu, double sigma2, double epistemic) {
  GaussianPrediction p{mu, sigma2, epistemic, 0.0};
  p.entropy = entropy(Gaussian{mu, p.total_variance()});
  return p;
}

TrainResult train_gaussian_mle(const Dataset& data, MlpConfig mlp_cfg, const TrainConfig& cfg) {
  mlp_cfg.head = Head::gaussian;
  return train(data, mlp_cfg, cfg);
}

std::vector<TrainResult> train_ensemble(const Dataset& data, const MlpConfig& mlp_cfg,
                                        const TrainConfig& cfg, std::size_t members,
                                        std::size_t jobs) {
  if (members < 2) throw ConfigError("ensemble: need at least 2 members");
  MlpConfig member_cfg = mlp_cfg;
  member_cfg.head = Head::gaussian;

  std::vector<std::optional<TrainResult>> slots(members);
  parallel_for(members, jobs, [&](std::size_t i) {
    TrainConfig c = cfg;
    c.seed = derive_seed(cfg.seed, i);
    slots[i].emplace(train(data, member_cfg, c));
  });
  std::vector<TrainResult> out;
  out.reserve(members);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace {

// Mean written as first + mean of offsets, so equal inputs return that value exactly.
double offset_mean(std::span<const GaussianOutput> xs, double GaussianOutput::*field) {
  const double first = xs.front().*field;
  double offset = 0.0;
  for (const auto& x : xs) offset += x.*field - first;
  return first + offset / static_cast<double>(xs.size());
}

}  // namespace

GaussianPrediction combine_members(std::span<const GaussianOutput> members) {
  if (members.size() < 2) throw ConfigError("ensemble: need at least 2 members");
  const auto m = static_cast<double>(members.size());
  const double mu = offset_mean(members, &GaussianOutput::mu);
  const double aleatoric = offset_mean(members, &GaussianOutput::sigma2);
  double spread = 0.0;
  for (const auto& o : members) spread += (o.mu - mu) * (o.mu - mu);
  return make_gaussian_prediction(mu, aleatoric, spread / m);
}

namespace {

// outputs[member][b * targets + t]
std::vector<std::vector<GaussianOutput>> member_outputs(std::span<const Mlp> members,
                                                        const Eigen::MatrixXd& x) {
  if (members.size() < 2) throw ConfigError("ensemble: need at least 2 members");
  std::vector<std::vector<GaussianOutput>> outs;
  outs.reserve(members.size());
  for (const auto& net : members) outs.push_back(forward_gaussian(net, x));
  for (const auto& o : outs) {
    if (o.size() != outs.front().size()) {
      throw ShapeError("ensemble: members disagree on output width");
    }
  }
  return outs;
}

}  // namespace

EnsembleOutput ensemble_forward(std::span<const Mlp> members, const Eigen::MatrixXd& x) {
  const auto outs = member_outputs(members, x);
  const std::size_t n = outs.front().size();
  EnsembleOutput result;
  result.predictions.reserve(n);
  result.mixtures.resize(n);
  std::vector<GaussianOutput> column(members.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < outs.size(); ++m) {
      column[m] = outs[m][i];
      result.mixtures[i].components.push_back({outs[m][i].mu, outs[m][i].sigma2});
    }
    result.predictions.push_back(combine_members(column));
  }
  return result;
}

std::vector<GaussianPrediction> ensemble_predict(std::span<const Mlp> members,
                                                 const Eigen::MatrixXd& x) {
  return ensemble_forward(members, x).predictions;
}

std::vector<GaussianMixture> ensemble_mixture(std::span<const Mlp> members,
                                              const Eigen::MatrixXd& x) {
  return ensemble_forward(members, x).mixtures;
}

GaussianPrediction combine_dropout_samples(std::span<const GaussianOutput> samples) {
  if (samples.size() < 2) throw ConfigError("dropout: need at least 2 samples");
  const auto n = static_cast<double>(samples.size());
  const double mu = offset_mean(samples, &GaussianOutput::mu);
  double ss = 0.0;
  for (const auto& s : samples) ss += (s.mu - mu) * (s.mu - mu);
  return make_gaussian_prediction(mu, offset_mean(samples, &GaussianOutput::sigma2),
                                  ss / (n - 1.0));
}

std::vector<GaussianPrediction> dropout_predict(const Mlp& net, const Eigen::MatrixXd& x,
                                                std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("dropout: need at least 2 samples");
  const auto samples = mc_dropout_forward(net, x, n, seed);
  std::vector<GaussianPrediction> result;
  result.reserve(samples.front().size());
  std::vector<GaussianOutput> column(n);
  for (std::size_t i = 0; i < samples.front().size(); ++i) {
    for (std::size_t s = 0; s < n; ++s) column[s] = samples[s][i];
    result.push_back(combine_dropout_samples(column));
  }
  return result;
}

}  // namespace edr
