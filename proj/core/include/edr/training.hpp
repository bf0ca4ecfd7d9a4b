#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "edr/data.hpp"
#include "edr/diffnet.hpp"
#include "edr/losses.hpp"

namespace edr {

struct TrainConfig {
  double learning_rate = 5e-3;
  std::size_t iterations = 5000;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  LossConfig loss;

  void validate() const;
};

/// Batch-summed loss components at the head outputs.
struct HeadLoss {
  double total = 0.0;
  double nll = 0.0;
  double regularizer = 0.0;
};

/// Loss of raw head outputs (batch x width) against targets (batch x t) for
/// the configured head, summed over samples and targets. `grad_raw` receives
/// d(sum) / d raw, including the softplus Jacobians of the head activations.
/// The point head uses half squared error; the Gaussian head ignores `loss`.
HeadLoss head_loss(const MlpConfig& cfg, const Eigen::MatrixXd& raw,
                   const Eigen::MatrixXd& targets, const LossConfig& loss,
                   Eigen::MatrixXd& grad_raw);

struct TraceRow {
  std::size_t iteration = 0;
  double mean_loss = 0.0;
  double mean_nll = 0.0;
  double mean_reg = 0.0;
};

struct TrainResult {
  Mlp net;
  std::vector<TraceRow> trace;
};

/// Minibatch Adam on the per-batch mean loss. Batches come from shuffled
/// epochs (the final partial batch is kept). Initialization, shuffling and
/// dropout masks all draw from one generator seeded by cfg.seed. Throws
/// TrainingDiverged on a non-finite batch loss.
TrainResult train(const Dataset& data, const MlpConfig& mlp_cfg, const TrainConfig& cfg);

}  // namespace edr
