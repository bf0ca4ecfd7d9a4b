#include "edr/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "edr/errors.hpp"
#include "edr/special.hpp"

namespace edr {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (iterations == 0) throw ConfigError("train: iterations must be positive");
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  loss.validate();
}

HeadLoss head_loss(const MlpConfig& cfg, const Eigen::MatrixXd& raw,
                   const Eigen::MatrixXd& targets, const LossConfig& loss,
                   Eigen::MatrixXd& grad_raw) {
  const auto k = static_cast<Eigen::Index>(cfg.outputs_per_target());
  const auto t_count = static_cast<Eigen::Index>(cfg.targets);
  if (raw.cols() != k * t_count || targets.cols() != t_count || raw.rows() != targets.rows()) {
    throw ShapeError("head_loss: outputs and targets disagree in shape");
  }
  grad_raw.setZero(raw.rows(), raw.cols());
  HeadLoss out;
  for (Eigen::Index b = 0; b < raw.rows(); ++b) {
    for (Eigen::Index t = 0; t < t_count; ++t) {
      const Eigen::Index c = k * t;
      const double y = targets(b, t);
      switch (cfg.head) {
        case Head::evidential: {
          const EvidentialParams p =
              evidential_activation(raw(b, c), raw(b, c + 1), raw(b, c + 2), raw(b, c + 3));
          const LossBreakdown l = total_loss(y, p, loss);
          out.total += l.total;
          out.nll += l.nll;
          out.regularizer += l.regularizer;
          grad_raw(b, c) = l.grad[0];
          grad_raw(b, c + 1) = l.grad[1] * special::sigmoid(raw(b, c + 1));
          grad_raw(b, c + 2) = l.grad[2] * special::sigmoid(raw(b, c + 2));
          grad_raw(b, c + 3) = l.grad[3] * special::sigmoid(raw(b, c + 3));
          break;
        }
        case Head::gaussian: {
          const GaussianOutput g = gaussian_activation(raw(b, c), raw(b, c + 1));
          const GaussianLoss l = gaussian_nll(y, g.mu, g.sigma2);
          out.total += l.value;
          out.nll += l.value;
          grad_raw(b, c) = l.d_mu;
          grad_raw(b, c + 1) = l.d_sigma2 * special::sigmoid(raw(b, c + 1));
          break;
        }
        case Head::point: {
          const double r = raw(b, c) - y;
          out.total += 0.5 * r * r;
          out.nll += 0.5 * r * r;
          grad_raw(b, c) = r;
          break;
        }
      }
    }
  }
  return out;
}

TrainResult train(const Dataset& data, const MlpConfig& mlp_cfg, const TrainConfig& cfg) {
  data.validate();
  mlp_cfg.validate();
  cfg.validate();
  if (data.feature_dim() != mlp_cfg.input_dim || data.target_dim() != mlp_cfg.targets) {
    throw ShapeError("train: dataset shape does not match the network configuration");
  }

  std::mt19937_64 rng(cfg.seed);
  TrainResult result{Mlp(mlp_cfg, rng), {}};
  Mlp& net = result.net;
  result.trace.reserve(cfg.iterations);

  const std::size_t n = data.size();
  const std::size_t batch = std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = n;  // forces a shuffle on the first iteration

  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  Eigen::MatrixXd grad_raw;
  std::vector<std::size_t> rows;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    if (cursor >= n) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t take = std::min(batch, n - cursor);
    rows.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                order.begin() + static_cast<std::ptrdiff_t>(cursor + take));
    cursor += take;

    x.resize(static_cast<Eigen::Index>(take), data.features.cols());
    y.resize(static_cast<Eigen::Index>(take), data.targets.cols());
    for (std::size_t i = 0; i < take; ++i) {
      x.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(rows[i]));
      y.row(static_cast<Eigen::Index>(i)) = data.targets.row(static_cast<Eigen::Index>(rows[i]));
    }

    const Tape tape = net.forward(x, &rng);
    const HeadLoss loss = head_loss(mlp_cfg, tape.raw_output(), y, cfg.loss, grad_raw);
    const double scale = 1.0 / static_cast<double>(take);
    if (!std::isfinite(loss.total) || !grad_raw.allFinite()) {
      throw TrainingDiverged("train: non-finite loss at iteration " + std::to_string(it), it,
                             rows);
    }
    grad_raw *= scale;
    net.backward(tape, grad_raw);
    adam_step(net.store(), AdamConfig{cfg.learning_rate});
    result.trace.push_back({it, loss.total * scale, loss.nll * scale, loss.regularizer * scale});
  }
  return result;
}

}  // namespace edr
