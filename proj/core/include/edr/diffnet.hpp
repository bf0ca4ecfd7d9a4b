#pragma once

// Fully-connected network with evidential (4 outputs per target), Gaussian
// (2 per target) or point (1 per target) heads, reverse-mode gradients and
// an Adam optimizer. Batches are row-major in the sense that each row of an
// input matrix is one sample.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "edr/nig.hpp"

namespace edr {

enum class Head { evidential, gaussian, point };
enum class Activation { relu, tanh };

std::string_view to_string(Head h);
std::string_view to_string(Activation a);
Head parse_head(std::string_view s);
Activation parse_activation(std::string_view s);

struct MlpConfig {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_layers{100, 100, 100};
  std::size_t targets = 1;
  Head head = Head::evidential;
  Activation activation = Activation::relu;
  double dropout_p = 0.0;

  std::size_t outputs_per_target() const;
  std::size_t output_width() const { return targets * outputs_per_target(); }
  /// Throws ConfigError.
  void validate() const;

  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

/// Flat trainable parameters with their gradient accumulator and Adam state.
struct ParameterStore {
  std::vector<double> values;
  std::vector<double> grads;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;

  explicit ParameterStore(std::size_t n = 0)
      : values(n, 0.0), grads(n, 0.0), first_moment(n, 0.0), second_moment(n, 0.0) {}

  std::size_t size() const { return values.size(); }
  void zero_grad();
};

struct AdamConfig {
  double learning_rate = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update from the accumulated gradients, which are
/// cleared afterwards.
void adam_step(ParameterStore& store, const AdamConfig& cfg);

/// Activations recorded by a forward pass, consumed by Mlp::backward.
class Tape {
 public:
  bool empty() const { return layer_inputs_.empty(); }
  const Eigen::MatrixXd& raw_output() const { return output_; }
  std::size_t batch_size() const { return static_cast<std::size_t>(output_.rows()); }

 private:
  friend class Mlp;
  std::vector<Eigen::MatrixXd> layer_inputs_;
  std::vector<Eigen::MatrixXd> pre_activations_;
  std::vector<Eigen::MatrixXd> masks_;  // inverted-dropout scale per unit, empty when off
  Eigen::MatrixXd output_;
};

class Mlp {
 public:
  /// Uniform He-style init U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)), zero biases.
  Mlp(MlpConfig cfg, std::mt19937_64& rng);
  Mlp(MlpConfig cfg, std::uint64_t seed);
  /// Adopt an existing parameter vector (checkpoint load).
  Mlp(MlpConfig cfg, std::vector<double> parameters);

  const MlpConfig& config() const { return cfg_; }
  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }
  std::size_t parameter_count() const { return store_.size(); }

  /// Raw head outputs (batch x output_width), dropout disabled.
  Eigen::MatrixXd forward_raw(const Eigen::MatrixXd& x) const;

  /// Forward pass that records activations. Dropout masks are drawn from
  /// `rng` when it is non-null and dropout_p > 0.
  Tape forward(const Eigen::MatrixXd& x, std::mt19937_64* rng = nullptr) const;

  /// Accumulate d loss / d theta into store().grads given d loss / d raw
  /// outputs for the batch recorded in `tape`. Throws StateError on an empty
  /// tape and ShapeError on mismatched gradients.
  void backward(const Tape& tape, const Eigen::MatrixXd& grad_raw);

  /// Count of full network evaluations performed by this instance.
  std::uint64_t pass_count() const { return passes_; }

 private:
  struct LayerView {
    std::size_t in;
    std::size_t out;
    std::size_t weight_offset;
    std::size_t bias_offset;
  };

  void build_layout();
  void check_input(const Eigen::MatrixXd& x) const;

  MlpConfig cfg_;
  std::vector<LayerView> layers_;
  ParameterStore store_;
  mutable std::uint64_t passes_ = 0;
};

/// Floor on each softplus evidence output so that nu, beta > 0 and alpha > 1
/// survive softplus underflow. Training keeps the softplus slope below it.
inline constexpr double kMinEvidence = 1e-8;

/// Map four raw outputs through the evidential activations:
/// gamma linear, nu = softplus, alpha = softplus + 1, beta = softplus
/// (each evidence output clamped below at kMinEvidence).
EvidentialParams evidential_activation(double raw_gamma, double raw_nu, double raw_alpha,
                                       double raw_beta);

/// Lower bound added to softplus for the Gaussian variance head.
inline constexpr double kMinGaussianVariance = 1e-6;

struct GaussianOutput {
  double mu = 0.0;
  double sigma2 = 1.0;
};

GaussianOutput gaussian_activation(double raw_mu, double raw_sigma2);

/// Per-sample, per-target parameters; element [b * targets + t].
std::vector<EvidentialParams> forward_evidential(const Mlp& net, const Eigen::MatrixXd& x);
std::vector<EvidentialParams> forward_evidential(const Mlp& net, std::span<const double> x);
std::vector<GaussianOutput> forward_gaussian(const Mlp& net, const Eigen::MatrixXd& x);
Eigen::MatrixXd forward_point(const Mlp& net, const Eigen::MatrixXd& x);

/// n stochastic passes with independent dropout masks drawn from `seed`.
/// Requires a Gaussian head and dropout_p > 0.
std::vector<std::vector<GaussianOutput>> mc_dropout_forward(const Mlp& net,
                                                            const Eigen::MatrixXd& x,
                                                            std::size_t n, std::uint64_t seed);

}  // namespace edr
