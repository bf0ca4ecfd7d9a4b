#include "edr/diffnet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edr/errors.hpp"
#include "edr/special.hpp"

namespace edr {
namespace {

using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
using MutMap = Eigen::Map<Eigen::MatrixXd>;
using ConstVec = Eigen::Map<const Eigen::RowVectorXd>;
using MutVec = Eigen::Map<Eigen::RowVectorXd>;

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

Eigen::MatrixXd activation_slope(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::relu) return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - z.array().tanh().square()).matrix();
}

}  // namespace

std::string_view to_string(Head h) {
  switch (h) {
    case Head::evidential: return "evidential";
    case Head::gaussian: return "gaussian";
    case Head::point: return "point";
  }
  return "unknown";
}

std::string_view to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

Head parse_head(std::string_view s) {
  if (s == "evidential") return Head::evidential;
  if (s == "gaussian") return Head::gaussian;
  if (s == "point") return Head::point;
  throw ConfigError("unknown head '" + std::string(s) + "'");
}

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

std::size_t MlpConfig::outputs_per_target() const {
  switch (head) {
    case Head::evidential: return 4;
    case Head::gaussian: return 2;
    case Head::point: return 1;
  }
  return 0;
}

void MlpConfig::validate() const {
  if (input_dim == 0) throw ConfigError("mlp: input_dim must be positive");
  if (targets == 0) throw ConfigError("mlp: targets must be positive");
  for (auto w : hidden_layers) {
    if (w == 0) throw ConfigError("mlp: hidden layer widths must be positive");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw ConfigError("mlp: dropout_p must lie in [0, 1)");
  }
}

void ParameterStore::zero_grad() { std::fill(grads.begin(), grads.end(), 0.0); }

void adam_step(ParameterStore& store, const AdamConfig& cfg) {
  ++store.step;
  const double t = static_cast<double>(store.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const double g = store.grads[i];
    store.first_moment[i] = cfg.beta1 * store.first_moment[i] + (1.0 - cfg.beta1) * g;
    store.second_moment[i] = cfg.beta2 * store.second_moment[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = store.first_moment[i] / correction1;
    const double v_hat = store.second_moment[i] / correction2;
    store.values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
  store.zero_grad();
}

Mlp::Mlp(MlpConfig cfg, std::mt19937_64& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  build_layout();
  for (const auto& layer : layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < layer.in * layer.out; ++i) {
      store_.values[layer.weight_offset + i] = dist(rng);
    }
  }
}

Mlp::Mlp(MlpConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  std::mt19937_64 rng(seed);
  *this = Mlp(cfg_, rng);
}

Mlp::Mlp(MlpConfig cfg, std::vector<double> parameters) : cfg_(std::move(cfg)) {
  cfg_.validate();
  build_layout();
  if (parameters.size() != store_.size()) {
    throw ShapeError("mlp: parameter vector has " + std::to_string(parameters.size()) +
                     " entries, architecture needs " + std::to_string(store_.size()));
  }
  store_.values = std::move(parameters);
}

void Mlp::build_layout() {
  layers_.clear();
  std::size_t offset = 0;
  std::size_t in = cfg_.input_dim;
  auto add = [&](std::size_t out) {
    layers_.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
    in = out;
  };
  for (auto w : cfg_.hidden_layers) add(w);
  add(cfg_.output_width());
  store_ = ParameterStore(offset);
}

void Mlp::check_input(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != cfg_.input_dim) {
    throw ShapeError("mlp: input has " + std::to_string(x.cols()) + " features, expected " +
                     std::to_string(cfg_.input_dim));
  }
}

Eigen::MatrixXd Mlp::forward_raw(const Eigen::MatrixXd& x) const {
  check_input(x);
  ++passes_;
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    ConstMap w(store_.values.data() + layer.weight_offset, layer.out, layer.in);
    ConstVec b(store_.values.data() + layer.bias_offset, layer.out);
    Eigen::MatrixXd z = a * w.transpose();
    z.rowwise() += b;
    a = (l + 1 < layers_.size()) ? activate(z, cfg_.activation) : std::move(z);
  }
  return a;
}

Tape Mlp::forward(const Eigen::MatrixXd& x, std::mt19937_64* rng) const {
  check_input(x);
  ++passes_;
  const bool dropout = rng != nullptr && cfg_.dropout_p > 0.0;
  const double keep = 1.0 - cfg_.dropout_p;
  Tape tape;
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    ConstMap w(store_.values.data() + layer.weight_offset, layer.out, layer.in);
    ConstVec b(store_.values.data() + layer.bias_offset, layer.out);
    Eigen::MatrixXd z = a * w.transpose();
    z.rowwise() += b;
    tape.layer_inputs_.push_back(std::move(a));
    if (l + 1 == layers_.size()) {
      tape.output_ = std::move(z);
      break;
    }
    a = activate(z, cfg_.activation);
    if (dropout) {
      std::bernoulli_distribution draw(keep);
      Eigen::MatrixXd mask(z.rows(), z.cols());
      for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        for (Eigen::Index i = 0; i < mask.rows(); ++i) {
          mask(i, j) = draw(*rng) ? 1.0 / keep : 0.0;
        }
      }
      a = a.cwiseProduct(mask);
      tape.masks_.push_back(std::move(mask));
    }
    tape.pre_activations_.push_back(std::move(z));
  }
  return tape;
}

void Mlp::backward(const Tape& tape, const Eigen::MatrixXd& grad_raw) {
  if (tape.empty()) throw StateError("mlp: backward called without a recorded forward pass");
  if (grad_raw.rows() != tape.output_.rows() || grad_raw.cols() != tape.output_.cols()) {
    throw ShapeError("mlp: output gradient shape does not match the recorded batch");
  }
  Eigen::MatrixXd g = grad_raw;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    MutMap dw(store_.grads.data() + layer.weight_offset, layer.out, layer.in);
    MutVec db(store_.grads.data() + layer.bias_offset, layer.out);
    dw.noalias() += g.transpose() * tape.layer_inputs_[l];
    db += g.colwise().sum();
    if (l == 0) break;
    ConstMap w(store_.values.data() + layer.weight_offset, layer.out, layer.in);
    Eigen::MatrixXd upstream = g * w;
    if (!tape.masks_.empty()) upstream = upstream.cwiseProduct(tape.masks_[l - 1]);
    g = upstream.cwiseProduct(activation_slope(tape.pre_activations_[l - 1], cfg_.activation));
  }
}

EvidentialParams evidential_activation(double raw_gamma, double raw_nu, double raw_alpha,
                                       double raw_beta) {
  auto evidence = [](double raw) { return std::max(special::softplus(raw), kMinEvidence); };
  return EvidentialParams{raw_gamma, evidence(raw_nu), evidence(raw_alpha) + 1.0,
                          evidence(raw_beta)};
}

GaussianOutput gaussian_activation(double raw_mu, double raw_sigma2) {
  return GaussianOutput{raw_mu, special::softplus(raw_sigma2) + kMinGaussianVariance};
}

std::vector<EvidentialParams> forward_evidential(const Mlp& net, const Eigen::MatrixXd& x) {
  if (net.config().head != Head::evidential) {
    throw ConfigError("forward_evidential: network does not have an evidential head");
  }
  const Eigen::MatrixXd raw = net.forward_raw(x);
  const std::size_t targets = net.config().targets;
  std::vector<EvidentialParams> out;
  out.reserve(static_cast<std::size_t>(raw.rows()) * targets);
  for (Eigen::Index b = 0; b < raw.rows(); ++b) {
    for (std::size_t t = 0; t < targets; ++t) {
      const auto c = static_cast<Eigen::Index>(4 * t);
      out.push_back(
          evidential_activation(raw(b, c), raw(b, c + 1), raw(b, c + 2), raw(b, c + 3)));
    }
  }
  return out;
}

std::vector<EvidentialParams> forward_evidential(const Mlp& net, std::span<const double> x) {
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = x[i];
  return forward_evidential(net, row);
}

namespace {

std::vector<GaussianOutput> gaussian_outputs(const Eigen::MatrixXd& raw, std::size_t targets) {
  std::vector<GaussianOutput> out;
  out.reserve(static_cast<std::size_t>(raw.rows()) * targets);
  for (Eigen::Index b = 0; b < raw.rows(); ++b) {
    for (std::size_t t = 0; t < targets; ++t) {
      const auto c = static_cast<Eigen::Index>(2 * t);
      out.push_back(gaussian_activation(raw(b, c), raw(b, c + 1)));
    }
  }
  return out;
}

}  // namespace

std::vector<GaussianOutput> forward_gaussian(const Mlp& net, const Eigen::MatrixXd& x) {
  if (net.config().head != Head::gaussian) {
    throw ConfigError("forward_gaussian: network does not have a gaussian head");
  }
  return gaussian_outputs(net.forward_raw(x), net.config().targets);
}

Eigen::MatrixXd forward_point(const Mlp& net, const Eigen::MatrixXd& x) {
  if (net.config().head != Head::point) {
    throw ConfigError("forward_point: network does not have a point head");
  }
  return net.forward_raw(x);
}

std::vector<std::vector<GaussianOutput>> mc_dropout_forward(const Mlp& net,
                                                            const Eigen::MatrixXd& x,
                                                            std::size_t n, std::uint64_t seed) {
  if (net.config().head != Head::gaussian) {
    throw ConfigError("mc_dropout_forward: network does not have a gaussian head");
  }
  if (!(net.config().dropout_p > 0.0)) {
    throw ConfigError("mc_dropout_forward: network was built without dropout");
  }
  if (n == 0) throw ConfigError("mc_dropout_forward: n must be positive");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<GaussianOutput>> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Tape tape = net.forward(x, &rng);
    samples.push_back(gaussian_outputs(tape.raw_output(), net.config().targets));
  }
  return samples;
}

}  // namespace edr
