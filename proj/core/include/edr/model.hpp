#pragma once

// A trained uncertainty model of any method, together with the
// normalization of its training data. predict() always answers in original
// target units.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "edr/checkpoint.hpp"
#include "edr/data.hpp"
#include "edr/diffnet.hpp"
#include "edr/predictive.hpp"
#include "edr/training.hpp"

namespace edr {

enum class Method { evidential, gaussian, ensemble, dropout };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct MethodOptions {
  std::size_t ensemble_size = 5;
  std::size_t dropout_samples = 5;
  double dropout_p = 0.1;
  std::uint64_t dropout_seed = 0;
  std::size_t jobs = 1;
};

class Model {
 public:
  Model(Method method, std::vector<Mlp> nets, std::optional<ColumnStats> feature_stats,
        std::optional<ColumnStats> target_stats, MethodOptions opts = {});

  Method method() const { return method_; }
  std::span<const Mlp> networks() const { return nets_; }
  const MethodOptions& options() const { return opts_; }
  const std::optional<ColumnStats>& feature_stats() const { return feature_stats_; }
  const std::optional<ColumnStats>& target_stats() const { return target_stats_; }
  std::size_t targets() const { return nets_.front().config().targets; }

  /// One entry per sample and target ([b * targets + t]); `features` are in
  /// original (unnormalized) units.
  std::vector<UncertainPrediction> predict(const Eigen::MatrixXd& features) const;

  /// Network evaluations needed per prediction: 1 evidential or Gaussian,
  /// M for an ensemble, n for MC dropout.
  std::size_t passes_per_prediction() const;

 private:
  Method method_;
  std::vector<Mlp> nets_;
  std::optional<ColumnStats> feature_stats_;
  std::optional<ColumnStats> target_stats_;
  MethodOptions opts_;
};

struct FitResult {
  Model model;
  std::vector<std::vector<TraceRow>> traces;  ///< one per network
};

/// Train `method` on `train` (normalized or not). The head in `mlp_cfg` is
/// overridden by the method; dropout models use opts.dropout_p.
FitResult fit(Method method, const Dataset& train, MlpConfig mlp_cfg, const TrainConfig& cfg,
              const MethodOptions& opts = {});

/// Writes `<stem>.json` (manifest) and one checkpoint per network
/// (`<stem>.ckpt`, or `<stem>_member<i>.ckpt` for ensembles). Returns the
/// manifest path.
std::filesystem::path save_model(const Model& model, const std::filesystem::path& dir,
                                 std::string_view stem = "model");
Model load_model(const std::filesystem::path& manifest);

}  // namespace edr
