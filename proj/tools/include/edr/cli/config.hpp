#pragma once
// Run configuration shared by every command. Values come from a preset, then
// an optional JSON config file, then command-line flags (later wins).

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "edr/data.hpp"
#include "edr/diffnet.hpp"
#include "edr/losses.hpp"
#include "edr/model.hpp"

namespace edr::cli {

enum class Command { generate, train, eval, benchmark, ablate_lambda, compare };

std::string_view to_string(Command c);
Command parse_command(std::string_view s);

struct RunConfig {
  Command command = Command::train;
  std::string preset = "toy";

  // Data source: "cubic", "heteroscedastic" or "csv".
  std::string dataset = "cubic";
  std::filesystem::path csv;
  std::size_t csv_targets = 1;
  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  NoiseInterpretation noise_interpretation = NoiseInterpretation::variance;
  double test_fraction = 0.1;
  bool normalize = false;

  // Model and optimization.
  Method method = Method::evidential;
  double lambda = 0.01;
  RegularizerKind reg_kind = RegularizerKind::abs_error;
  double epsilon = 1e-2;
  std::vector<std::size_t> hidden{100, 100, 100};
  Activation activation = Activation::relu;
  double learning_rate = 5e-3;
  std::size_t iterations = 5000;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  std::size_t ensemble_size = 5;
  std::size_t dropout_samples = 5;
  double dropout_p = 0.1;

  // Command specifics.
  std::size_t trials = 20;
  std::size_t jobs = 1;
  std::vector<Method> methods{Method::evidential, Method::ensemble, Method::dropout};
  std::vector<double> lambdas{0.0, 1e-4, 1e-2, 1e-1, 1.0};
  std::filesystem::path model;                ///< manifest for eval
  std::vector<std::filesystem::path> models;  ///< manifests for compare, in `methods` order
  std::size_t timing_repeats = 20;
  std::filesystem::path out = "edr_out";

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Built-in presets: "toy" (cubic problem, 3x100 relu, lr 5e-3, 5000
/// iterations, batch 128, lambda 0.01) and "benchmark" (CSV tables,
/// normalized, 1x50, lr 1e-2, 3000 iterations, batch 16).
RunConfig preset(std::string_view name);

/// Apply a JSON object whose keys mirror the long flag names (dashes or
/// underscores). Unknown keys are a ConfigError.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Set one field from its flag name and textual value.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

std::vector<std::size_t> parse_hidden(std::string_view s);
RegularizerKind parse_reg_kind(std::string_view s);
std::string_view to_string(RegularizerKind k);

MlpConfig mlp_config(const RunConfig& cfg, std::size_t input_dim, std::size_t targets);
TrainConfig train_config(const RunConfig& cfg);
MethodOptions method_options(const RunConfig& cfg);

/// Resolved configuration echoed into outputs.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace edr::cli
