#pragma once

// Datasets: synthetic generators for the cubic toy problems, CSV ingestion,
// train-statistics normalization and the repeated random-split protocol.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace edr {

/// Per-column affine statistics. `scale` is the standard deviation, or 1 for
/// zero-variance columns (which are centered only).
struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> scale;

  friend bool operator==(const ColumnStats&, const ColumnStats&) = default;
};

struct Dataset {
  Eigen::MatrixXd features;  ///< n x d
  Eigen::MatrixXd targets;   ///< n x t
  std::optional<ColumnStats> feature_stats;
  std::optional<ColumnStats> target_stats;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t target_dim() const { return static_cast<std::size_t>(targets.cols()); }
  bool normalized() const { return target_stats.has_value(); }

  /// Throws DomainError when empty, misaligned, non-finite, or when only one
  /// of the two statistics blocks is present.
  void validate() const;

  Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// How to read the "N(0, 3)" noise of the cubic toy problem.
enum class NoiseInterpretation { variance, stddev };

NoiseInterpretation parse_noise_interpretation(std::string_view s);
std::string_view to_string(NoiseInterpretation n);

struct CubicOptions {
  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  double train_lo = -4.0;
  double train_hi = 4.0;
  double test_lo = -6.0;
  double test_hi = 6.0;
  double noise = 3.0;
  NoiseInterpretation interpretation = NoiseInterpretation::variance;
};

struct ToyData {
  Dataset train;
  Dataset test;
  std::vector<double> test_truth;  ///< noiseless x^3 at the test inputs
};

/// y = x^3 + eps with x uniform on the train / test ranges.
ToyData gen_cubic(const CubicOptions& opts, std::uint64_t seed);

struct NoiseProfile {
  double sd_min = 1.0;
  double sd_max = 9.0;
  double width = 1.0;

  /// sd_min + (sd_max - sd_min) exp(-x^2 / (2 width^2)).
  double sd(double x) const;
};

struct HeteroscedasticData {
  Dataset data;
  std::vector<double> true_sd;
};

/// y = x^3 + eps(x) with x uniform on [lo, hi] and noise peaked at x = 0.
HeteroscedasticData gen_heteroscedastic(std::size_t n, std::uint64_t seed,
                                        const NoiseProfile& profile = {}, double lo = -4.0,
                                        double hi = 4.0);

/// Comma-separated numeric table whose final `targets` columns are targets.
/// A first row containing any non-numeric cell is treated as a header.
Dataset load_csv(const std::filesystem::path& path, std::size_t targets = 1);
Dataset parse_csv(std::string_view text, std::size_t targets = 1);

/// Writes features then targets, with an x0..,y0.. header; values use
/// shortest round-trip formatting.
void write_csv(const Dataset& d, const std::filesystem::path& path);

ColumnStats column_stats(const Eigen::MatrixXd& m);

struct NormalizedPair {
  Dataset train;
  Dataset test;
};

/// Normalize features and targets with statistics computed on `train` only.
NormalizedPair normalize(const Dataset& train, const Dataset& test);

/// Apply known statistics to a raw dataset.
Dataset apply_normalization(const Dataset& raw, const ColumnStats& features,
                            const ColumnStats& targets);

/// Map a normalized target value of column `col` back to original units.
double denormalize_target(double value, const ColumnStats& stats, std::size_t col);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// `trials` independent shuffles; trial i uses a seed derived from (seed, i).
/// The test part holds round(n * test_fraction) rows, at least one.
std::vector<Split> benchmark_splits(const Dataset& d, std::size_t trials = 20,
                                    double test_fraction = 0.1, std::uint64_t seed = 0);

/// Deterministic child seed for stream `index` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace edr
