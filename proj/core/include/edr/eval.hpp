#pragma once

// Uncertainty-quality metrics and the serialized evaluation report.

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "edr/model.hpp"
#include "edr/predictive.hpp"

namespace edr {

inline constexpr int kReportSchemaVersion = 1;

double rmse(std::span<const double> predictions, std::span<const double> targets);

/// Mean negative log predictive density.
double predictive_nll(std::span<const PredictiveDistribution> dists,
                      std::span<const double> targets);

struct CalibrationCurve {
  std::vector<double> levels;
  std::vector<double> observed;
  double error = 0.0;  ///< mean |observed - level|
};

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_calibration_levels();

/// Coverage of central (equal-tailed) intervals. A target lies in the central
/// c-interval iff |2 F(y) - 1| <= c, so each distribution's CDF is evaluated
/// once per target rather than inverted per level.
CalibrationCurve calibration_curve(std::span<const PredictiveDistribution> dists,
                                   std::span<const double> targets,
                                   std::span<const double> levels);

struct CutoffPoint {
  double percentile = 0.0;  ///< share of least-confident samples removed, in %
  double rmse = 0.0;
};

/// For p = 0, 5, ..., 95 keep the ceil((100 - p)% * n) samples with the lowest
/// uncertainty (ties broken by index) and report their RMSE.
std::vector<CutoffPoint> cutoff_curve(std::span<const double> uncertainty,
                                      std::span<const double> errors);

/// P(ood > id) + 1/2 P(ood == id) via midranks; higher score means more OOD.
double ood_auc(std::span<const double> id_scores, std::span<const double> ood_scores);

struct CdfPoint {
  double value = 0.0;
  double cumulative = 0.0;
};

/// Empirical CDF at each sorted sample.
std::vector<CdfPoint> empirical_cdf(std::span<const double> values);

/// Median wall-clock seconds of `fn` over `repeats` (>= 20) runs, after one
/// warm-up call.
double time_median_seconds(const std::function<void()>& fn, std::size_t repeats = 20);

struct EvalReport {
  std::string method;
  std::size_t samples = 0;
  double rmse = 0.0;
  double nll = 0.0;
  double mean_epistemic = 0.0;
  double mean_aleatoric = 0.0;
  double mean_entropy = 0.0;
  CalibrationCurve calibration;
  std::vector<CutoffPoint> cutoff;
  std::optional<double> ood_auc;
  std::optional<double> ood_mean_entropy;
  std::optional<double> ood_mean_epistemic;
  double inference_seconds_per_batch = 0.0;
  std::size_t passes_per_prediction = 1;
};

struct EvalOptions {
  std::size_t timing_repeats = 20;
  bool measure_timing = true;
};

/// Metrics of `model` on `test` (original units). When `ood` is given, its
/// entropies are scored against the in-distribution entropies.
EvalReport evaluate(const Model& model, const Dataset& test, const Dataset* ood = nullptr,
                    const EvalOptions& opts = {});

nlohmann::ordered_json to_json(const EvalReport& r);
/// Same report without wall-clock fields, for reproducibility comparisons.
nlohmann::ordered_json to_json_without_timing(const EvalReport& r);

/// Column-major targets of a dataset flattened as [b * t_count + t].
std::vector<double> flatten_targets(const Dataset& d);

}  // namespace edr
