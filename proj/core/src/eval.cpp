#include "edr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edr/errors.hpp"

namespace edr {
namespace {

void require_aligned(std::size_t a, std::size_t b, const char* op) {
  if (a == 0 || b == 0) throw DomainError(std::string(op) + ": empty input");
  if (a != b) throw ShapeError(std::string(op) + ": inputs have different lengths");
}

double sum_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  require_aligned(predictions.size(), targets.size(), "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = predictions[i] - targets[i];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(targets.size()));
}

double predictive_nll(std::span<const PredictiveDistribution> dists,
                      std::span<const double> targets) {
  require_aligned(dists.size(), targets.size(), "predictive_nll");
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) s -= log_pdf(dists[i], targets[i]);
  return s / static_cast<double>(targets.size());
}

std::vector<double> default_calibration_levels() {
  std::vector<double> levels;
  for (int k = 1; k <= 19; ++k) levels.push_back(0.05 * k);
  return levels;
}

CalibrationCurve calibration_curve(std::span<const PredictiveDistribution> dists,
                                   std::span<const double> targets,
                                   std::span<const double> levels) {
  require_aligned(dists.size(), targets.size(), "calibration_curve");
  if (levels.empty()) throw DomainError("calibration_curve: no levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0) || (i > 0 && !(levels[i] > levels[i - 1]))) {
      throw DomainError("calibration_curve: levels must be strictly increasing in (0, 1)");
    }
  }
  // Half-width of the smallest central interval containing each target.
  std::vector<double> reach(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    reach[i] = std::fabs(2.0 * cdf(dists[i], targets[i]) - 1.0);
  }
  std::sort(reach.begin(), reach.end());

  CalibrationCurve c;
  c.levels.assign(levels.begin(), levels.end());
  double err = 0.0;
  for (double level : levels) {
    const auto inside = std::upper_bound(reach.begin(), reach.end(), level) - reach.begin();
    const double frac = static_cast<double>(inside) / static_cast<double>(reach.size());
    c.observed.push_back(frac);
    err += std::fabs(frac - level);
  }
  c.error = err / static_cast<double>(levels.size());
  return c;
}

std::vector<CutoffPoint> cutoff_curve(std::span<const double> uncertainty,
                                      std::span<const double> errors) {
  require_aligned(uncertainty.size(), errors.size(), "cutoff_curve");
  const std::size_t n = errors.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return uncertainty[a] < uncertainty[b]; });

  // Prefix sums of squared errors in confidence order.
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + errors[order[i]] * errors[order[i]];
  }
  std::vector<CutoffPoint> curve;
  for (int p = 0; p < 100; p += 5) {
    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>((static_cast<std::size_t>(100 - p) * n + 99) / 100));
    const double mse = (p == 0 ? sum_squares(errors) : prefix[keep]) / static_cast<double>(keep);
    curve.push_back({static_cast<double>(p), std::sqrt(mse)});
  }
  return curve;
}

double ood_auc(std::span<const double> id_scores, std::span<const double> ood_scores) {
  if (id_scores.empty() || ood_scores.empty()) throw DomainError("ood_auc: empty score set");
  struct Entry {
    double score;
    bool ood;
  };
  std::vector<Entry> all;
  all.reserve(id_scores.size() + ood_scores.size());
  for (double s : id_scores) all.push_back({s, false});
  for (double s : ood_scores) all.push_back({s, true});
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // Twice the midrank keeps everything integral.
  double twice_rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::size_t ood_in_group = 0;
    while (j < all.size() && all[j].score == all[i].score) {
      ood_in_group += all[j].ood ? 1 : 0;
      ++j;
    }
    const double twice_mid = static_cast<double>(i + 1 + j);
    twice_rank_sum += twice_mid * static_cast<double>(ood_in_group);
    i = j;
  }
  const auto n_ood = static_cast<double>(ood_scores.size());
  const auto n_id = static_cast<double>(id_scores.size());
  const double twice_u = twice_rank_sum - n_ood * (n_ood + 1.0);
  return twice_u / (2.0 * n_ood * n_id);
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> values) {
  if (values.empty()) throw DomainError("empirical_cdf: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.push_back({sorted[i], static_cast<double>(i + 1) / static_cast<double>(sorted.size())});
  }
  return out;
}

double time_median_seconds(const std::function<void()>& fn, std::size_t repeats) {
  repeats = std::max<std::size_t>(repeats, 20);
  fn();
  std::vector<double> samples;
  samples.reserve(repeats);
  for (std::size_t i = 0; i < repeats; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
  return samples[samples.size() / 2];
}

std::vector<double> flatten_targets(const Dataset& d) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(d.targets.size()));
  for (Eigen::Index b = 0; b < d.targets.rows(); ++b) {
    for (Eigen::Index t = 0; t < d.targets.cols(); ++t) out.push_back(d.targets(b, t));
  }
  return out;
}

namespace {

double mean_of(const std::vector<UncertainPrediction>& preds, double UncertainPrediction::*field) {
  double s = 0.0;
  for (const auto& p : preds) s += p.*field;
  return s / static_cast<double>(preds.size());
}

}  // namespace

EvalReport evaluate(const Model& model, const Dataset& test, const Dataset* ood,
                    const EvalOptions& opts) {
  test.validate();
  if (test.normalized()) throw DomainError("evaluate: pass the test set in original units");
  const auto preds = model.predict(test.features);
  const auto targets = flatten_targets(test);

  std::vector<double> point(preds.size());
  std::vector<double> errors(preds.size());
  std::vector<double> epistemic(preds.size());
  std::vector<double> entropy_id(preds.size());
  std::vector<PredictiveDistribution> dists;
  dists.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    point[i] = preds[i].prediction;
    errors[i] = preds[i].prediction - targets[i];
    epistemic[i] = preds[i].epistemic;
    entropy_id[i] = preds[i].entropy;
    dists.push_back(preds[i].distribution);
  }

  EvalReport r;
  r.method = std::string(to_string(model.method()));
  r.samples = preds.size();
  r.rmse = rmse(point, targets);
  r.nll = predictive_nll(dists, targets);
  r.mean_epistemic = mean_of(preds, &UncertainPrediction::epistemic);
  r.mean_aleatoric = mean_of(preds, &UncertainPrediction::aleatoric);
  r.mean_entropy = mean_of(preds, &UncertainPrediction::entropy);
  const auto levels = default_calibration_levels();
  r.calibration = calibration_curve(dists, targets, levels);
  r.cutoff = cutoff_curve(epistemic, errors);
  r.passes_per_prediction = model.passes_per_prediction();

  if (ood != nullptr) {
    const auto ood_preds = model.predict(ood->features);
    std::vector<double> entropy_ood;
    entropy_ood.reserve(ood_preds.size());
    for (const auto& p : ood_preds) entropy_ood.push_back(p.entropy);
    r.ood_auc = ood_auc(entropy_id, entropy_ood);
    r.ood_mean_entropy = mean_of(ood_preds, &UncertainPrediction::entropy);
    r.ood_mean_epistemic = mean_of(ood_preds, &UncertainPrediction::epistemic);
  }
  if (opts.measure_timing) {
    r.inference_seconds_per_batch =
        time_median_seconds([&] { (void)model.predict(test.features); }, opts.timing_repeats);
  }
  return r;
}

nlohmann::ordered_json to_json_without_timing(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["method"] = r.method;
  j["samples"] = r.samples;
  j["rmse"] = r.rmse;
  j["nll"] = r.nll;
  j["mean_epistemic"] = r.mean_epistemic;
  j["mean_aleatoric"] = r.mean_aleatoric;
  j["mean_entropy"] = r.mean_entropy;
  j["calibration"] = {{"levels", r.calibration.levels},
                      {"observed", r.calibration.observed},
                      {"error", r.calibration.error}};
  auto curve = nlohmann::ordered_json::array();
  for (const auto& p : r.cutoff) curve.push_back({{"percentile", p.percentile}, {"rmse", p.rmse}});
  j["cutoff_curve"] = curve;
  j["ood_auc"] = r.ood_auc ? nlohmann::ordered_json(*r.ood_auc) : nlohmann::ordered_json();
  if (r.ood_mean_entropy) j["ood_mean_entropy"] = *r.ood_mean_entropy;
  if (r.ood_mean_epistemic) j["ood_mean_epistemic"] = *r.ood_mean_epistemic;
  return j;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  auto j = to_json_without_timing(r);
  j["timing"] = {{"inference_seconds_per_batch", r.inference_seconds_per_batch},
                 {"passes_per_prediction", r.passes_per_prediction}};
  return j;
}

}  // namespace edr
