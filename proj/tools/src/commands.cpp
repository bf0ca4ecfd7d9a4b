#include "edr/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include "edr/cli/output.hpp"
#include "edr/cli/reference.hpp"
#include "edr/errors.hpp"
#include "edr/eval.hpp"
#include "edr/parallel.hpp"

namespace edr::cli {
namespace {

namespace fs = std::filesystem;

// Train split, in-distribution test rows and (for generated problems) the
// out-of-distribution rows, all in original units.
struct Problem {
  Dataset train;
  Dataset test;
  std::optional<Dataset> ood;
};

// Rows of `d` whose single feature lies inside [lo, hi].
std::pair<Dataset, Dataset> split_by_range(const Dataset& d, double lo, double hi) {
  std::vector<std::size_t> inside, outside;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = d.features(static_cast<Eigen::Index>(i), 0);
    (x >= lo && x <= hi ? inside : outside).push_back(i);
  }
  return {d.subset(inside), d.subset(outside)};
}

Dataset concat(const Dataset& a, const Dataset& b) {
  Dataset out;
  out.features.resize(a.features.rows() + b.features.rows(), a.features.cols());
  out.features << a.features, b.features;
  out.targets.resize(a.targets.rows() + b.targets.rows(), a.targets.cols());
  out.targets << a.targets, b.targets;
  return out;
}

Problem load_problem(const RunConfig& cfg) {
  Problem p;
  if (cfg.dataset == "cubic") {
    CubicOptions o;
    o.n_train = cfg.n_train;
    o.n_test = cfg.n_test;
    o.interpretation = cfg.noise_interpretation;
    const ToyData toy = gen_cubic(o, cfg.seed);
    p.train = toy.train;
    auto [id, ood] = split_by_range(toy.test, o.train_lo, o.train_hi);
    p.test = std::move(id);
    if (ood.size() > 0) p.ood = std::move(ood);
  } else if (cfg.dataset == "heteroscedastic") {
    p.train = gen_heteroscedastic(cfg.n_train, cfg.seed).data;
    const auto test = gen_heteroscedastic(cfg.n_test, derive_seed(cfg.seed, 1), {}, -6.0, 6.0);
    auto [id, ood] = split_by_range(test.data, -4.0, 4.0);
    p.test = std::move(id);
    if (ood.size() > 0) p.ood = std::move(ood);
  } else {
    const Dataset full = load_csv(cfg.csv, cfg.csv_targets);
    auto split = benchmark_splits(full, 1, cfg.test_fraction, cfg.seed).front();
    p.train = std::move(split.train);
    p.test = std::move(split.test);
  }
  if (p.test.size() == 0) throw DomainError("no in-distribution test rows were generated");
  return p;
}

// Training data in the units the network sees.
Dataset fit_view(const RunConfig& cfg, const Dataset& train, const Dataset& test) {
  return cfg.normalize ? normalize(train, test).train : train;
}

FitResult fit_method(const RunConfig& cfg, Method method, const Dataset& train,
                     const Dataset& test) {
  RunConfig c = cfg;
  c.method = method;
  const Dataset view = fit_view(c, train, test);
  return fit(method, view, mlp_config(c, view.feature_dim(), view.target_dim()), train_config(c),
             method_options(c));
}

void write_trace(const fs::path& path, const std::vector<TraceRow>& trace) {
  std::vector<std::vector<Cell>> rows;
  rows.reserve(trace.size());
  for (const auto& r : trace) rows.push_back({r.iteration, r.mean_loss, r.mean_nll, r.mean_reg});
  write_csv_table(path, {"iteration", "mean_loss", "mean_nll", "mean_reg"}, rows);
}

void write_traces(const fs::path& dir, const std::vector<std::vector<TraceRow>>& traces) {
  write_trace(dir / "loss_trace.csv", traces.front());
  if (traces.size() > 1) {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      write_trace(dir / ("loss_trace_member" + std::to_string(i) + ".csv"), traces[i]);
    }
  }
}

std::vector<double> entropies(const std::vector<UncertainPrediction>& preds) {
  std::vector<double> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(p.entropy);
  return out;
}

// Per-row predictions over ID then OOD rows, sorted by the first feature.
void write_predictions(const fs::path& path, const Model& model, const Problem& p) {
  const Dataset all = p.ood ? concat(p.test, *p.ood) : p.test;
  const auto preds = model.predict(all.features);
  const std::size_t t_count = all.target_dim();
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return all.features(static_cast<Eigen::Index>(a), 0) <
           all.features(static_cast<Eigen::Index>(b), 0);
  });
  std::vector<std::string> header;
  for (std::size_t j = 0; j < all.feature_dim(); ++j) header.push_back("x" + std::to_string(j));
  for (const char* h : {"target_index", "y", "prediction", "aleatoric", "epistemic", "entropy",
                        "in_distribution"}) {
    header.emplace_back(h);
  }
  std::vector<std::vector<Cell>> rows;
  for (std::size_t b : order) {
    for (std::size_t t = 0; t < t_count; ++t) {
      const auto& u = preds[b * t_count + t];
      std::vector<Cell> row;
      for (std::size_t j = 0; j < all.feature_dim(); ++j) {
        row.emplace_back(all.features(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)));
      }
      row.emplace_back(t);
      row.emplace_back(all.targets(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t)));
      row.emplace_back(u.prediction);
      row.emplace_back(u.aleatoric);
      row.emplace_back(u.epistemic);
      row.emplace_back(u.entropy);
      row.emplace_back(std::size_t{b < p.test.size() ? 1u : 0u});
      rows.push_back(std::move(row));
    }
  }
  write_csv_table(path, header, rows);
}

EvalOptions eval_options(const RunConfig& cfg) {
  EvalOptions o;
  o.timing_repeats = cfg.timing_repeats;
  return o;
}

// report.json plus calibration, cutoff and entropy CDF curves with `suffix`.
EvalReport evaluate_and_write(const RunConfig& cfg, const Model& model, const Problem& p,
                              const fs::path& dir, const std::string& suffix,
                              bool write_report) {
  const Dataset* ood = p.ood ? &*p.ood : nullptr;
  const EvalReport report = evaluate(model, p.test, ood, eval_options(cfg));
  if (write_report) {
    auto j = to_json(report);
    j["config"] = to_json(cfg);
    write_json(dir / "report.json", j);
  }
  write_calibration_csv(dir / ("calibration" + suffix + ".csv"), report.calibration);
  write_cutoff_csv(dir / ("cutoff" + suffix + ".csv"), report.cutoff);
  write_cdf_csv(dir / ("entropy_cdf" + suffix + "_id.csv"), "entropy",
                empirical_cdf(entropies(model.predict(p.test.features))));
  if (p.ood) {
    write_cdf_csv(dir / ("entropy_cdf" + suffix + "_ood.csv"), "entropy",
                  empirical_cdf(entropies(model.predict(p.ood->features))));
  }
  return report;
}

std::string pm(double mean, double se, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << mean << " +/- " << se;
  return s.str();
}

struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Mean and standard error (sample sd / sqrt(n)).
Summary summarize(const std::vector<double>& v) {
  Summary s;
  const auto n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

nlohmann::ordered_json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"stderr", s.stderr_}};
}

double mean_of(const std::vector<UncertainPrediction>& preds,
               double UncertainPrediction::*field) {
  double s = 0.0;
  for (const auto& p : preds) s += p.*field;
  return s / static_cast<double>(preds.size());
}

}  // namespace

void cmd_generate(const RunConfig& cfg) {
  const fs::path dir = prepare_output_dir(cfg.out);
  if (cfg.dataset == "csv") throw ConfigError("generate: choose --dataset cubic or heteroscedastic");
  const Problem p = load_problem(cfg);
  write_csv(p.train, dir / "train.csv");
  write_csv(p.test, dir / "test_id.csv");
  if (p.ood) write_csv(*p.ood, dir / "test_ood.csv");
  std::cout << "wrote " << p.train.size() << " train, " << p.test.size() << " ID test"
            << (p.ood ? ", " + std::to_string(p.ood->size()) + " OOD test" : std::string())
            << " rows to " << dir.string() << "\n";
}

void cmd_train(const RunConfig& cfg) {
  const fs::path dir = prepare_output_dir(cfg.out);
  const Problem p = load_problem(cfg);
  const FitResult fitted = fit_method(cfg, cfg.method, p.train, p.test);
  save_model(fitted.model, dir, "model");
  write_traces(dir, fitted.traces);
  const EvalReport r = evaluate_and_write(cfg, fitted.model, p, dir, "", true);
  write_predictions(dir / "predictions.csv", fitted.model, p);
  std::cout << to_string(cfg.method) << ": rmse " << r.rmse << ", nll " << r.nll
            << ", calibration error " << r.calibration.error;
  if (r.ood_auc) std::cout << ", ood auc " << *r.ood_auc;
  std::cout << "\n";
}

void cmd_eval(const RunConfig& cfg) {
  if (cfg.model.empty()) throw ConfigError("eval: --model <manifest.json> is required");
  const fs::path dir = prepare_output_dir(cfg.out);
  const Model model = load_model(cfg.model);
  Problem p;
  if (cfg.dataset == "csv") {
    if (cfg.csv.empty()) throw ConfigError("eval: --csv is required for the csv dataset");
    p.test = load_csv(cfg.csv, cfg.csv_targets);
  } else {
    p = load_problem(cfg);
  }
  const EvalReport r = evaluate_and_write(cfg, model, p, dir, "", true);
  write_predictions(dir / "predictions.csv", model, p);
  std::cout << to_string(model.method()) << ": rmse " << r.rmse << ", nll " << r.nll << "\n";
}

void cmd_benchmark(const RunConfig& cfg) {
  if (cfg.dataset != "csv" || cfg.csv.empty()) {
    throw ConfigError("benchmark: a CSV dataset is required (--csv <file>)");
  }
  const fs::path dir = prepare_output_dir(cfg.out);
  const Dataset full = load_csv(cfg.csv, cfg.csv_targets);
  const auto splits = benchmark_splits(full, cfg.trials, cfg.test_fraction, cfg.seed);
  const std::string name = cfg.csv.stem().string();

  struct TrialResult {
    double rmse = 0.0;
    double nll = 0.0;
    double inference_ms = 0.0;
  };
  const std::size_t m_count = cfg.methods.size();
  std::vector<TrialResult> results(m_count * cfg.trials);
  // Networks inside one task train serially; tasks spread over --jobs.
  RunConfig serial = cfg;
  serial.jobs = 1;
  parallel_for(results.size(), cfg.jobs, [&](std::size_t k) {
    const std::size_t m = k / cfg.trials;
    const std::size_t t = k % cfg.trials;
    RunConfig c = serial;
    c.seed = derive_seed(cfg.seed, t);
    const Split& s = splits[t];
    const FitResult f = fit_method(c, cfg.methods[m], s.train, s.test);
    EvalOptions o = eval_options(c);
    const EvalReport r = evaluate(f.model, s.test, nullptr, o);
    results[k] = {r.rmse, r.nll, 1e3 * r.inference_seconds_per_batch};
  });

  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["dataset"] = name;
  j["rows"] = full.size();
  j["trials"] = cfg.trials;
  j["test_fraction"] = cfg.test_fraction;
  j["config"] = to_json(cfg);
  auto methods = nlohmann::ordered_json::array();
  std::vector<std::vector<Cell>> trial_rows;
  std::vector<std::vector<Cell>> summary_rows;

  std::cout << "dataset " << name << " (" << full.size() << " rows, " << cfg.trials
            << " splits)\n";
  std::cout << std::left << std::setw(12) << "method" << std::setw(16) << "RMSE" << std::setw(16)
            << "NLL" << std::setw(20) << "speed (ms)" << "| published RMSE / NLL / ms\n";
  for (std::size_t m = 0; m < m_count; ++m) {
    std::vector<double> rm, nl, ms;
    auto per_trial = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto& r = results[m * cfg.trials + t];
      rm.push_back(r.rmse);
      nl.push_back(r.nll);
      ms.push_back(r.inference_ms);
      per_trial.push_back({{"trial", t}, {"rmse", r.rmse}, {"nll", r.nll}});
      trial_rows.push_back({std::string(to_string(cfg.methods[m])), t, r.rmse, r.nll});
    }
    const Summary srm = summarize(rm);
    const Summary snl = summarize(nl);
    const Summary sms = summarize(ms);
    const auto ref = reference_result(name, cfg.methods[m]);

    nlohmann::ordered_json mj;
    mj["method"] = to_string(cfg.methods[m]);
    mj["rmse"] = summary_json(srm);
    mj["nll"] = summary_json(snl);
    mj["per_trial"] = per_trial;
    if (ref) {
      mj["reference"] = {{"rmse", {{"mean", ref->rmse.mean}, {"stderr", ref->rmse.stderr_}}},
                         {"nll", {{"mean", ref->nll.mean}, {"stderr", ref->nll.stderr_}}},
                         {"inference_ms", ref->inference_ms}};
    } else {
      mj["reference"] = nullptr;
    }
    mj["timing"] = {{"inference_ms", summary_json(sms)}, {"per_trial_ms", ms}};
    methods.push_back(mj);

    auto ref_cell = [&](std::optional<ReferenceValue> v) -> std::vector<Cell> {
      if (!v) return {"", ""};
      return {v->mean, v->stderr_};
    };
    auto add = [&](const char* metric, const Summary& s, std::optional<ReferenceValue> v) {
      std::vector<Cell> row{std::string(to_string(cfg.methods[m])), metric, s.mean, s.stderr_};
      for (auto& c : ref_cell(v)) row.push_back(c);
      summary_rows.push_back(std::move(row));
    };
    add("rmse", srm, ref ? std::optional(ref->rmse) : std::nullopt);
    add("nll", snl, ref ? std::optional(ref->nll) : std::nullopt);

    std::cout << std::left << std::setw(12) << to_string(cfg.methods[m]) << std::setw(16)
              << pm(srm.mean, srm.stderr_) << std::setw(16) << pm(snl.mean, snl.stderr_)
              << std::setw(20) << pm(sms.mean, sms.stderr_, 4) << "| ";
    if (ref) {
      std::cout << pm(ref->rmse.mean, ref->rmse.stderr_) << " / "
                << pm(ref->nll.mean, ref->nll.stderr_) << " / " << ref->inference_ms;
    } else {
      std::cout << "n/a";
    }
    std::cout << "\n";
  }
  j["methods"] = methods;
  write_json(dir / "benchmark.json", j);
  write_csv_table(dir / "benchmark_trials.csv", {"method", "trial", "rmse", "nll"}, trial_rows);
  write_csv_table(dir / "benchmark_summary.csv",
                  {"method", "metric", "mean", "stderr", "published_mean", "published_stderr"},
                  summary_rows);
}

void cmd_ablate_lambda(const RunConfig& cfg) {
  if (cfg.dataset == "csv") {
    throw ConfigError("ablate-lambda: needs a generated dataset with an OOD region");
  }
  const fs::path dir = prepare_output_dir(cfg.out);
  const Problem p = load_problem(cfg);
  if (!p.ood) throw DomainError("ablate-lambda: the generated test set has no OOD rows");

  auto records = nlohmann::ordered_json::array();
  std::vector<std::vector<Cell>> rows;
  for (double lambda : cfg.lambdas) {
    RunConfig c = cfg;
    c.lambda = lambda;
    const FitResult f = fit_method(c, Method::evidential, p.train, p.test);
    const auto id = f.model.predict(p.test.features);
    const auto ood = f.model.predict(p.ood->features);
    const double id_epi = mean_of(id, &UncertainPrediction::epistemic);
    const double ood_epi = mean_of(ood, &UncertainPrediction::epistemic);
    const double id_ent = mean_of(id, &UncertainPrediction::entropy);
    const double ood_ent = mean_of(ood, &UncertainPrediction::entropy);
    const double auc = ood_auc(entropies(id), entropies(ood));

    nlohmann::ordered_json r;
    r["lambda"] = lambda;
    r["id_mean_epistemic"] = id_epi;
    r["ood_mean_epistemic"] = ood_epi;
    r["epistemic_ratio"] = ood_epi / id_epi;
    r["id_mean_entropy"] = id_ent;
    r["ood_mean_entropy"] = ood_ent;
    r["ood_auc"] = auc;
    records.push_back(r);
    rows.push_back({lambda, id_epi, ood_epi, ood_epi / id_epi, id_ent, ood_ent, auc});

    const std::string tag = "lambda_" + format_number(lambda);
    write_cdf_csv(dir / ("entropy_cdf_" + tag + "_id.csv"), "entropy",
                  empirical_cdf(entropies(id)));
    write_cdf_csv(dir / ("entropy_cdf_" + tag + "_ood.csv"), "entropy",
                  empirical_cdf(entropies(ood)));
    write_predictions(dir / ("predictions_" + tag + ".csv"), f.model, p);
    std::cout << "lambda " << format_number(lambda) << ": epistemic ID " << id_epi << ", OOD "
              << ood_epi << " (ratio " << ood_epi / id_epi << "), entropy auc " << auc << "\n";
  }
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = to_json(cfg);
  j["records"] = records;
  write_json(dir / "ablation.json", j);
  write_csv_table(dir / "ablation.csv",
                  {"lambda", "id_mean_epistemic", "ood_mean_epistemic", "epistemic_ratio",
                   "id_mean_entropy", "ood_mean_entropy", "ood_auc"},
                  rows);
}

void cmd_compare(const RunConfig& cfg) {
  const fs::path dir = prepare_output_dir(cfg.out);
  const Problem p = load_problem(cfg);
  auto reports = nlohmann::ordered_json::array();
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    const Method method = cfg.methods[m];
    std::optional<Model> model;
    if (!cfg.models.empty()) {
      if (!fs::exists(cfg.models[m])) {
        throw std::runtime_error("compare: missing model manifest " + cfg.models[m].string());
      }
      model.emplace(load_model(cfg.models[m]));
      if (model->method() != method) {
        throw ConfigError("compare: " + cfg.models[m].string() + " holds a " +
                          std::string(to_string(model->method())) + " model, expected " +
                          std::string(to_string(method)));
      }
    } else {
      model.emplace(fit_method(cfg, method, p.train, p.test).model);
    }
    const std::string suffix = "_" + std::string(to_string(method));
    const EvalReport r = evaluate_and_write(cfg, *model, p, dir, suffix, false);
    reports.push_back(to_json(r));
    std::cout << std::left << std::setw(12) << to_string(method) << "rmse " << r.rmse << ", nll "
              << r.nll << ", calibration error " << r.calibration.error;
    if (r.ood_auc) {
      std::cout << ", entropy ID " << r.mean_entropy << " OOD " << *r.ood_mean_entropy
                << ", auc " << *r.ood_auc;
    }
    std::cout << "\n";
  }
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = to_json(cfg);
  j["reports"] = reports;
  write_json(dir / "compare.json", j);
}

void run(const RunConfig& cfg) {
  cfg.validate();
  switch (cfg.command) {
    case Command::generate: cmd_generate(cfg); break;
    case Command::train: cmd_train(cfg); break;
    case Command::eval: cmd_eval(cfg); break;
    case Command::benchmark: cmd_benchmark(cfg); break;
    case Command::ablate_lambda: cmd_ablate_lambda(cfg); break;
    case Command::compare: cmd_compare(cfg); break;
  }
}

}  // namespace edr::cli
