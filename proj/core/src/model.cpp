#include "edr/model.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "edr/baselines.hpp"
#include "edr/errors.hpp"

namespace edr {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::evidential: return "evidential";
    case Method::gaussian: return "gaussian";
    case Method::ensemble: return "ensemble";
    case Method::dropout: return "dropout";
  }
  return "unknown";
}

Method parse_method(std::string_view s) {
  if (s == "evidential") return Method::evidential;
  if (s == "gaussian") return Method::gaussian;
  if (s == "ensemble") return Method::ensemble;
  if (s == "dropout") return Method::dropout;
  throw ConfigError("unknown method '" + std::string(s) + "'");
}

Model::Model(Method method, std::vector<Mlp> nets, std::optional<ColumnStats> feature_stats,
             std::optional<ColumnStats> target_stats, MethodOptions opts)
    : method_(method),
      nets_(std::move(nets)),
      feature_stats_(std::move(feature_stats)),
      target_stats_(std::move(target_stats)),
      opts_(opts) {
  if (nets_.empty()) throw ConfigError("model: no networks");
  const Head want = method_ == Method::evidential ? Head::evidential : Head::gaussian;
  for (const auto& n : nets_) {
    if (n.config().head != want) {
      throw ConfigError("model: network head does not match method " +
                        std::string(to_string(method_)));
    }
  }
  if (method_ == Method::ensemble && nets_.size() < 2) {
    throw ConfigError("model: ensemble needs at least 2 members");
  }
  if (method_ != Method::ensemble && nets_.size() != 1) {
    throw ConfigError("model: method " + std::string(to_string(method_)) +
                      " takes exactly one network");
  }
  if (method_ == Method::dropout) {
    if (!(nets_.front().config().dropout_p > 0.0)) {
      throw ConfigError("model: dropout method needs dropout_p > 0");
    }
    if (opts_.dropout_samples < 2) throw ConfigError("model: dropout needs >= 2 samples");
  }
}

std::size_t Model::passes_per_prediction() const {
  switch (method_) {
    case Method::ensemble: return nets_.size();
    case Method::dropout: return opts_.dropout_samples;
    default: return 1;
  }
}

namespace {

UncertainPrediction from_gaussian(const GaussianPrediction& g, PredictiveDistribution dist) {
  return UncertainPrediction{g.mu, g.sigma2, g.epistemic, g.entropy, std::move(dist)};
}

}  // namespace

std::vector<UncertainPrediction> Model::predict(const Eigen::MatrixXd& features) const {
  Eigen::MatrixXd x = features;
  if (feature_stats_) {
    if (static_cast<std::size_t>(x.cols()) != feature_stats_->mean.size()) {
      throw ShapeError("model: feature count does not match training data");
    }
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const auto i = static_cast<std::size_t>(c);
      x.col(c) = (x.col(c).array() - feature_stats_->mean[i]) / feature_stats_->scale[i];
    }
  }

  std::vector<UncertainPrediction> out;
  switch (method_) {
    case Method::evidential:
      for (const auto& p : forward_evidential(nets_.front(), x)) {
        const PredictiveSummary s = predictive_summary(p);
        out.push_back({s.prediction, s.aleatoric, s.epistemic, s.entropy, p});
      }
      break;
    case Method::gaussian:
      for (const auto& g : forward_gaussian(nets_.front(), x)) {
        out.push_back(from_gaussian(make_gaussian_prediction(g.mu, g.sigma2, 0.0),
                                    Gaussian{g.mu, g.sigma2}));
      }
      break;
    case Method::ensemble: {
      auto ens = ensemble_forward(nets_, x);
      for (std::size_t i = 0; i < ens.predictions.size(); ++i) {
        out.push_back(from_gaussian(ens.predictions[i], std::move(ens.mixtures[i])));
      }
      break;
    }
    case Method::dropout:
      for (const auto& g :
           dropout_predict(nets_.front(), x, opts_.dropout_samples, opts_.dropout_seed)) {
        out.push_back(from_gaussian(g, Gaussian{g.mu, g.total_variance()}));
      }
      break;
  }

  if (target_stats_) {
    const std::size_t t_count = targets();
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t t = i % t_count;
      const double shift = target_stats_->mean.at(t);
      const double scale = target_stats_->scale.at(t);
      auto& u = out[i];
      u.distribution = affine(u.distribution, shift, scale);
      u.prediction = shift + scale * u.prediction;
      u.aleatoric *= scale * scale;
      u.epistemic *= scale * scale;
      u.entropy = entropy(u.distribution);
    }
  }
  return out;
}

FitResult fit(Method method, const Dataset& train_data, MlpConfig mlp_cfg,
              const TrainConfig& cfg, const MethodOptions& opts) {
  std::vector<Mlp> nets;
  std::vector<std::vector<TraceRow>> traces;
  auto keep = [&](TrainResult r) {
    nets.push_back(std::move(r.net));
    traces.push_back(std::move(r.trace));
  };
  switch (method) {
    case Method::evidential:
      mlp_cfg.head = Head::evidential;
      keep(train(train_data, mlp_cfg, cfg));
      break;
    case Method::gaussian:
      keep(train_gaussian_mle(train_data, mlp_cfg, cfg));
      break;
    case Method::ensemble:
      for (auto& r : train_ensemble(train_data, mlp_cfg, cfg, opts.ensemble_size, opts.jobs)) {
        keep(std::move(r));
      }
      break;
    case Method::dropout:
      mlp_cfg.dropout_p = opts.dropout_p;
      keep(train_gaussian_mle(train_data, mlp_cfg, cfg));
      break;
  }
  return FitResult{Model(method, std::move(nets), train_data.feature_stats,
                         train_data.target_stats, opts),
                   std::move(traces)};
}

std::filesystem::path save_model(const Model& model, const std::filesystem::path& dir,
                                 std::string_view stem) {
  nlohmann::ordered_json manifest;
  manifest["format"] = "edr-model";
  manifest["version"] = 1;
  manifest["method"] = to_string(model.method());
  manifest["dropout_samples"] = model.options().dropout_samples;
  manifest["dropout_seed"] = model.options().dropout_seed;
  auto members = nlohmann::ordered_json::array();
  const auto nets = model.networks();
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const std::string file = model.method() == Method::ensemble
                                 ? std::string(stem) + "_member" + std::to_string(i) + ".ckpt"
                                 : std::string(stem) + ".ckpt";
    Checkpoint ckpt{nets[i].config(), nets[i].store().values, model.feature_stats(),
                    model.target_stats()};
    save_checkpoint(ckpt, dir / file);
    members.push_back(file);
  }
  manifest["members"] = members;
  const auto path = dir / (std::string(stem) + ".json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("model: cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  return path;
}

Model load_model(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw std::runtime_error("model: cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model manifest: ") + e.what(), 0, 0);
  }
  if (manifest.value("format", "") != "edr-model" || manifest.value("version", 0) != 1) {
    throw ParseError("model manifest: unsupported format or version", 0, 0);
  }
  MethodOptions opts;
  opts.dropout_samples = manifest.value("dropout_samples", opts.dropout_samples);
  opts.dropout_seed = manifest.value("dropout_seed", opts.dropout_seed);
  const Method method = parse_method(manifest.at("method").get<std::string>());

  std::vector<Mlp> nets;
  std::optional<ColumnStats> fs;
  std::optional<ColumnStats> ts;
  for (const auto& file : manifest.at("members")) {
    const Checkpoint ckpt = load_checkpoint(manifest_path.parent_path() / file.get<std::string>());
    fs = ckpt.feature_stats;
    ts = ckpt.target_stats;
    nets.push_back(restore_network(ckpt));
  }
  if (method == Method::ensemble) opts.ensemble_size = nets.size();
  if (!nets.empty()) opts.dropout_p = nets.front().config().dropout_p;
  return Model(method, std::move(nets), std::move(fs), std::move(ts), opts);
}

}  // namespace edr
