#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "edr/errors.hpp"
#include "edr/eval.hpp"
#include "edr/model.hpp"

namespace edr {
namespace {

// Network whose single evidential output row is constant: gamma = g and
// fixed evidence, independent of input.
Mlp constant_evidential(double g) {
  MlpConfig c;
  c.hidden_layers = {2};
  Mlp net(c, 1);
  auto& v = net.store().values;
  std::fill(v.begin(), v.end(), 0.0);
  const std::size_t out_bias = v.size() - 4;
  v[out_bias] = g;
  v[out_bias + 1] = 1.0;
  v[out_bias + 2] = 0.5;
  v[out_bias + 3] = -0.3;
  return net;
}

TEST(Model, DenormalizationMatchesAffineMap) {
  const ColumnStats fs{{2.0}, {3.0}};
  const ColumnStats ts{{100.0}, {5.0}};
  const Model normalized(Method::evidential, {constant_evidential(0.4)}, fs, ts);
  const Model raw(Method::evidential, {constant_evidential(0.4)}, std::nullopt, std::nullopt);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(3, 1, 7.0);
  const auto a = normalized.predict(x);
  const auto b = raw.predict(x);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].prediction, 100.0 + 5.0 * b[i].prediction, 1e-12);
    EXPECT_NEAR(a[i].aleatoric, 25.0 * b[i].aleatoric, 1e-12);
    EXPECT_NEAR(a[i].epistemic, 25.0 * b[i].epistemic, 1e-12);
    EXPECT_NEAR(a[i].entropy, b[i].entropy + std::log(5.0), 1e-12);
    EXPECT_NEAR(log_pdf(a[i].distribution, 100.0 + 5.0 * 1.3),
                log_pdf(b[i].distribution, 1.3) - std::log(5.0), 1e-12);
  }
}

// End-to-end consistency: an oracle model that predicts the truth reports the
// same metrics whether or not normalization was applied.
TEST(Model, MetricsInvariantToNormalization) {
  Dataset test;
  test.features = Eigen::VectorXd::LinSpaced(50, -1.0, 1.0);
  test.targets = Eigen::MatrixXd::Constant(50, 1, 42.0);
  for (Eigen::Index i = 0; i < 50; i += 3) test.targets(i, 0) += 0.5;
  const ColumnStats fs{{0.0}, {1.0}};
  const ColumnStats ts{{40.0}, {2.0}};
  const Model norm(Method::evidential, {constant_evidential(1.0)}, fs, ts);
  // Both predict gamma = 42 in original units; normalized model's beta is
  // scaled by 4, so match it in the raw model.
  Mlp adjusted = constant_evidential(42.0);
  const double beta_raw = std::log1p(std::exp(-0.3)) * 4.0;
  adjusted.store().values.back() = std::log(std::expm1(beta_raw));
  const Model raw_matched(Method::evidential, {adjusted}, std::nullopt, std::nullopt);
  EvalOptions o;
  o.measure_timing = false;
  const auto ra = to_json_without_timing(evaluate(norm, test, nullptr, o));
  const auto rb = to_json_without_timing(evaluate(raw_matched, test, nullptr, o));
  EXPECT_NEAR(ra["rmse"].get<double>(), rb["rmse"].get<double>(), 1e-12);
  EXPECT_NEAR(ra["nll"].get<double>(), rb["nll"].get<double>(), 1e-10);
  EXPECT_NEAR(ra["calibration"]["error"].get<double>(), rb["calibration"]["error"].get<double>(),
              1e-12);
}

TEST(Model, PassesPerPrediction) {
  MlpConfig g;
  g.hidden_layers = {3};
  g.head = Head::gaussian;
  std::vector<Mlp> members;
  for (int i = 0; i < 5; ++i) members.emplace_back(g, static_cast<std::uint64_t>(i));
  EXPECT_EQ(Model(Method::ensemble, members, {}, {}).passes_per_prediction(), 5u);
  EXPECT_EQ(Model(Method::evidential, {constant_evidential(0)}, {}, {}).passes_per_prediction(), 1u);
  EXPECT_THROW(Model(Method::ensemble, {members[0]}, {}, {}), ConfigError);
  EXPECT_THROW(Model(Method::gaussian, {constant_evidential(0)}, {}, {}), ConfigError);
}

// Counted network evaluations during predict equal the advertised pass count.
TEST(Model, PredictRunsAdvertisedPasses) {
  MlpConfig g;
  g.hidden_layers = {3};
  g.head = Head::gaussian;
  std::vector<Mlp> members;
  for (int i = 0; i < 5; ++i) members.emplace_back(g, static_cast<std::uint64_t>(i));
  MlpConfig d = g;
  d.dropout_p = 0.2;
  MethodOptions dropout_opts;
  dropout_opts.dropout_samples = 7;
  const std::vector<Model> models = {
      Model(Method::evidential, {constant_evidential(0)}, {}, {}),
      Model(Method::gaussian, {members[0]}, {}, {}),
      Model(Method::ensemble, members, {}, {}),
      Model(Method::dropout, {Mlp(d, 9)}, {}, {}, dropout_opts),
  };
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(11, 1);
  for (const auto& m : models) {
    std::uint64_t before = 0, after = 0;
    for (const auto& n : m.networks()) before += n.pass_count();
    (void)m.predict(x);
    for (const auto& n : m.networks()) after += n.pass_count();
    EXPECT_EQ(after - before, m.passes_per_prediction()) << to_string(m.method());
  }
}

TEST(Model, SaveLoadRoundTrip) {
  CubicOptions o;
  o.n_train = 100;
  o.n_test = 20;
  const auto toy = gen_cubic(o, 3);
  const auto n = normalize(toy.train, toy.test);
  MlpConfig m;
  m.hidden_layers = {6};
  TrainConfig cfg;
  cfg.iterations = 20;
  MethodOptions mo;
  mo.ensemble_size = 3;
  const auto dir = std::filesystem::temp_directory_path() / "edr_model_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (Method method : {Method::evidential, Method::gaussian, Method::ensemble, Method::dropout}) {
    const auto fitted = fit(method, n.train, m, cfg, mo);
    const auto manifest = save_model(fitted.model, dir, to_string(method));
    const Model back = load_model(manifest);
    EXPECT_EQ(back.method(), method);
    const auto a = fitted.model.predict(toy.test.features);
    const auto b = back.predict(toy.test.features);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].prediction, b[i].prediction);
      EXPECT_EQ(a[i].epistemic, b[i].epistemic);
    }
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace edr
