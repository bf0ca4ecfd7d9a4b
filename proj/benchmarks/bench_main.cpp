#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "edr/losses.hpp"
#include "edr/model.hpp"
#include "edr/nig.hpp"
#include "edr/training.hpp"

namespace {

using namespace edr;

MlpConfig toy_net(Head head, double dropout_p = 0.0) {
  MlpConfig c;
  c.head = head;
  c.dropout_p = dropout_p;
  return c;
}

Eigen::MatrixXd inputs(benchmark::State& state) {
  return Eigen::VectorXd::LinSpaced(state.range(0), -6.0, 6.0);
}

void report_rows(benchmark::State& state) {
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PredictEvidential(benchmark::State& state) {
  const Model m(Method::evidential, {Mlp(toy_net(Head::evidential), 1)}, {}, {});
  const auto x = inputs(state);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(x));
  report_rows(state);
}

void BM_PredictEnsemble(benchmark::State& state) {
  std::vector<Mlp> members;
  for (std::uint64_t s = 0; s < 5; ++s) members.emplace_back(toy_net(Head::gaussian), s);
  const Model m(Method::ensemble, members, {}, {});
  const auto x = inputs(state);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(x));
  report_rows(state);
}

void BM_PredictDropout(benchmark::State& state) {
  MethodOptions o;
  o.dropout_samples = 5;
  const Model m(Method::dropout, {Mlp(toy_net(Head::gaussian, 0.1), 1)}, {}, {}, o);
  const auto x = inputs(state);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(x));
  report_rows(state);
}

// Raw network evaluation without the predictive-distribution bookkeeping.
void BM_ForwardRaw(benchmark::State& state) {
  const Mlp net(toy_net(Head::evidential), 1);
  const auto x = inputs(state);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_raw(x));
  report_rows(state);
}

void BM_EvidentialLoss(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  std::vector<EvidentialParams> params;
  std::vector<double> ys;
  for (int i = 0; i < 1024; ++i) {
    params.push_back({u(rng), u(rng), 1.0 + u(rng), u(rng)});
    ys.push_back(u(rng));
  }
  const LossConfig cfg;
  for (auto _ : state) {
    double total = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) total += total_loss(ys[i], params[i], cfg).total;
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}

void BM_TrainStep(benchmark::State& state) {
  Mlp net(toy_net(Head::evidential), 1);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd x(128, 1), y(128, 1);
  for (Eigen::Index i = 0; i < 128; ++i) {
    x(i, 0) = 4.0 * n01(rng);
    y(i, 0) = x(i, 0) * x(i, 0) * x(i, 0);
  }
  const LossConfig loss;
  AdamConfig adam;
  adam.learning_rate = 5e-3;
  Eigen::MatrixXd g;
  for (auto _ : state) {
    const Tape tape = net.forward(x);
    head_loss(net.config(), tape.raw_output(), y, loss, g);
    g /= 128.0;
    net.store().zero_grad();
    net.backward(tape, g);
    adam_step(net.store(), adam);
  }
}

}  // namespace

BENCHMARK(BM_PredictEvidential)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictEnsemble)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictDropout)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardRaw)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvidentialLoss);
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
