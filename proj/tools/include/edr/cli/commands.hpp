#pragma once
// The command implementations behind the `edr` executable. Each writes its
// files under cfg.out and returns normally on success.

#include "edr/cli/config.hpp"

namespace edr::cli {

/// Export the generated train and test sets as CSV.
void cmd_generate(const RunConfig& cfg);

/// Train one model; write the checkpoint(s), loss_trace.csv, report.json and
/// curve files for the held-out data.
void cmd_train(const RunConfig& cfg);

/// Evaluate a saved model (cfg.model) on the configured data.
void cmd_eval(const RunConfig& cfg);

/// Repeated random splits of a CSV table for every method in cfg.methods;
/// per-trial and aggregate (mean, standard error) RMSE, NLL and speed.
void cmd_benchmark(const RunConfig& cfg);

/// One evidential model per lambda in cfg.lambdas on a generated problem;
/// ID/OOD epistemic and entropy summaries plus curves.
void cmd_ablate_lambda(const RunConfig& cfg);

/// Side-by-side reports for cfg.methods with ID vs OOD entropy curves.
void cmd_compare(const RunConfig& cfg);

void run(const RunConfig& cfg);

}  // namespace edr::cli
