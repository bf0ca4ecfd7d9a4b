#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#ifdef EDR_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <nlohmann/json.hpp>

#include "edr/cli/commands.hpp"
#include "edr/cli/config.hpp"
#include "edr/errors.hpp"

namespace {

using edr::cli::Command;

struct Flag {
  const char* name;
  const char* help;
};

// Flags shared by all subcommands; every one maps onto apply_setting.
const std::vector<Flag> kSettingFlags = {
    {"dataset", "cubic, heteroscedastic or csv"},
    {"csv", "numeric CSV table (implies --dataset csv)"},
    {"targets", "number of trailing target columns in the CSV"},
    {"n-train", "generated training rows"},
    {"n-test", "generated test rows"},
    {"noise-interpretation", "cubic noise parameter: variance or stddev"},
    {"test-fraction", "held-out share of each CSV split"},
    {"head", "evidential, gaussian, ensemble or dropout"},
    {"lambda", "evidence regularizer weight"},
    {"reg-kind", "abs-error, standard-score or soft-kl"},
    {"epsilon", "soft-kl error tolerance"},
    {"hidden", "comma-separated hidden layer widths"},
    {"activation", "relu or tanh"},
    {"lr", "Adam learning rate"},
    {"iters", "training iterations"},
    {"batch", "minibatch size"},
    {"seed", "master seed"},
    {"ensemble-size", "ensemble members"},
    {"dropout-samples", "MC dropout passes"},
    {"dropout-p", "dropout probability"},
    {"trials", "benchmark splits"},
    {"jobs", "worker threads"},
    {"methods", "comma-separated methods"},
    {"lambdas", "comma-separated lambda grid"},
    {"model", "model manifest for eval"},
    {"models", "comma-separated manifests for compare, in --methods order"},
    {"timing-repeats", "repeats for the inference timing median"},
    {"out", "output directory"},
};

struct SubcommandState {
  Command command;
  CLI::App* app = nullptr;
  std::string preset;
  std::string config;
  bool normalize = false;
  CLI::Option* normalize_opt = nullptr;
  CLI::Option* preset_opt = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_settings(SubcommandState& s) {
  s.preset_opt = s.app->add_option("--preset", s.preset, "toy or benchmark");
  s.app->add_option("--config", s.config, "JSON file with settings (flags override it)");
  for (const auto& f : kSettingFlags) {
    s.options[f.name] = s.app->add_option(std::string("--") + f.name, s.values[f.name], f.help)
                            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  s.normalize_opt = s.app->add_flag("--normalize,!--no-normalize", s.normalize,
                                    "z-score features and targets with training statistics");
}

edr::cli::RunConfig resolve(const SubcommandState& s) {
  std::string preset_name = s.preset_opt->count() > 0 ? s.preset : "";
  nlohmann::json file;
  if (!s.config.empty()) {
    std::ifstream in(s.config);
    if (!in) throw std::runtime_error("config: cannot open " + s.config);
    try {
      in >> file;
    } catch (const nlohmann::json::parse_error& e) {
      throw edr::ConfigError("config: " + s.config + ": " + e.what());
    }
    if (preset_name.empty() && file.is_object() && file.contains("preset")) {
      preset_name = file["preset"].get<std::string>();
    }
  }
  edr::cli::RunConfig cfg = edr::cli::preset(preset_name.empty() ? "toy" : preset_name);
  cfg.command = s.command;
  if (!file.is_null()) edr::cli::apply_json(cfg, file);
  for (const auto& f : kSettingFlags) {
    if (s.options.at(f.name)->count() > 0) {
      edr::cli::apply_setting(cfg, f.name, s.values.at(f.name));
    }
  }
  if (s.normalize_opt->count() > 0) cfg.normalize = s.normalize;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep evidential regression: train, evaluate and compare uncertainty heads"};
  app.require_subcommand(1);

  const std::vector<std::pair<Command, const char*>> commands = {
      {Command::generate, "write the synthetic train/test sets as CSV"},
      {Command::train, "train one model and report held-out metrics"},
      {Command::eval, "evaluate a saved model"},
      {Command::benchmark, "repeated random splits of a CSV table for several methods"},
      {Command::ablate_lambda, "sweep the evidence regularizer weight"},
      {Command::compare, "compare methods on in- and out-of-distribution data"},
  };
  std::vector<SubcommandState> states(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    states[i].command = commands[i].first;
    states[i].app =
        app.add_subcommand(std::string(edr::cli::to_string(commands[i].first)), commands[i].second);
    add_settings(states[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& s : states) {
      if (s.app->parsed()) {
        edr::cli::run(resolve(s));
        break;
      }
    }
  } catch (const edr::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const edr::TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
