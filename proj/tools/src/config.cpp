#include "edr/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <functional>

#include "edr/errors.hpp"

namespace edr::cli {
namespace {

std::string normalize_key(std::string_view key) {
  std::string k(key);
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  for (char& c : k) {
    if (c == '_') c = '-';
  }
  return k;
}

template <typename T>
T parse_number(std::string_view key, std::string_view s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("--" + std::string(key) + ": cannot parse '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1" || s == "on") return true;
  if (s == "false" || s == "0" || s == "off") return false;
  throw ConfigError("--" + std::string(key) + ": expected true or false, got '" + std::string(s) +
                    "'");
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    auto item = s.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"dataset", [](RunConfig& c, std::string_view v) { c.dataset = std::string(v); }},
      {"csv",
       [](RunConfig& c, std::string_view v) {
         c.csv = std::string(v);
         c.dataset = "csv";
       }},
      {"targets",
       [](RunConfig& c, std::string_view v) { c.csv_targets = parse_number<std::size_t>("targets", v); }},
      {"n-train",
       [](RunConfig& c, std::string_view v) { c.n_train = parse_number<std::size_t>("n-train", v); }},
      {"n-test",
       [](RunConfig& c, std::string_view v) { c.n_test = parse_number<std::size_t>("n-test", v); }},
      {"noise-interpretation",
       [](RunConfig& c, std::string_view v) {
         c.noise_interpretation = parse_noise_interpretation(v);
       }},
      {"test-fraction",
       [](RunConfig& c, std::string_view v) {
         c.test_fraction = parse_number<double>("test-fraction", v);
       }},
      {"normalize",
       [](RunConfig& c, std::string_view v) { c.normalize = parse_bool("normalize", v); }},
      {"head", [](RunConfig& c, std::string_view v) { c.method = parse_method(v); }},
      {"lambda",
       [](RunConfig& c, std::string_view v) { c.lambda = parse_number<double>("lambda", v); }},
      {"reg-kind", [](RunConfig& c, std::string_view v) { c.reg_kind = parse_reg_kind(v); }},
      {"epsilon",
       [](RunConfig& c, std::string_view v) { c.epsilon = parse_number<double>("epsilon", v); }},
      {"hidden", [](RunConfig& c, std::string_view v) { c.hidden = parse_hidden(v); }},
      {"activation",
       [](RunConfig& c, std::string_view v) { c.activation = parse_activation(v); }},
      {"lr",
       [](RunConfig& c, std::string_view v) { c.learning_rate = parse_number<double>("lr", v); }},
      {"iters",
       [](RunConfig& c, std::string_view v) { c.iterations = parse_number<std::size_t>("iters", v); }},
      {"batch",
       [](RunConfig& c, std::string_view v) { c.batch_size = parse_number<std::size_t>("batch", v); }},
      {"seed",
       [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
      {"ensemble-size",
       [](RunConfig& c, std::string_view v) {
         c.ensemble_size = parse_number<std::size_t>("ensemble-size", v);
       }},
      {"dropout-samples",
       [](RunConfig& c, std::string_view v) {
         c.dropout_samples = parse_number<std::size_t>("dropout-samples", v);
       }},
      {"dropout-p",
       [](RunConfig& c, std::string_view v) { c.dropout_p = parse_number<double>("dropout-p", v); }},
      {"trials",
       [](RunConfig& c, std::string_view v) { c.trials = parse_number<std::size_t>("trials", v); }},
      {"jobs", [](RunConfig& c, std::string_view v) { c.jobs = parse_number<std::size_t>("jobs", v); }},
      {"methods",
       [](RunConfig& c, std::string_view v) {
         c.methods.clear();
         for (auto m : split_list(v)) c.methods.push_back(parse_method(m));
       }},
      {"lambdas",
       [](RunConfig& c, std::string_view v) {
         c.lambdas.clear();
         for (auto l : split_list(v)) c.lambdas.push_back(parse_number<double>("lambdas", l));
       }},
      {"model", [](RunConfig& c, std::string_view v) { c.model = std::string(v); }},
      {"models",
       [](RunConfig& c, std::string_view v) {
         c.models.clear();
         for (auto m : split_list(v)) c.models.emplace_back(std::string(m));
       }},
      {"timing-repeats",
       [](RunConfig& c, std::string_view v) {
         c.timing_repeats = parse_number<std::size_t>("timing-repeats", v);
       }},
      {"out", [](RunConfig& c, std::string_view v) { c.out = std::string(v); }},
  };
  return table;
}

// JSON scalars and arrays are funnelled through the textual setters.
std::string json_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return std::string(buf, ptr);
  }
  if (v.is_array()) {
    std::string s;
    for (const auto& item : v) {
      if (!s.empty()) s += ',';
      s += json_text(item);
    }
    return s;
  }
  throw ConfigError("config: unsupported value " + v.dump());
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::generate: return "generate";
    case Command::train: return "train";
    case Command::eval: return "eval";
    case Command::benchmark: return "benchmark";
    case Command::ablate_lambda: return "ablate-lambda";
    case Command::compare: return "compare";
  }
  return "?";
}

Command parse_command(std::string_view s) {
  for (Command c : {Command::generate, Command::train, Command::eval, Command::benchmark,
                    Command::ablate_lambda, Command::compare}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown command '" + std::string(s) + "'");
}

std::vector<std::size_t> parse_hidden(std::string_view s) {
  std::vector<std::size_t> out;
  for (auto w : split_list(s)) out.push_back(parse_number<std::size_t>("hidden", w));
  if (out.empty()) throw ConfigError("--hidden: need at least one layer width");
  return out;
}

RegularizerKind parse_reg_kind(std::string_view s) {
  if (s == "abs-error" || s == "abs_error") return RegularizerKind::abs_error;
  if (s == "standard-score" || s == "standard_score") return RegularizerKind::standard_score;
  if (s == "soft-kl" || s == "soft_kl") return RegularizerKind::soft_kl;
  throw ConfigError("--reg-kind: expected abs-error, standard-score or soft-kl, got '" +
                    std::string(s) + "'");
}

std::string_view to_string(RegularizerKind k) {
  switch (k) {
    case RegularizerKind::abs_error: return "abs-error";
    case RegularizerKind::standard_score: return "standard-score";
    case RegularizerKind::soft_kl: return "soft-kl";
  }
  return "?";
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  if (name == "toy") return c;
  if (name == "benchmark") {
    c.preset = "benchmark";
    c.dataset = "csv";
    c.normalize = true;
    c.hidden = {50};
    c.learning_rate = 1e-2;
    c.iterations = 3000;
    c.batch_size = 16;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected toy or benchmark)");
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const std::string k = normalize_key(key);
  const auto it = setters().find(k);
  if (it == setters().end()) throw ConfigError("unknown setting '" + std::string(key) + "'");
  it->second(cfg, value);
}

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    const std::string k = normalize_key(key);
    if (k == "preset" || k == "command" || k == "config") continue;
    apply_setting(cfg, k, json_text(value));
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  apply_json(cfg, j);
}

void RunConfig::validate() const {
  if (dataset != "cubic" && dataset != "heteroscedastic" && dataset != "csv") {
    throw ConfigError("--dataset: expected cubic, heteroscedastic or csv, got '" + dataset + "'");
  }
  if (dataset == "csv" && csv.empty() && command != Command::eval) {
    throw ConfigError("--csv: a CSV path is required for the csv dataset");
  }
  if (n_train == 0 || n_test == 0) throw ConfigError("--n-train/--n-test must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("--test-fraction must lie strictly between 0 and 1");
  }
  if (trials == 0) throw ConfigError("--trials must be positive");
  if (jobs == 0) throw ConfigError("--jobs must be positive");
  if (methods.empty()) throw ConfigError("--methods: need at least one method");
  if (lambdas.empty()) throw ConfigError("--lambdas: need at least one value");
  if (!models.empty() && models.size() != methods.size()) {
    throw ConfigError("--models: give one manifest per entry of --methods");
  }
  if (dropout_samples < 2) throw ConfigError("--dropout-samples must be at least 2");
  mlp_config(*this, 1, csv_targets).validate();
  train_config(*this).validate();
}

MlpConfig mlp_config(const RunConfig& cfg, std::size_t input_dim, std::size_t targets) {
  MlpConfig m;
  m.input_dim = input_dim;
  m.hidden_layers = cfg.hidden;
  m.targets = targets;
  m.activation = cfg.activation;
  switch (cfg.method) {
    case Method::evidential: m.head = Head::evidential; break;
    case Method::dropout:
      m.head = Head::gaussian;
      m.dropout_p = cfg.dropout_p;
      break;
    default: m.head = Head::gaussian; break;
  }
  return m;
}

TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.learning_rate = cfg.learning_rate;
  t.iterations = cfg.iterations;
  t.batch_size = cfg.batch_size;
  t.seed = cfg.seed;
  t.loss = LossConfig{cfg.lambda, cfg.reg_kind, cfg.epsilon};
  return t;
}

MethodOptions method_options(const RunConfig& cfg) {
  MethodOptions o;
  o.ensemble_size = cfg.ensemble_size;
  o.dropout_samples = cfg.dropout_samples;
  o.dropout_p = cfg.dropout_p;
  o.dropout_seed = cfg.seed;
  o.jobs = cfg.jobs;
  return o;
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["command"] = to_string(cfg.command);
  j["preset"] = cfg.preset;
  j["dataset"] = cfg.dataset;
  if (cfg.dataset == "csv") {
    j["csv"] = cfg.csv.filename().string();
    j["targets"] = cfg.csv_targets;
    j["test_fraction"] = cfg.test_fraction;
  } else {
    j["n_train"] = cfg.n_train;
    j["n_test"] = cfg.n_test;
    j["noise_interpretation"] = to_string(cfg.noise_interpretation);
  }
  j["normalize"] = cfg.normalize;
  j["head"] = to_string(cfg.method);
  j["lambda"] = cfg.lambda;
  j["reg_kind"] = to_string(cfg.reg_kind);
  j["epsilon"] = cfg.epsilon;
  j["hidden"] = cfg.hidden;
  j["activation"] = to_string(cfg.activation);
  j["lr"] = cfg.learning_rate;
  j["iters"] = cfg.iterations;
  j["batch"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["ensemble_size"] = cfg.ensemble_size;
  j["dropout_samples"] = cfg.dropout_samples;
  j["dropout_p"] = cfg.dropout_p;
  return j;
}

}  // namespace edr::cli
