#include "edr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "edr/errors.hpp"

namespace edr {

void Dataset::validate() const {
  if (features.rows() < 1) throw DomainError("dataset: no rows");
  if (targets.rows() != features.rows()) {
    throw DomainError("dataset: features and targets have different row counts");
  }
  if (targets.cols() < 1) throw DomainError("dataset: no target columns");
  if (!features.allFinite() || !targets.allFinite()) {
    throw DomainError("dataset: non-finite value");
  }
  if (feature_stats.has_value() != target_stats.has_value()) {
    throw DomainError("dataset: normalization statistics must cover features and targets");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
    out.targets.row(static_cast<Eigen::Index>(i)) = targets.row(r);
  }
  out.feature_stats = feature_stats;
  out.target_stats = target_stats;
  return out;
}

NoiseInterpretation parse_noise_interpretation(std::string_view s) {
  if (s == "variance") return NoiseInterpretation::variance;
  if (s == "stddev" || s == "sd") return NoiseInterpretation::stddev;
  throw ConfigError("unknown noise interpretation '" + std::string(s) + "'");
}

std::string_view to_string(NoiseInterpretation n) {
  return n == NoiseInterpretation::variance ? "variance" : "stddev";
}

namespace {

Dataset column_dataset(const std::vector<double>& x, const std::vector<double>& y) {
  Dataset d;
  d.features = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  d.targets = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return d;
}

void require_range(double lo, double hi, const char* what) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw DomainError(std::string("gen_cubic: invalid ") + what + " range");
  }
}

}  // namespace

ToyData gen_cubic(const CubicOptions& opts, std::uint64_t seed) {
  if (opts.n_train == 0) throw DomainError("gen_cubic: n_train must be positive");
  require_range(opts.train_lo, opts.train_hi, "train");
  require_range(opts.test_lo, opts.test_hi, "test");
  if (!(opts.noise >= 0.0)) throw DomainError("gen_cubic: noise must be nonnegative");
  const double sd = opts.interpretation == NoiseInterpretation::variance ? std::sqrt(opts.noise)
                                                                         : opts.noise;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, 1.0);

  auto draw = [&](std::size_t n, double lo, double hi, std::vector<double>& x,
                  std::vector<double>& y, std::vector<double>* truth) {
    std::uniform_real_distribution<double> ux(lo, hi);
    x.resize(n);
    y.resize(n);
    if (truth != nullptr) truth->resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ux(rng);
      const double f = x[i] * x[i] * x[i];
      y[i] = f + sd * eps(rng);
      if (truth != nullptr) (*truth)[i] = f;
    }
  };

  ToyData out;
  std::vector<double> x;
  std::vector<double> y;
  draw(opts.n_train, opts.train_lo, opts.train_hi, x, y, nullptr);
  out.train = column_dataset(x, y);
  draw(opts.n_test, opts.test_lo, opts.test_hi, x, y, &out.test_truth);
  out.test = column_dataset(x, y);
  return out;
}

double NoiseProfile::sd(double x) const {
  return sd_min + (sd_max - sd_min) * std::exp(-x * x / (2.0 * width * width));
}

HeteroscedasticData gen_heteroscedastic(std::size_t n, std::uint64_t seed,
                                        const NoiseProfile& profile, double lo, double hi) {
  if (n == 0) throw DomainError("gen_heteroscedastic: n must be positive");
  if (!(lo < hi)) throw DomainError("gen_heteroscedastic: invalid range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo, hi);
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<double> x(n);
  std::vector<double> y(n);
  HeteroscedasticData out;
  out.true_sd.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ux(rng);
    out.true_sd[i] = profile.sd(x[i]);
    y[i] = x[i] * x[i] * x[i] + out.true_sd[i] * eps(rng);
  }
  out.data = column_dataset(x, y);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

Dataset parse_csv(std::string_view text, std::size_t targets) {
  if (targets == 0) throw ConfigError("csv: target column count must be positive");
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<double> values;
  std::size_t columns = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto cells = split_cells(line);
    std::vector<double> parsed(cells.size());
    std::size_t bad_column = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_number(cells[c], parsed[c])) {
        bad_column = c + 1;
        break;
      }
    }
    if (bad_column != 0) {
      if (rows == 0 && columns == 0) {
        columns = cells.size();  // header row
        continue;
      }
      throw ParseError("csv: non-numeric cell '" + std::string(cells[bad_column - 1]) +
                           "' at row " + std::to_string(line_no) + ", column " +
                           std::to_string(bad_column),
                       line_no, bad_column);
    }
    if (columns == 0) columns = cells.size();
    if (cells.size() != columns) {
      throw ParseError("csv: row " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(columns),
                       line_no, 0);
    }
    values.insert(values.end(), parsed.begin(), parsed.end());
    ++rows;
  }
  if (rows == 0) throw ParseError("csv: no data rows", line_no, 0);
  if (columns <= targets) {
    throw ParseError("csv: need at least one feature column besides " +
                         std::to_string(targets) + " target column(s)",
                     1, 0);
  }

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> table(values.data(), static_cast<Eigen::Index>(rows),
                                         static_cast<Eigen::Index>(columns));
  const auto d = static_cast<Eigen::Index>(columns - targets);
  Dataset out;
  out.features = table.leftCols(d);
  out.targets = table.rightCols(static_cast<Eigen::Index>(targets));
  return out;
}

Dataset load_csv(const std::filesystem::path& path, std::size_t targets) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("csv: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), targets);
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot write " + path.string());
  for (std::size_t c = 0; c < d.feature_dim(); ++c) out << (c ? "," : "") << 'x' << c;
  for (std::size_t c = 0; c < d.target_dim(); ++c) out << ",y" << c;
  out << '\n';
  char buf[64];
  auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
  };
  for (Eigen::Index r = 0; r < d.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.features.cols(); ++c) {
      if (c) out << ',';
      put(d.features(r, c));
    }
    for (Eigen::Index c = 0; c < d.targets.cols(); ++c) {
      out << ',';
      put(d.targets(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("csv: write failed for " + path.string());
}

ColumnStats column_stats(const Eigen::MatrixXd& m) {
  ColumnStats s;
  const auto n = static_cast<double>(m.rows());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double mu = m.col(c).sum() / n;
    const double var = (m.col(c).array() - mu).square().sum() / n;
    s.mean.push_back(mu);
    s.scale.push_back(var > 0.0 ? std::sqrt(var) : 1.0);
  }
  return s;
}

namespace {

Eigen::MatrixXd apply_stats(const Eigen::MatrixXd& m, const ColumnStats& s) {
  if (static_cast<std::size_t>(m.cols()) != s.mean.size()) {
    throw ShapeError("normalize: statistics do not match the column count");
  }
  Eigen::MatrixXd out = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const auto i = static_cast<std::size_t>(c);
    out.col(c) = (m.col(c).array() - s.mean[i]) / s.scale[i];
  }
  return out;
}

}  // namespace

Dataset apply_normalization(const Dataset& raw, const ColumnStats& features,
                            const ColumnStats& targets) {
  if (raw.normalized()) throw DomainError("normalize: dataset is already normalized");
  Dataset out;
  out.features = apply_stats(raw.features, features);
  out.targets = apply_stats(raw.targets, targets);
  out.feature_stats = features;
  out.target_stats = targets;
  return out;
}

NormalizedPair normalize(const Dataset& train, const Dataset& test) {
  train.validate();
  const ColumnStats fs = column_stats(train.features);
  const ColumnStats ts = column_stats(train.targets);
  return {apply_normalization(train, fs, ts), apply_normalization(test, fs, ts)};
}

double denormalize_target(double value, const ColumnStats& stats, std::size_t col) {
  return stats.mean.at(col) + stats.scale.at(col) * value;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<Split> benchmark_splits(const Dataset& d, std::size_t trials, double test_fraction,
                                    std::uint64_t seed) {
  d.validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DomainError("benchmark_splits: test_fraction must lie in (0, 1)");
  }
  const std::size_t n = d.size();
  const auto n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction)));
  if (n_test >= n) throw DomainError("benchmark_splits: dataset too small to split");

  std::vector<Split> out;
  out.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(seed, t));
    std::shuffle(order.begin(), order.end(), rng);
    Split s;
    s.test_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(s.test_rows.begin(), s.test_rows.end());
    std::sort(s.train_rows.begin(), s.train_rows.end());
    s.train = d.subset(s.train_rows);
    s.test = d.subset(s.test_rows);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace edr
