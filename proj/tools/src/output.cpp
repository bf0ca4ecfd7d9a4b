#include "edr/cli/output.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace edr::cli {

std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_csv_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<Cell>>& rows) {
  auto out = open_for_write(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i].text;
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_calibration_csv(const std::filesystem::path& path, const CalibrationCurve& c) {
  std::vector<std::vector<Cell>> rows;
  for (std::size_t i = 0; i < c.levels.size(); ++i) rows.push_back({c.levels[i], c.observed[i]});
  write_csv_table(path, {"level", "observed"}, rows);
}

void write_cutoff_csv(const std::filesystem::path& path, const std::vector<CutoffPoint>& c) {
  std::vector<std::vector<Cell>> rows;
  for (const auto& p : c) rows.push_back({p.percentile, p.rmse});
  write_csv_table(path, {"percentile_removed", "rmse"}, rows);
}

void write_cdf_csv(const std::filesystem::path& path, const std::string& value_name,
                   const std::vector<CdfPoint>& c) {
  std::vector<std::vector<Cell>> rows;
  for (const auto& p : c) rows.push_back({p.value, p.cumulative});
  write_csv_table(path, {value_name, "cumulative"}, rows);
}

std::filesystem::path prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
  return dir;
}

}  // namespace edr::cli
