#pragma once
// Tidy CSV and JSON writers. Numbers use shortest round-trip formatting so
// reruns produce identical bytes.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edr/eval.hpp"

namespace edr::cli {

std::string format_number(double v);

/// A CSV cell is either text or a number.
struct Cell {
  Cell(double v) : text(format_number(v)) {}
  Cell(std::size_t v) : text(std::to_string(v)) {}
  Cell(std::string s) : text(std::move(s)) {}
  Cell(const char* s) : text(s) {}
  std::string text;
};

void write_csv_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<Cell>>& rows);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

void write_calibration_csv(const std::filesystem::path& path, const CalibrationCurve& c);
void write_cutoff_csv(const std::filesystem::path& path, const std::vector<CutoffPoint>& c);
void write_cdf_csv(const std::filesystem::path& path, const std::string& value_name,
                   const std::vector<CdfPoint>& c);

/// Create (if needed) and return the output directory; throws on failure.
std::filesystem::path prepare_output_dir(const std::filesystem::path& dir);

}  // namespace edr::cli
