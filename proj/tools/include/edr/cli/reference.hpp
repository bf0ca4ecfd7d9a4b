#pragma once
// Published UCI benchmark results (mean, standard error over 20 splits) for
// dropout, ensembles and evidential regression, shown next to measured values.

#include <optional>
#include <string_view>

#include "edr/model.hpp"

namespace edr::cli {

struct ReferenceValue {
  double mean;
  double stderr_;
};

struct ReferenceRow {
  ReferenceValue rmse;
  ReferenceValue nll;
  double inference_ms;
};

/// Looks up a dataset by case-insensitive name (e.g. "yacht", "Boston").
/// Only dropout, ensemble and evidential rows exist.
std::optional<ReferenceRow> reference_result(std::string_view dataset, Method method);

}  // namespace edr::cli
