#include "edr/cli/reference.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

namespace edr::cli {
namespace {

struct Entry {
  std::string_view dataset;
  ReferenceRow dropout;
  ReferenceRow ensemble;
  ReferenceRow evidential;
};

constexpr std::array<Entry, 9> kTable{{
    {"boston", {{2.97, 0.19}, {2.46, 0.06}, 3.24}, {{3.28, 1.00}, {2.41, 0.25}, 3.35},
     {{3.06, 0.16}, {2.35, 0.06}, 0.85}},
    {"concrete", {{5.23, 0.12}, {3.04, 0.02}, 2.99}, {{6.03, 0.58}, {3.06, 0.18}, 3.43},
     {{5.85, 0.15}, {3.01, 0.02}, 0.94}},
    {"energy", {{1.66, 0.04}, {1.99, 0.02}, 3.08}, {{2.09, 0.29}, {1.38, 0.22}, 3.80},
     {{2.06, 0.10}, {1.39, 0.06}, 0.87}},
    {"kin8nm", {{0.10, 0.00}, {-0.95, 0.01}, 3.24}, {{0.09, 0.00}, {-1.20, 0.02}, 3.79},
     {{0.09, 0.00}, {-1.24, 0.01}, 0.97}},
    {"naval", {{0.01, 0.00}, {-3.80, 0.01}, 3.31}, {{0.00, 0.00}, {-5.63, 0.05}, 3.37},
     {{0.00, 0.00}, {-5.73, 0.07}, 0.84}},
    {"power", {{4.02, 0.04}, {2.80, 0.01}, 2.93}, {{4.11, 0.17}, {2.79, 0.04}, 3.36},
     {{4.23, 0.09}, {2.81, 0.07}, 0.85}},
    {"protein", {{4.36, 0.01}, {2.89, 0.00}, 3.45}, {{4.71, 0.06}, {2.83, 0.02}, 3.68},
     {{4.64, 0.03}, {2.63, 0.00}, 1.18}},
    {"wine", {{0.62, 0.01}, {0.93, 0.01}, 3.00}, {{0.64, 0.04}, {0.94, 0.12}, 3.32},
     {{0.61, 0.02}, {0.89, 0.05}, 0.86}},
    {"yacht", {{1.11, 0.09}, {1.55, 0.03}, 2.99}, {{1.58, 0.48}, {1.18, 0.21}, 3.36},
     {{1.57, 0.56}, {1.03, 0.19}, 0.87}},
}};

}  // namespace

std::optional<ReferenceRow> reference_result(std::string_view dataset, Method method) {
  std::string key(dataset);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& e : kTable) {
    if (key.find(e.dataset) == std::string::npos) continue;
    switch (method) {
      case Method::dropout: return e.dropout;
      case Method::ensemble: return e.ensemble;
      case Method::evidential: return e.evidential;
      case Method::gaussian: return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace edr::cli
