#pragma once

// Text checkpoint of an MlpConfig plus its flat parameter vector. Numbers are
// written with shortest round-trip formatting, so save/load is bit-exact.
//
//   edr-checkpoint 1
//   input_dim 1
//   hidden 100 100 100
//   targets 1
//   head evidential
//   activation relu
//   dropout_p 0
//   feature_stats none | feature_stats <k> <mean...> <scale...>
//   target_stats ...
//   parameters <n>
//   <one value per line>
//   end

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edr/data.hpp"
#include "edr/diffnet.hpp"

namespace edr {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  MlpConfig config;
  std::vector<double> parameters;
  std::optional<ColumnStats> feature_stats;
  std::optional<ColumnStats> target_stats;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Snapshot a network together with the normalization of its training data.
Checkpoint make_checkpoint(const Mlp& net, const Dataset& train);
Mlp restore_network(const Checkpoint& ckpt);

std::string serialize(const Checkpoint& ckpt);
/// Throws ParseError on malformed input or an unsupported version.
Checkpoint deserialize(std::string_view text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace edr
