#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "deephedge/pricer.hpp"
#include "deephedge/training.hpp"

namespace dh {

inline constexpr int kCheckpointFormatVersion = 1;

/// 64-bit FNV-1a digest as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

struct CheckpointMeta {
  std::string config_digest;
  std::uint64_t seed_data = 0;
  std::uint64_t seed_init = 0;
};

struct Checkpoint {
  std::shared_ptr<PricedModel> model;
  CheckpointMeta meta;
  std::optional<TrainingProgress> progress;
};

/// JSON document with format_version, shape, activation, theta (layer-major,
/// row-major weights then bias), config digest, seeds, architecture, payoff,
/// horizon and baseline source. Equinox models embed their call model.
/// Doubles are written in shortest round-trip form, so loading reproduces
/// theta bit for bit.
std::string checkpoint_to_string(const PricedModel& model, const CheckpointMeta& meta,
                                 const TrainingProgress* progress = nullptr);
Checkpoint checkpoint_from_string(std::string_view text);

void save_checkpoint(const std::filesystem::path& file, const PricedModel& model, const CheckpointMeta& meta,
                     const TrainingProgress* progress = nullptr);
/// Throws ConfigError naming the file when it is missing or malformed.
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace dh
