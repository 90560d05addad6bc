#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lava/design.hpp"
#include "lava/estimator.hpp"
#include "lava/timeseries.hpp"

namespace lava {

/// A fitted model together with the configuration needed to interpret Z.
struct StoredModel {
  std::string consumer_id;
  FeatureConfig features;
  EmOptions estimator;
  ModelState state;
  std::optional<Timestamp> last_update;  ///< last hour folded into the statistics
};

inline constexpr int kStateFormatVersion = 1;

/// Versioned JSON document. Doubles are written in shortest round-trip form,
/// so every vector payload reloads bit for bit. Symmetric matrices are stored
/// as their packed upper triangle.
std::string serialize_model(const StoredModel& model);
StoredModel deserialize_model(std::string_view text);

void save_model(const std::filesystem::path& path, const StoredModel& model);
/// Throws DataError for unreadable or malformed files, ConfigError for an
/// unsupported version.
StoredModel load_model(const std::filesystem::path& path);

}  // namespace lava
