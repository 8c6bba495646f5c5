#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "protosarc/prototype_network.hpp"

namespace protosarc {

inline constexpr int kCheckpointFormatVersion = 1;

// The training record a prototype was replaced with.
struct ProjectedPrototype {
  std::size_t index = 0;
  std::string record_id;
  std::string text;
  double distance = 0.0;  // Euclidean, prototype to record before replacement
  int tag = 0;

  bool operator==(const ProjectedPrototype&) const = default;
};

struct Projection {
  std::uint64_t version = 0;         // increments on every projection of this model
  std::uint64_t model_revision = 0;  // Checkpoint::revision the metadata describes
  double sample_frac = 1.0;
  std::uint64_t seed = 0;
  bool class_restricted = true;
  bool sentiment_projected = true;
  std::size_t pool_size = 0;
  std::vector<ProjectedPrototype> semantic;
  std::vector<ProjectedPrototype> sentiment;  // empty unless sentiment_projected

  bool operator==(const Projection&) const = default;
};

/// Complete trainable state plus projection metadata.
///
/// `revision` increases whenever the parameters change; projection metadata
/// is only valid while its model_revision matches.
struct Checkpoint {
  ModelParams params;
  std::uint64_t revision = 1;
  std::optional<Projection> projection;

  bool is_projected() const { return projection.has_value() && projection->model_revision == revision; }
  // Installs new parameters and invalidates any projection.
  void replace_params(ModelParams p);

  bool operator==(const Checkpoint&) const = default;
};

std::string checkpoint_to_json(const Checkpoint& ck, int indent = 2);
Checkpoint checkpoint_from_json(std::string_view text);

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace protosarc
