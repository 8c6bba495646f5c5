#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "protosarc/checkpoint.hpp"
#include "protosarc/embedding_store.hpp"

namespace protosarc {

// Above this many training records an unset sample fraction defaults to
// kDefaultPresampleFraction.
inline constexpr std::size_t kPresampleThreshold = 100000;
inline constexpr double kDefaultPresampleFraction = 0.1;

struct ProjectionOptions {
  std::optional<double> sample_frac;
  std::uint64_t seed = 0;
  // Search only records whose label matches the prototype's tag.
  bool class_restricted = true;
  bool project_sentiment = true;
};

double resolve_sample_frac(const ProjectionOptions& options, std::size_t train_size);

/// Replaces every semantic prototype by the nearest semantic embedding of a
/// (pre-sampled) training record, and optionally every sentiment prototype by
/// the nearest whole-text sentiment embedding of a non-sarcastic record. The
/// returned checkpoint has a bumped revision and fresh projection metadata.
Checkpoint project_prototypes(const Checkpoint& model, const Dataset& train_ds, const ProjectionOptions& options);

struct RankedPrototype {
  std::size_t index = 0;
  int tag = 0;
  std::string record_id;
  std::string text;
  double distance = 0.0;  // ||e - p||
  double similarity = 0.0;

  bool operator==(const RankedPrototype&) const = default;
};

// Strongest positive- and negative-polarity sentiment prototype for one branch.
struct BranchSummary {
  double h = 0.5;  // incongruity head's P(polarity == 1)
  std::size_t top_positive = 0;
  double top_positive_similarity = 0.0;
  std::size_t top_negative = 0;
  double top_negative_similarity = 0.0;

  bool operator==(const BranchSummary&) const = default;
};

struct Explanation {
  std::string record_id;
  std::string text;
  double prob = 0.5;
  int predicted = 0;
  std::vector<RankedPrototype> semantic;  // ascending distance
  BranchSummary explicit_branch;
  BranchSummary implicit_branch;

  bool operator==(const Explanation&) const = default;
};

// Throws DataError for a model without valid projection metadata.
Explanation explain(const Checkpoint& model, const EmbeddingRecord& rec, std::size_t top_k);

std::string explanation_to_json(const Explanation& ex, int indent = -1);
std::string render_text(const Explanation& ex);

// Fixed-precision rendering used by both output formats.
std::string format_distance(double d);

}  // namespace protosarc
