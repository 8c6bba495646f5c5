#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "protosarc/linalg.hpp"

namespace protosarc {

/// One sample: a semantic embedding, three sentiment embeddings, the sarcasm
/// label and the polarity labels of the explicit, implicit and whole text.
///
/// For non-sarcastic records the implicit polarity equals the explicit one;
/// for sarcastic records it is the opposite.
struct EmbeddingRecord {
  std::string id;
  std::string text;
  std::optional<std::string> ancestor;
  int y = 0;
  Vec e_ct;
  Vec e_st_ep;
  Vec e_st_ip;
  std::optional<Vec> e_st_full;  // absent in test-only files
  int z_ep = 0;
  int z_ip = 0;
  int z_full = 0;

  bool operator==(const EmbeddingRecord&) const = default;
};

enum class VectorEncoding { kPlain, kHex };

std::string_view to_string(VectorEncoding e);
VectorEncoding parse_vector_encoding(std::string_view s);

struct Manifest {
  std::size_t d_s = 0;
  std::size_t d_m = 0;
  std::string dataset;
  std::string split;
  std::string semantic_encoder;
  std::string sentiment_encoder;
  VectorEncoding encoding = VectorEncoding::kPlain;
  // Unrecognized manifest keys, kept as serialized JSON so they survive a
  // load/write cycle (e.g. the lexicon identifier written by the embedder).
  std::map<std::string, std::string> extra;

  bool operator==(const Manifest&) const = default;
};

struct Dataset {
  Manifest manifest;
  std::vector<EmbeddingRecord> records;
  std::vector<std::string> warnings;

  std::size_t size() const { return records.size(); }
  std::size_t d_s() const { return manifest.d_s; }
  std::size_t d_m() const { return manifest.d_m; }
  std::size_t count_label(int y) const;
  std::optional<std::size_t> find(std::string_view id) const;
};

// Throws DataError naming the first violated invariant. Used for datasets
// assembled in memory; load_dataset applies the same checks per line.
void validate(const Dataset& ds);

Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in, std::string_view source = "<stream>");

// Writes the manifest line followed by one record per line in canonical key
// order. Vectors use the manifest's encoding.
void write_dataset(const Dataset& ds, std::ostream& out);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // record index -> fold
  std::uint64_t seed = 0;
  bool stratified = true;
  std::vector<std::string> warnings;

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Stratified k-fold assignment. Each class is shuffled with a seeded stream
/// and dealt round-robin, continuing where the previous class stopped, so
/// both per-class and total fold sizes differ by at most one. Falls back to
/// an unstratified deal (with a warning) when a class has fewer than k
/// members.
FoldPlan split_folds(const Dataset& ds, int k, std::uint64_t seed);

struct HoldoutSplit {
  std::vector<std::size_t> keep;
  std::vector<std::size_t> holdout;
};

// Seeded, per-class holdout of round(frac * |class|) records (at least one
// per class when the class has two or more members).
HoldoutSplit stratified_holdout(const Dataset& ds, std::span<const std::size_t> indices,
                                double frac, std::uint64_t seed);

}  // namespace protosarc
