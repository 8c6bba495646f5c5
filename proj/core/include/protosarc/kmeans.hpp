#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "protosarc/embedding_store.hpp"
#include "protosarc/linalg.hpp"

namespace protosarc {

struct KMeansOptions {
  std::size_t max_iter = 100;
  double tol = 1e-6;  // stop once no center moves farther than this
  std::size_t n_init = 10;  // independent seeded starts; the lowest final inertia wins
};

struct KMeansResult {
  std::vector<Vec> centers;
  std::vector<std::size_t> assignment;  // point -> center
  double inertia = 0.0;                 // sum of squared distances to assigned centers
  // Inertia after each assignment step of the winning start; non-increasing.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
  std::vector<std::string> warnings;
};

/// Lloyd's algorithm from seeded k-means++ starts.
///
/// Empty clusters are repaired by moving the point of the largest cluster that
/// is farthest from its center into the empty one. When the input holds fewer
/// than k distinct points the distinct points themselves are returned as the
/// centers (so fewer than k) and a warning is recorded.
KMeansResult kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

struct TaggedVector {
  Vec vector;
  int tag = 0;  // sarcasm class for semantic prototypes, polarity for sentiment ones
};

// k-means over the semantic embeddings of each class; class 0 prototypes
// first, then class 1.
std::vector<TaggedVector> init_semantic_prototypes(const Dataset& ds, std::size_t k_per_class,
                                                   std::uint64_t seed, const KMeansOptions& options = {},
                                                   std::vector<std::string>* warnings = nullptr);

// k-means over whole-text sentiment embeddings of non-sarcastic records, split
// by whole-text polarity; polarity 0 prototypes first, then polarity 1.
std::vector<TaggedVector> init_sentiment_prototypes(const Dataset& ds, std::size_t k_per_polarity,
                                                    std::uint64_t seed, const KMeansOptions& options = {},
                                                    std::vector<std::string>* warnings = nullptr);

}  // namespace protosarc
