#pragma once

#include <cstddef>
#include <cstdint>

#include "protosarc/embedding_store.hpp"
#include "protosarc/losses.hpp"
#include "protosarc/prototype_network.hpp"

namespace protosarc {

/// Generators for planted datasets with known structure. All output passes
/// validate(Dataset) and is a pure function of the options.

struct PlantedOptions {
  std::size_t n = 400;
  std::size_t d_s = 8;
  std::size_t d_m = 4;
  std::size_t clusters_per_class = 2;
  double noise = 0.5;        // per-coordinate std of every cluster
  double separation = 6.0;   // distance between cluster means, in units of noise
  double polarity_gap = 3.0; // distance between the two polarity means
  std::uint64_t seed = 1;
};

// Semantic clusters whose means sit on scaled orthogonal axes, so every pair
// of means is exactly separation * noise apart. Labels alternate to keep the
// classes balanced.
Dataset make_planted_dataset(const PlantedOptions& opt);

// Mean of cluster `cluster` of class `label` as placed by make_planted_dataset.
Vec planted_cluster_mean(const PlantedOptions& opt, int label, std::size_t cluster);

struct IncongruityTaskOptions {
  std::size_t n = 400;
  std::size_t d_s = 4;
  std::size_t d_m = 4;
  double polarity_gap = 2.0;    // distance between polarity means of the branch embeddings
  double polarity_noise = 0.3;  // std along the polarity direction
  double nuisance = 1.0;        // std of the remaining coordinates
  std::uint64_t seed = 1;
};

// Semantic vectors are drawn independently of the label. Sarcastic records
// carry a positive explicit part and a negative implicit part; non-sarcastic
// records carry two parts of the same polarity. The whole-text sentiment
// embedding encodes polarity along a different axis than the branch
// embeddings.
Dataset make_incongruity_dataset(const IncongruityTaskOptions& opt);

struct RandomInstanceLimits {
  std::size_t max_n = 8;
  std::size_t max_k_a = 6;
  std::size_t max_k_b = 4;
  std::size_t max_d = 8;
  std::size_t max_hidden = 5;
};

struct RandomInstance {
  Dataset data;
  ModelParams params;
  LossWeights weights;
};

// Small random model and batch with every class and polarity represented by at
// least one prototype and every loss weight strictly positive.
RandomInstance make_random_instance(std::uint64_t seed, const RandomInstanceLimits& limits = {});

}  // namespace protosarc
