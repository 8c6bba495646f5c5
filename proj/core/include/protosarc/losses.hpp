#pragma once

#include <span>
#include <vector>

#include "protosarc/embedding_store.hpp"
#include "protosarc/linalg.hpp"
#include "protosarc/prototype_network.hpp"

namespace protosarc {

/// Coefficients of the composite objective
///   acc + division*div + cluster_sep*(cls_ct + s*sep_ct + cls_st + s*sep_st)
///       + incongruity*inco + l1*sum|theta|
/// where s = sep_sign. With s = -1 the separation distances are rewarded
/// rather than penalized.
struct LossWeights {
  double division = 0.5;
  double cluster_sep = 0.1;
  double incongruity = 0.5;
  double l1 = 1e-4;
  double cos_threshold = 0.3;  // hinge threshold of the division term, in [-1, 1]
  int sep_sign = -1;

  bool operator==(const LossWeights&) const = default;
};

// Throws ConfigError on negative weights, a threshold outside [-1, 1] or a
// sep_sign other than +1/-1.
void validate(const LossWeights& w);

// `l1` holds the raw sum of |theta|; the weight is applied only in `total`.
struct LossBreakdown {
  double acc = 0.0;
  double div = 0.0;
  double cls_ct = 0.0;
  double sep_ct = 0.0;
  double cls_st = 0.0;
  double sep_st = 0.0;
  double inco = 0.0;
  double l1 = 0.0;
  double total = 0.0;

  bool operator==(const LossBreakdown&) const = default;
};

using BatchView = std::span<const EmbeddingRecord* const>;

std::vector<const EmbeddingRecord*> batch_of(const Dataset& ds);
std::vector<const EmbeddingRecord*> batch_of(const Dataset& ds, std::span<const std::size_t> indices);

// Mean binary cross-entropy of the output probabilities, computed from the
// stored logits.
double acc_loss(std::span<const ForwardTrace> traces, std::span<const int> ys);

// Hinge on pairwise cosine similarity over unordered pairs of one bank.
double div_loss(const std::vector<Vec>& bank, double cos_threshold);

struct ClusterSeparation {
  double cls = 0.0;
  double sep = 0.0;
};

/// Mean over samples of the squared distance to the nearest prototype with
/// the sample's tag (cls) and to the nearest prototype with another tag (sep).
ClusterSeparation cls_sep(std::span<const Vec> embeddings, std::span<const int> labels, const std::vector<Vec>& bank,
                          std::span<const int> tags);

// Mean over samples of the explicit plus implicit polarity cross-entropy.
double inco_loss(std::span<const ForwardTrace> traces, std::span<const int> z_ep, std::span<const int> z_ip);

// Fills `l1` from theta and `total` from the parts.
LossBreakdown total_loss(LossBreakdown parts, const LossWeights& w, std::span<const double> theta);

double compose_total(const LossBreakdown& parts, const LossWeights& w);

// Every term of the objective on one batch.
LossBreakdown evaluate_loss(BatchView batch, const ModelParams& params, const LossWeights& w);

}  // namespace protosarc
