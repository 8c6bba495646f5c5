#pragma once

// Independent brute-force reference implementations. They share no code
// with the library beyond the plain data types.

#include <cstddef>
#include <vector>

#include "protosarc/embedding_store.hpp"
#include "protosarc/losses.hpp"
#include "protosarc/prototype_network.hpp"

namespace oracle {

using protosarc::Vec;

double sq_dist(const Vec& a, const Vec& b);
double rbf(const Vec& e, const Vec& p, double sigma, double eps);
double logistic(double z);
// Cross-entropy of probability p against label y, with p clamped to [1e-12, 1 - 1e-12].
double bce(double p, int y);

struct Terms {
  double acc = 0.0, div = 0.0, cls_ct = 0.0, sep_ct = 0.0, cls_st = 0.0, sep_st = 0.0, inco = 0.0, l1 = 0.0,
         total = 0.0;
};

// Sums over ordered pairs and halves for the division term; minima by full scan.
Terms loss_terms(const std::vector<protosarc::EmbeddingRecord>& batch, const protosarc::ModelParams& params,
                 const protosarc::LossWeights& w);

double cosine_hinge_sum(const std::vector<Vec>& bank, double threshold);

struct ClsSep {
  double cls = 0.0;
  double sep = 0.0;
};
ClsSep cls_sep(const std::vector<Vec>& embeddings, const std::vector<int>& labels, const std::vector<Vec>& bank,
               const std::vector<int>& tags);

// Lowest inertia over every assignment of points to two nonempty clusters.
struct TwoPartition {
  double inertia = 0.0;
  Vec center_a, center_b;
};
TwoPartition best_two_partition(const std::vector<Vec>& points);

// Index of the nearest candidate among those accepted, or -1.
template <class Accept>
long nearest_index(const Vec& p, const std::vector<Vec>& candidates, Accept accept) {
  long best = -1;
  double best_d = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!accept(i)) continue;
    const double d = sq_dist(p, candidates[i]);
    if (best < 0 || d < best_d) {
      best = static_cast<long>(i);
      best_d = d;
    }
  }
  return best;
}

bool close_rel(double a, double b, double rel, double abs_floor = 1e-300);

}  // namespace oracle
