#pragma once

// Per-sample building blocks shared by the loss evaluation and the analytic
// gradients.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "protosarc/errors.hpp"
#include "protosarc/linalg.hpp"

namespace protosarc::detail {

// -(y log sigmoid(z) + (1-y) log(1 - sigmoid(z)))
inline double bce_from_logit(double z, int y) { return softplus(z) - static_cast<double>(y) * z; }

struct NearestByTag {
  std::size_t same = 0;
  std::size_t other = 0;
  double same_dist = 0.0;
  double other_dist = 0.0;
};

// Nearest prototype with tag == label and nearest with tag != label, by
// squared distance; ties go to the lowest index.
inline NearestByTag nearest_by_tag(std::span<const double> e, int label, const std::vector<Vec>& bank,
                                   std::span<const int> tags) {
  NearestByTag out;
  out.same_dist = std::numeric_limits<double>::infinity();
  out.other_dist = std::numeric_limits<double>::infinity();
  bool have_same = false;
  bool have_other = false;
  for (std::size_t j = 0; j < bank.size(); ++j) {
    if (bank[j].size() != e.size()) throw DataError("dimension mismatch between embedding and prototype");
    const double d = squared_distance(e, bank[j]);
    if (tags[j] == label) {
      if (!have_same || d < out.same_dist) {
        out.same_dist = d;
        out.same = j;
        have_same = true;
      }
    } else if (!have_other || d < out.other_dist) {
      out.other_dist = d;
      out.other = j;
      have_other = true;
    }
  }
  if (!have_same || !have_other) {
    throw DataError("prototype bank lacks a prototype " + std::string(have_same ? "of another tag" : "of the sample's tag") +
                    " for label " + std::to_string(label));
  }
  return out;
}

}  // namespace protosarc::detail
