#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "protosarc/embedding_store.hpp"
#include "protosarc/prototype_network.hpp"

namespace protosarc {

// Decision rule: sarcastic when prob >= kDecisionThreshold.
inline constexpr double kDecisionThreshold = 0.5;

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

/// Binary metrics with the sarcastic class as positive. A ratio whose
/// denominator is zero is reported as 0 and flagged.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;

  bool operator==(const Metrics&) const = default;
};

Metrics metrics_from_confusion(const Confusion& c);
Metrics compute_metrics(std::span<const int> labels, std::span<const int> predictions);

int predict_label(double prob);
Metrics evaluate(const ModelParams& params, const Dataset& ds);

std::string metrics_to_json(const Metrics& m, int indent = -1);

}  // namespace protosarc
