#include "protosarc/metrics.hpp"

#include <json.hpp>

#include "protosarc/errors.hpp"
#include "json_convert.hpp"

namespace protosarc {

Metrics metrics_from_confusion(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  const auto n = c.total();
  m.accuracy = n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
  if (c.tp + c.fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (m.precision + m.recall == 0.0) {
    m.f1_undefined = true;
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

Metrics compute_metrics(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) throw DataError("compute_metrics: label/prediction count mismatch");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool truth = labels[i] == 1;
    const bool pred = predictions[i] == 1;
    if (truth && pred) ++c.tp;
    else if (!truth && pred) ++c.fp;
    else if (truth && !pred) ++c.fn;
    else ++c.tn;
  }
  return metrics_from_confusion(c);
}

int predict_label(double prob) { return prob >= kDecisionThreshold ? 1 : 0; }

Metrics evaluate(const ModelParams& params, const Dataset& ds) {
  std::vector<int> labels, preds;
  labels.reserve(ds.size());
  preds.reserve(ds.size());
  for (const auto& r : ds.records) {
    labels.push_back(r.y);
    preds.push_back(predict_label(forward(r, params).prob));
  }
  return compute_metrics(labels, preds);
}

std::string metrics_to_json(const Metrics& m, int indent) { return detail::to_ordered_json(m).dump(indent); }

}  // namespace protosarc
