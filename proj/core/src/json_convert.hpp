#pragma once

// nlohmann/json conversions for core types. Private to the core library.

#include <json.hpp>

#include "protosarc/checkpoint.hpp"
#include "protosarc/losses.hpp"
#include "protosarc/metrics.hpp"

namespace protosarc::detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_ordered_json(const Metrics& m) {
  ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["confusion"] = {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"fn", m.confusion.fn}, {"tn", m.confusion.tn}};
  j["precision_undefined"] = m.precision_undefined;
  j["recall_undefined"] = m.recall_undefined;
  j["f1_undefined"] = m.f1_undefined;
  return j;
}

inline ordered_json to_ordered_json(const LossBreakdown& b) {
  ordered_json j;
  j["acc"] = b.acc;
  j["div"] = b.div;
  j["cls_ct"] = b.cls_ct;
  j["sep_ct"] = b.sep_ct;
  j["cls_st"] = b.cls_st;
  j["sep_st"] = b.sep_st;
  j["inco"] = b.inco;
  j["l1"] = b.l1;
  j["total"] = b.total;
  return j;
}

inline ordered_json to_ordered_json(const LossWeights& w) {
  ordered_json j;
  j["division"] = w.division;
  j["cluster_sep"] = w.cluster_sep;
  j["incongruity"] = w.incongruity;
  j["l1"] = w.l1;
  j["cos_threshold"] = w.cos_threshold;
  j["sep_sign"] = w.sep_sign;
  return j;
}

}  // namespace protosarc::detail
