#include "protosarc/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "protosarc/errors.hpp"
#include "loss_terms.hpp"

namespace protosarc {

void validate(const LossWeights& w) {
  for (double v : {w.division, w.cluster_sep, w.incongruity, w.l1}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("loss weights must be finite and nonnegative");
  }
  if (!(w.cos_threshold >= -1.0 && w.cos_threshold <= 1.0)) throw ConfigError("cos_threshold must lie in [-1, 1]");
  if (w.sep_sign != 1 && w.sep_sign != -1) throw ConfigError("sep_sign must be +1 or -1");
}

std::vector<const EmbeddingRecord*> batch_of(const Dataset& ds) {
  std::vector<const EmbeddingRecord*> out;
  out.reserve(ds.records.size());
  for (const auto& r : ds.records) out.push_back(&r);
  return out;
}

std::vector<const EmbeddingRecord*> batch_of(const Dataset& ds, std::span<const std::size_t> indices) {
  std::vector<const EmbeddingRecord*> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(&ds.records.at(i));
  return out;
}

double acc_loss(std::span<const ForwardTrace> traces, std::span<const int> ys) {
  if (traces.empty() || traces.size() != ys.size()) throw DataError("acc_loss: need one label per trace");
  double s = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) s += detail::bce_from_logit(traces[i].logit, ys[i]);
  return s / static_cast<double>(traces.size());
}

double div_loss(const std::vector<Vec>& bank, double cos_threshold) {
  if (bank.size() < 2) throw DataError("div_loss: need at least two prototypes");
  std::vector<double> norms(bank.size());
  for (std::size_t j = 0; j < bank.size(); ++j) {
    norms[j] = norm(bank[j]);
    if (norms[j] == 0.0) throw NumericalError("div_loss: prototype " + std::to_string(j) + " has zero norm");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < bank.size(); ++j) {
    for (std::size_t q = j + 1; q < bank.size(); ++q) {
      const double c = dot(bank[j], bank[q]) / (norms[j] * norms[q]);
      s += std::max(0.0, c - cos_threshold);
    }
  }
  return s;
}

ClusterSeparation cls_sep(std::span<const Vec> embeddings, std::span<const int> labels, const std::vector<Vec>& bank,
                          std::span<const int> tags) {
  if (embeddings.empty() || embeddings.size() != labels.size()) throw DataError("cls_sep: need one label per embedding");
  ClusterSeparation out;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto near = detail::nearest_by_tag(embeddings[i], labels[i], bank, tags);
    out.cls += near.same_dist;
    out.sep += near.other_dist;
  }
  const auto n = static_cast<double>(embeddings.size());
  out.cls /= n;
  out.sep /= n;
  return out;
}

double inco_loss(std::span<const ForwardTrace> traces, std::span<const int> z_ep, std::span<const int> z_ip) {
  if (traces.empty() || traces.size() != z_ep.size() || traces.size() != z_ip.size()) {
    throw DataError("inco_loss: need explicit and implicit labels per trace");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    s += detail::bce_from_logit(traces[i].h_ep_logit, z_ep[i]) + detail::bce_from_logit(traces[i].h_ip_logit, z_ip[i]);
  }
  return s / static_cast<double>(traces.size());
}

double compose_total(const LossBreakdown& p, const LossWeights& w) {
  const double s = static_cast<double>(w.sep_sign);
  return p.acc + w.division * p.div + w.cluster_sep * (p.cls_ct + s * p.sep_ct + p.cls_st + s * p.sep_st) +
         w.incongruity * p.inco + w.l1 * p.l1;
}

LossBreakdown total_loss(LossBreakdown parts, const LossWeights& w, std::span<const double> theta) {
  double l1 = 0.0;
  for (double t : theta) l1 += std::abs(t);
  parts.l1 = l1;
  parts.total = compose_total(parts, w);
  return parts;
}

LossBreakdown evaluate_loss(BatchView batch, const ModelParams& params, const LossWeights& w) {
  if (batch.empty()) throw DataError("evaluate_loss: empty batch");
  const auto& bank = params.bank;
  LossBreakdown parts;
  for (const auto* rec : batch) {
    const auto t = forward(*rec, params);
    parts.acc += detail::bce_from_logit(t.logit, rec->y);
    parts.inco += detail::bce_from_logit(t.h_ep_logit, rec->z_ep) + detail::bce_from_logit(t.h_ip_logit, rec->z_ip);
    const auto ct = detail::nearest_by_tag(rec->e_ct, rec->y, bank.semantic, bank.semantic_class);
    const auto ep = detail::nearest_by_tag(rec->e_st_ep, rec->z_ep, bank.sentiment, bank.sentiment_polarity);
    const auto ip = detail::nearest_by_tag(rec->e_st_ip, rec->z_ip, bank.sentiment, bank.sentiment_polarity);
    parts.cls_ct += ct.same_dist;
    parts.sep_ct += ct.other_dist;
    parts.cls_st += ep.same_dist + ip.same_dist;
    parts.sep_st += ep.other_dist + ip.other_dist;
  }
  const auto n = static_cast<double>(batch.size());
  parts.acc /= n;
  parts.inco /= n;
  parts.cls_ct /= n;
  parts.sep_ct /= n;
  parts.cls_st /= n;
  parts.sep_st /= n;
  parts.div = div_loss(bank.semantic, w.cos_threshold) + div_loss(bank.sentiment, w.cos_threshold);
  auto out = total_loss(parts, w, params.head.theta);
  if (!std::isfinite(out.total)) throw NumericalError("evaluate_loss: non-finite total loss");
  return out;
}

}  // namespace protosarc
