#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double rbf(const Vec& e, const Vec& p, double sigma, double eps) {
  return std::exp(-(sq_dist(e, p) + eps) / (sigma * sigma));
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double bce(double p, int y) {
  p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

namespace {

double head_prob(const Vec& w, const protosarc::IncongruityHead& h) {
  double z = h.b2;
  for (std::size_t c = 0; c < h.b1.size(); ++c) {
    double a = h.b1[c];
    for (std::size_t r = 0; r < w.size(); ++r) a += h.W1(r, c) * w[r];
    z += h.W2[c] * (a > 0.0 ? a : 0.0);
  }
  return logistic(z);
}

Vec sims(const Vec& e, const std::vector<Vec>& bank, double sigma, double eps) {
  Vec out;
  for (const auto& p : bank) out.push_back(rbf(e, p, sigma, eps));
  return out;
}

}  // namespace

double cosine_hinge_sum(const std::vector<Vec>& bank, double threshold) {
  double s = 0.0;
  for (std::size_t j = 0; j < bank.size(); ++j) {
    for (std::size_t q = 0; q < bank.size(); ++q) {
      if (j == q) continue;
      double d = 0.0, nj = 0.0, nq = 0.0;
      for (std::size_t i = 0; i < bank[j].size(); ++i) {
        d += bank[j][i] * bank[q][i];
        nj += bank[j][i] * bank[j][i];
        nq += bank[q][i] * bank[q][i];
      }
      s += std::max(0.0, d / std::sqrt(nj * nq) - threshold);
    }
  }
  return s / 2.0;
}

ClsSep cls_sep(const std::vector<Vec>& embeddings, const std::vector<int>& labels, const std::vector<Vec>& bank,
               const std::vector<int>& tags) {
  ClsSep out;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    std::vector<double> same, other;
    for (std::size_t j = 0; j < bank.size(); ++j) {
      (tags[j] == labels[i] ? same : other).push_back(sq_dist(embeddings[i], bank[j]));
    }
    std::sort(same.begin(), same.end());
    std::sort(other.begin(), other.end());
    out.cls += same.front();
    out.sep += other.front();
  }
  out.cls /= static_cast<double>(embeddings.size());
  out.sep /= static_cast<double>(embeddings.size());
  return out;
}

Terms loss_terms(const std::vector<protosarc::EmbeddingRecord>& batch, const protosarc::ModelParams& params,
                 const protosarc::LossWeights& w) {
  const auto& bank = params.bank;
  const double n = static_cast<double>(batch.size());
  Terms t;
  std::vector<Vec> e_ct, e_ep, e_ip;
  std::vector<int> y, z_ep, z_ip;
  for (const auto& r : batch) {
    Vec feats = sims(r.e_ct, bank.semantic, bank.sigma_semantic, bank.eps);
    const Vec w_ep = sims(r.e_st_ep, bank.sentiment, bank.sigma_sentiment, bank.eps);
    const Vec w_ip = sims(r.e_st_ip, bank.sentiment, bank.sigma_sentiment, bank.eps);
    feats.insert(feats.end(), w_ep.begin(), w_ep.end());
    feats.insert(feats.end(), w_ip.begin(), w_ip.end());
    double z = params.head.bias;
    for (std::size_t j = 0; j < feats.size(); ++j) z += params.head.theta[j] * feats[j];
    t.acc += bce(logistic(z), r.y) / n;
    t.inco += (bce(head_prob(w_ep, params.inco_head), r.z_ep) + bce(head_prob(w_ip, params.inco_head), r.z_ip)) / n;
    e_ct.push_back(r.e_ct);
    y.push_back(r.y);
    e_ep.push_back(r.e_st_ep);
    z_ep.push_back(r.z_ep);
    e_ip.push_back(r.e_st_ip);
    z_ip.push_back(r.z_ip);
  }
  t.div = cosine_hinge_sum(bank.semantic, w.cos_threshold) + cosine_hinge_sum(bank.sentiment, w.cos_threshold);
  const auto ct = cls_sep(e_ct, y, bank.semantic, bank.semantic_class);
  t.cls_ct = ct.cls;
  t.sep_ct = ct.sep;
  const auto ep = cls_sep(e_ep, z_ep, bank.sentiment, bank.sentiment_polarity);
  const auto ip = cls_sep(e_ip, z_ip, bank.sentiment, bank.sentiment_polarity);
  t.cls_st = ep.cls + ip.cls;
  t.sep_st = ep.sep + ip.sep;
  for (double th : params.head.theta) t.l1 += std::fabs(th);
  const double s = static_cast<double>(w.sep_sign);
  t.total = t.acc + w.division * t.div + w.cluster_sep * (t.cls_ct + s * t.sep_ct + t.cls_st + s * t.sep_st) +
            w.incongruity * t.inco + w.l1 * t.l1;
  return t;
}

TwoPartition best_two_partition(const std::vector<Vec>& points) {
  const std::size_t n = points.size();
  TwoPartition best;
  best.inertia = std::numeric_limits<double>::infinity();
  const std::size_t d = points.front().size();
  for (unsigned long mask = 1; mask + 1 < (1ul << n); ++mask) {
    Vec ca(d, 0.0), cb(d, 0.0);
    double na = 0, nb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Vec& c = (mask >> i) & 1 ? ca : cb;
      ((mask >> i) & 1 ? na : nb) += 1;
      for (std::size_t k = 0; k < d; ++k) c[k] += points[i][k];
    }
    for (std::size_t k = 0; k < d; ++k) {
      ca[k] /= na;
      cb[k] /= nb;
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += sq_dist(points[i], (mask >> i) & 1 ? ca : cb);
    if (inertia < best.inertia) best = {inertia, ca, cb};
  }
  return best;
}

bool close_rel(double a, double b, double rel, double abs_floor) {
  const double scale = std::max({std::fabs(a), std::fabs(b), abs_floor});
  return std::fabs(a - b) <= rel * scale;
}

}  // namespace oracle
