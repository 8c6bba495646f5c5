#include "protosarc/prototype_network.hpp"

#include <algorithm>
#include <cmath>

#include "protosarc/errors.hpp"

namespace protosarc {

namespace {

void check_bank(const std::vector<Vec>& bank, std::size_t dim, const char* name) {
  for (const auto& p : bank) {
    if (p.size() != dim) throw DataError(std::string(name) + " prototypes have inconsistent dimensions");
    for (double x : p) {
      if (!std::isfinite(x)) throw DataError(std::string(name) + " prototype has a non-finite entry");
    }
  }
}

void check_tags(const std::vector<int>& tags, std::size_t count, const char* name) {
  if (tags.size() != count) throw DataError(std::string(name) + " tag count does not match prototype count");
  bool seen[2] = {false, false};
  for (int t : tags) {
    if (t != 0 && t != 1) throw DataError(std::string(name) + " tag outside {0,1}");
    seen[t] = true;
  }
  if (!seen[0] || !seen[1]) throw DataError(std::string(name) + " bank must hold prototypes of both tags");
}

}  // namespace

void validate(const ModelParams& params) {
  const auto& bank = params.bank;
  if (bank.k_a() < 2) throw DataError("need at least two semantic prototypes");
  if (bank.k_b() < 2) throw DataError("need at least two sentiment prototypes");
  check_bank(bank.semantic, bank.d_s(), "semantic");
  check_bank(bank.sentiment, bank.d_m(), "sentiment");
  check_tags(bank.semantic_class, bank.k_a(), "semantic");
  check_tags(bank.sentiment_polarity, bank.k_b(), "sentiment");
  if (!(bank.sigma_semantic > 0.0) || !(bank.sigma_sentiment > 0.0)) throw DataError("sigma must be positive");
  if (!(bank.eps > 0.0)) throw DataError("eps must be positive");
  if (params.head.theta.size() != bank.k_a() + 2 * bank.k_b()) {
    throw DataError("output weights have length " + std::to_string(params.head.theta.size()) + ", expected k_a + 2*k_b = " +
                    std::to_string(bank.k_a() + 2 * bank.k_b()));
  }
  const auto& h = params.inco_head;
  if (h.hidden() < 1) throw DataError("incongruity head needs at least one hidden unit");
  if (h.W1.rows() != bank.k_b() || h.W1.cols() != h.hidden() || h.W2.size() != h.hidden()) {
    throw DataError("incongruity head shape does not match k_b x H");
  }
}

Gradients zeros_like(const ModelParams& params) {
  Gradients g = params;
  for_each_parameter(g, [](double& x, std::size_t) { x = 0.0; });
  return g;
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  for_each_parameter(params, [&](const double&, std::size_t) { ++n; });
  return n;
}

Vec flatten(const ModelParams& params) {
  Vec out;
  out.reserve(parameter_count(params));
  for_each_parameter(params, [&](const double& x, std::size_t) { out.push_back(x); });
  return out;
}

void unflatten(std::span<const double> flat, ModelParams& params) {
  if (flat.size() != parameter_count(params)) throw DataError("flat parameter vector has the wrong length");
  for_each_parameter(params, [&](double& x, std::size_t i) { x = flat[i]; });
}

std::string parameter_path(const ModelParams& params, std::size_t index) {
  const auto& bank = params.bank;
  auto bracket = [](std::size_t i) { return "[" + std::to_string(i) + "]"; };
  std::size_t base = 0;
  const auto sem = bank.k_a() * bank.d_s();
  if (index < base + sem) return "semantic" + bracket((index - base) / bank.d_s()) + bracket((index - base) % bank.d_s());
  base += sem;
  const auto sen = bank.k_b() * bank.d_m();
  if (index < base + sen) return "sentiment" + bracket((index - base) / bank.d_m()) + bracket((index - base) % bank.d_m());
  base += sen;
  if (index < base + params.head.theta.size()) return "theta" + bracket(index - base);
  base += params.head.theta.size();
  if (index == base) return "bias";
  ++base;
  const auto& h = params.inco_head;
  const auto w1 = h.W1.rows() * h.W1.cols();
  if (index < base + w1) return "inco.W1" + bracket((index - base) / h.W1.cols()) + bracket((index - base) % h.W1.cols());
  base += w1;
  if (index < base + h.b1.size()) return "inco.b1" + bracket(index - base);
  base += h.b1.size();
  if (index < base + h.W2.size()) return "inco.W2" + bracket(index - base);
  base += h.W2.size();
  if (index == base) return "inco.b2";
  return "<out of range>";
}

double rbf_similarity(std::span<const double> e, std::span<const double> p, double sigma, double eps) {
  if (e.size() != p.size()) {
    throw DataError("dimension mismatch: " + std::to_string(e.size()) + " vs " + std::to_string(p.size()));
  }
  return std::exp(-(squared_distance(e, p) + eps) / (sigma * sigma));
}

Vec similarity_vector(std::span<const double> e, const std::vector<Vec>& bank, double sigma, double eps) {
  if (bank.empty()) throw DataError("similarity against an empty prototype bank");
  Vec out(bank.size());
  for (std::size_t j = 0; j < bank.size(); ++j) out[j] = rbf_similarity(e, bank[j], sigma, eps);
  return out;
}

IncongruityPass incongruity_pass(std::span<const double> w_st, const IncongruityHead& head) {
  if (w_st.size() != head.W1.rows()) {
    throw DataError("dimension mismatch: incongruity head expects " + std::to_string(head.W1.rows()) +
                    " similarities, got " + std::to_string(w_st.size()));
  }
  IncongruityPass pass;
  const auto H = head.hidden();
  pass.pre = head.b1;
  for (std::size_t j = 0; j < w_st.size(); ++j) {
    const auto row = head.W1.row(j);
    for (std::size_t k = 0; k < H; ++k) pass.pre[k] += w_st[j] * row[k];
  }
  pass.hidden.resize(H);
  for (std::size_t k = 0; k < H; ++k) pass.hidden[k] = std::max(0.0, pass.pre[k]);
  pass.logit = dot(head.W2, pass.hidden) + head.b2;
  pass.prob = clamp_prob(sigmoid(pass.logit));
  return pass;
}

double incongruity_forward(std::span<const double> w_st, const IncongruityHead& head) {
  return incongruity_pass(w_st, head).prob;
}

ForwardTrace forward(const EmbeddingRecord& rec, const ModelParams& params) {
  const auto& bank = params.bank;
  if (rec.e_ct.size() != bank.d_s() || rec.e_st_ep.size() != bank.d_m() || rec.e_st_ip.size() != bank.d_m()) {
    throw DataError("dimension mismatch: record '" + rec.id + "' does not match the model dimensions");
  }
  ForwardTrace t;
  t.w_ct = similarity_vector(rec.e_ct, bank.semantic, bank.sigma_semantic, bank.eps);
  t.w_ep = similarity_vector(rec.e_st_ep, bank.sentiment, bank.sigma_sentiment, bank.eps);
  t.w_ip = similarity_vector(rec.e_st_ip, bank.sentiment, bank.sigma_sentiment, bank.eps);

  const auto& theta = params.head.theta;
  const auto ka = t.w_ct.size();
  const auto kb = t.w_ep.size();
  double z = params.head.bias;
  for (std::size_t j = 0; j < ka; ++j) z += theta[j] * t.w_ct[j];
  for (std::size_t j = 0; j < kb; ++j) z += theta[ka + j] * t.w_ep[j];
  for (std::size_t j = 0; j < kb; ++j) z += theta[ka + kb + j] * t.w_ip[j];
  t.logit = z;
  t.prob = clamp_prob(sigmoid(z));

  const auto ep = incongruity_pass(t.w_ep, params.inco_head);
  const auto ip = incongruity_pass(t.w_ip, params.inco_head);
  t.h_ep_logit = ep.logit;
  t.h_ep = ep.prob;
  t.h_ip_logit = ip.logit;
  t.h_ip = ip.prob;
  return t;
}

}  // namespace protosarc
