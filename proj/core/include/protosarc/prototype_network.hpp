#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "protosarc/embedding_store.hpp"
#include "protosarc/linalg.hpp"

namespace protosarc {

inline constexpr double kDefaultSigma = 2.0;
inline constexpr double kDefaultEps = 1e-4;
// Probabilities reported in traces are kept inside [kProbFloor, 1 - kProbFloor].
inline constexpr double kProbFloor = 1e-12;

inline double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

/// Semantic prototypes (tagged with a sarcasm class) and sentiment prototypes
/// (tagged with a polarity), plus the kernel constants of each layer.
struct PrototypeBank {
  std::vector<Vec> semantic;
  std::vector<int> semantic_class;
  std::vector<Vec> sentiment;
  std::vector<int> sentiment_polarity;
  double sigma_semantic = kDefaultSigma;
  double sigma_sentiment = kDefaultSigma;
  double eps = kDefaultEps;

  std::size_t k_a() const { return semantic.size(); }
  std::size_t k_b() const { return sentiment.size(); }
  std::size_t d_s() const { return semantic.empty() ? 0 : semantic.front().size(); }
  std::size_t d_m() const { return sentiment.empty() ? 0 : sentiment.front().size(); }

  bool operator==(const PrototypeBank&) const = default;
};

// Linear layer over [w_ct | w_ep | w_ip] followed by a sigmoid.
struct OutputHead {
  Vec theta;
  double bias = 0.0;

  bool operator==(const OutputHead&) const = default;
};

// One-hidden-layer ReLU network mapping a sentiment similarity vector to
// P(polarity == 1). Shared by the explicit and implicit branches.
struct IncongruityHead {
  Matrix W1;  // k_b x H
  Vec b1;     // H
  Vec W2;     // H
  double b2 = 0.0;

  std::size_t hidden() const { return b1.size(); }

  bool operator==(const IncongruityHead&) const = default;
};

struct ModelParams {
  PrototypeBank bank;
  OutputHead head;
  IncongruityHead inco_head;

  bool operator==(const ModelParams&) const = default;
};

// Gradients share the parameter layout; tags and kernel constants are carried
// along unchanged and never differentiated.
using Gradients = ModelParams;

// Throws DataError when shapes or constants are inconsistent.
void validate(const ModelParams& params);

// Copy of params with every trainable entry set to zero.
Gradients zeros_like(const ModelParams& params);

/// Visits every trainable scalar in a fixed order: semantic prototypes,
/// sentiment prototypes, theta, bias, W1, b1, W2, b2. `fn` receives a
/// reference to the scalar and its flat index.
template <class Params, class Fn>
void for_each_parameter(Params& p, Fn&& fn) {
  std::size_t idx = 0;
  for (auto& v : p.bank.semantic)
    for (auto& x : v) fn(x, idx++);
  for (auto& v : p.bank.sentiment)
    for (auto& x : v) fn(x, idx++);
  for (auto& x : p.head.theta) fn(x, idx++);
  fn(p.head.bias, idx++);
  for (auto& x : p.inco_head.W1.data()) fn(x, idx++);
  for (auto& x : p.inco_head.b1) fn(x, idx++);
  for (auto& x : p.inco_head.W2) fn(x, idx++);
  fn(p.inco_head.b2, idx++);
}

std::size_t parameter_count(const ModelParams& params);
Vec flatten(const ModelParams& params);
void unflatten(std::span<const double> flat, ModelParams& params);
// Human-readable location of flat parameter `index`, e.g. "sentiment[2][5]".
std::string parameter_path(const ModelParams& params, std::size_t index);

struct ForwardTrace {
  Vec w_ct;
  Vec w_ep;
  Vec w_ip;
  double logit = 0.0;
  double prob = 0.5;
  double h_ep_logit = 0.0;
  double h_ep = 0.5;
  double h_ip_logit = 0.0;
  double h_ip = 0.5;

  bool operator==(const ForwardTrace&) const = default;
};

/// exp(-(||e - p||^2 + eps) / sigma^2). Strictly decreasing in the distance,
/// bounded in (0, exp(-eps / sigma^2)].
double rbf_similarity(std::span<const double> e, std::span<const double> p, double sigma, double eps);

Vec similarity_vector(std::span<const double> e, const std::vector<Vec>& bank, double sigma, double eps);

struct IncongruityPass {
  Vec pre;     // W1^T w + b1
  Vec hidden;  // max(0, pre)
  double logit = 0.0;
  double prob = 0.5;
};

IncongruityPass incongruity_pass(std::span<const double> w_st, const IncongruityHead& head);
double incongruity_forward(std::span<const double> w_st, const IncongruityHead& head);

ForwardTrace forward(const EmbeddingRecord& rec, const ModelParams& params);

}  // namespace protosarc
