#include "protosarc/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "protosarc/errors.hpp"
#include "protosarc/random.hpp"
#include "loss_terms.hpp"

namespace protosarc {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void add_scaled_difference(Vec& g, double coef, std::span<const double> e, std::span<const double> p) {
  for (std::size_t d = 0; d < g.size(); ++d) g[d] += coef * (e[d] - p[d]);
}

// Backpropagates one incongruity branch; adds the gradient with respect to
// the branch's similarity vector into `g_w`.
void backprop_incongruity(const IncongruityPass& pass, std::span<const double> w_st, int z, double scale,
                          const IncongruityHead& head, IncongruityHead& g, Vec& g_w) {
  const double gs = scale * (sigmoid(pass.logit) - static_cast<double>(z));
  const auto H = head.hidden();
  g.b2 += gs;
  Vec du(H, 0.0);
  for (std::size_t k = 0; k < H; ++k) {
    g.W2[k] += gs * pass.hidden[k];
    if (pass.pre[k] > 0.0) du[k] = gs * head.W2[k];
  }
  for (std::size_t k = 0; k < H; ++k) g.b1[k] += du[k];
  for (std::size_t j = 0; j < w_st.size(); ++j) {
    auto grow = g.W1.row(j);
    const auto hrow = head.W1.row(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < H; ++k) {
      grow[k] += w_st[j] * du[k];
      acc += hrow[k] * du[k];
    }
    g_w[j] += acc;
  }
}

void div_gradient(const std::vector<Vec>& bank, double threshold, double weight, std::vector<Vec>& g) {
  if (weight == 0.0) return;
  std::vector<double> norms(bank.size());
  for (std::size_t j = 0; j < bank.size(); ++j) {
    norms[j] = norm(bank[j]);
    if (norms[j] == 0.0) throw NumericalError("division gradient: prototype " + std::to_string(j) + " has zero norm");
  }
  for (std::size_t j = 0; j < bank.size(); ++j) {
    for (std::size_t q = j + 1; q < bank.size(); ++q) {
      const double nn = norms[j] * norms[q];
      const double c = dot(bank[j], bank[q]) / nn;
      if (!(c > threshold)) continue;
      const double cj = c / (norms[j] * norms[j]);
      const double cq = c / (norms[q] * norms[q]);
      for (std::size_t d = 0; d < bank[j].size(); ++d) {
        g[j][d] += weight * (bank[q][d] / nn - cj * bank[j][d]);
        g[q][d] += weight * (bank[j][d] / nn - cq * bank[q][d]);
      }
    }
  }
}

}  // namespace

GradientResult gradients(BatchView batch, const ModelParams& params, const LossWeights& w) {
  if (batch.empty()) throw DataError("gradients: empty batch");
  const auto& bank = params.bank;
  const auto& theta = params.head.theta;
  const auto ka = bank.k_a();
  const auto kb = bank.k_b();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const double two_over_sc = 2.0 / (bank.sigma_semantic * bank.sigma_semantic);
  const double two_over_ss = 2.0 / (bank.sigma_sentiment * bank.sigma_sentiment);
  const double s = static_cast<double>(w.sep_sign);

  GradientResult out{zeros_like(params), {}};
  auto& g = out.grads;
  LossBreakdown parts;

  Vec gw_ct(ka), gw_ep(kb), gw_ip(kb);
  for (const auto* rec : batch) {
    const auto t = forward(*rec, params);
    const auto ep = incongruity_pass(t.w_ep, params.inco_head);
    const auto ip = incongruity_pass(t.w_ip, params.inco_head);

    parts.acc += detail::bce_from_logit(t.logit, rec->y);
    parts.inco += detail::bce_from_logit(ep.logit, rec->z_ep) + detail::bce_from_logit(ip.logit, rec->z_ip);

    // Accuracy term through the output head.
    const double gz = inv_n * (sigmoid(t.logit) - static_cast<double>(rec->y));
    g.head.bias += gz;
    for (std::size_t j = 0; j < ka; ++j) {
      g.head.theta[j] += gz * t.w_ct[j];
      gw_ct[j] = gz * theta[j];
    }
    for (std::size_t j = 0; j < kb; ++j) {
      g.head.theta[ka + j] += gz * t.w_ep[j];
      g.head.theta[ka + kb + j] += gz * t.w_ip[j];
      gw_ep[j] = gz * theta[ka + j];
      gw_ip[j] = gz * theta[ka + kb + j];
    }

    if (w.incongruity != 0.0) {
      const double scale = w.incongruity * inv_n;
      backprop_incongruity(ep, t.w_ep, rec->z_ep, scale, params.inco_head, g.inco_head, gw_ep);
      backprop_incongruity(ip, t.w_ip, rec->z_ip, scale, params.inco_head, g.inco_head, gw_ip);
    }

    // d sim / d p = sim * 2 (e - p) / sigma^2
    for (std::size_t j = 0; j < ka; ++j) {
      add_scaled_difference(g.bank.semantic[j], gw_ct[j] * t.w_ct[j] * two_over_sc, rec->e_ct, bank.semantic[j]);
    }
    for (std::size_t j = 0; j < kb; ++j) {
      add_scaled_difference(g.bank.sentiment[j], gw_ep[j] * t.w_ep[j] * two_over_ss, rec->e_st_ep, bank.sentiment[j]);
      add_scaled_difference(g.bank.sentiment[j], gw_ip[j] * t.w_ip[j] * two_over_ss, rec->e_st_ip, bank.sentiment[j]);
    }

    // Clustering / separation: d ||e - p||^2 / d p = -2 (e - p)
    const auto ct = detail::nearest_by_tag(rec->e_ct, rec->y, bank.semantic, bank.semantic_class);
    const auto nep = detail::nearest_by_tag(rec->e_st_ep, rec->z_ep, bank.sentiment, bank.sentiment_polarity);
    const auto nip = detail::nearest_by_tag(rec->e_st_ip, rec->z_ip, bank.sentiment, bank.sentiment_polarity);
    parts.cls_ct += ct.same_dist;
    parts.sep_ct += ct.other_dist;
    parts.cls_st += nep.same_dist + nip.same_dist;
    parts.sep_st += nep.other_dist + nip.other_dist;
    if (w.cluster_sep != 0.0) {
      const double c = -2.0 * w.cluster_sep * inv_n;
      add_scaled_difference(g.bank.semantic[ct.same], c, rec->e_ct, bank.semantic[ct.same]);
      add_scaled_difference(g.bank.semantic[ct.other], s * c, rec->e_ct, bank.semantic[ct.other]);
      add_scaled_difference(g.bank.sentiment[nep.same], c, rec->e_st_ep, bank.sentiment[nep.same]);
      add_scaled_difference(g.bank.sentiment[nep.other], s * c, rec->e_st_ep, bank.sentiment[nep.other]);
      add_scaled_difference(g.bank.sentiment[nip.same], c, rec->e_st_ip, bank.sentiment[nip.same]);
      add_scaled_difference(g.bank.sentiment[nip.other], s * c, rec->e_st_ip, bank.sentiment[nip.other]);
    }
  }

  div_gradient(bank.semantic, w.cos_threshold, w.division, g.bank.semantic);
  div_gradient(bank.sentiment, w.cos_threshold, w.division, g.bank.sentiment);
  for (std::size_t j = 0; j < theta.size(); ++j) g.head.theta[j] += w.l1 * sign(theta[j]);

  parts.acc *= inv_n;
  parts.inco *= inv_n;
  parts.cls_ct *= inv_n;
  parts.sep_ct *= inv_n;
  parts.cls_st *= inv_n;
  parts.sep_st *= inv_n;
  parts.div = div_loss(bank.semantic, w.cos_threshold) + div_loss(bank.sentiment, w.cos_threshold);
  out.loss = total_loss(parts, w, theta);
  if (!std::isfinite(out.loss.total)) throw NumericalError("gradients: non-finite total loss");
  return out;
}

GradientResult averaged_gradients(std::span<const BatchView> micro_batches, const ModelParams& params,
                                  const LossWeights& w) {
  if (micro_batches.empty()) throw DataError("averaged_gradients: no micro-batches");
  GradientResult sum{zeros_like(params), {}};
  Vec acc(parameter_count(params), 0.0);
  LossBreakdown loss;
  for (const auto& mb : micro_batches) {
    const auto r = gradients(mb, params, w);
    for_each_parameter(r.grads, [&](const double& x, std::size_t i) { acc[i] += x; });
    loss.acc += r.loss.acc;
    loss.div += r.loss.div;
    loss.cls_ct += r.loss.cls_ct;
    loss.sep_ct += r.loss.sep_ct;
    loss.cls_st += r.loss.cls_st;
    loss.sep_st += r.loss.sep_st;
    loss.inco += r.loss.inco;
    loss.l1 += r.loss.l1;
  }
  const double inv = 1.0 / static_cast<double>(micro_batches.size());
  for (auto& x : acc) x *= inv;
  unflatten(acc, sum.grads);
  for (double* f : {&loss.acc, &loss.div, &loss.cls_ct, &loss.sep_ct, &loss.cls_st, &loss.sep_st, &loss.inco, &loss.l1}) {
    *f *= inv;
  }
  loss.total = compose_total(loss, w);
  sum.loss = loss;
  return sum;
}

GradCheckReport check_gradient(const Objective& objective, std::span<const double> analytic, std::span<const double> x,
                               double step, std::size_t max_params, std::uint64_t seed) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  if (analytic.size() != x.size()) throw DataError("check_gradient: gradient and point differ in length");
  GradCheckReport report;
  report.total = x.size();

  std::vector<std::size_t> probe(x.size());
  std::iota(probe.begin(), probe.end(), std::size_t{0});
  if (probe.size() > max_params) {
    Rng rng(seed);
    shuffle(probe.begin(), probe.end(), rng);
    probe.resize(max_params);
    std::sort(probe.begin(), probe.end());
  }

  Vec point(x.begin(), x.end());
  for (auto i : probe) {
    const double orig = point[i];
    point[i] = orig + step;
    const double up = objective(point);
    point[i] = orig - step;
    const double down = objective(point);
    point[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("check_gradient: non-finite objective while probing parameter " + std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
    if (report.checked == 0 || rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_index = i;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
    ++report.checked;
  }
  return report;
}

GradCheckReport finite_diff_check(const ModelParams& params, BatchView batch, const LossWeights& w, double step,
                                  std::size_t max_params, std::uint64_t seed) {
  const auto analytic = flatten(gradients(batch, params, w).grads);
  ModelParams probe = params;
  const Objective objective = [&](std::span<const double> flat) {
    unflatten(flat, probe);
    return evaluate_loss(batch, probe, w).total;
  };
  auto report = check_gradient(objective, analytic, flatten(params), step, max_params, seed);
  report.worst_path = parameter_path(params, report.worst_index);
  return report;
}

}  // namespace protosarc
