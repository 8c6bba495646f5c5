#include "protosarc/synthetic.hpp"

#include <cmath>
#include <string>

#include "protosarc/errors.hpp"
#include "protosarc/random.hpp"

namespace protosarc {

namespace {

Vec gaussian(Rng& rng, std::size_t d, double scale) {
  Vec v(d);
  for (auto& x : v) x = scale * standard_normal(rng);
  return v;
}

// Isotropic noise around a point offset by `offset` along axis `axis`.
Vec around_axis(Rng& rng, std::size_t d, std::size_t axis, double offset, double axis_noise, double other_noise) {
  Vec v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = (i == axis ? axis_noise : other_noise) * standard_normal(rng);
  v[axis] += offset;
  return v;
}

Manifest synthetic_manifest(std::size_t d_s, std::size_t d_m, const char* name) {
  Manifest m;
  m.d_s = d_s;
  m.d_m = d_m;
  m.dataset = name;
  m.split = "train";
  m.semantic_encoder = "synthetic";
  m.sentiment_encoder = "synthetic";
  return m;
}

std::size_t draw_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform_index(rng, hi - lo + 1));
}

}  // namespace

Vec planted_cluster_mean(const PlantedOptions& opt, int label, std::size_t cluster) {
  if (opt.d_s < 2 * opt.clusters_per_class) throw ConfigError("d_s must be at least 2 * clusters_per_class");
  Vec mean(opt.d_s, 0.0);
  const auto axis = static_cast<std::size_t>(label) * opt.clusters_per_class + cluster;
  mean[axis] = opt.separation * opt.noise / std::sqrt(2.0);
  return mean;
}

Dataset make_planted_dataset(const PlantedOptions& opt) {
  if (opt.n < 2) throw ConfigError("planted dataset needs at least 2 records");
  if (opt.clusters_per_class < 1) throw ConfigError("clusters_per_class must be at least 1");
  if (opt.d_m < 1) throw ConfigError("d_m must be at least 1");
  Rng rng(opt.seed);
  Dataset ds;
  ds.manifest = synthetic_manifest(opt.d_s, opt.d_m, "planted");
  for (std::size_t i = 0; i < opt.n; ++i) {
    EmbeddingRecord r;
    r.id = "p" + std::to_string(i);
    r.text = "planted record " + std::to_string(i);
    r.y = static_cast<int>(i % 2);
    const auto cluster = (i / 2) % opt.clusters_per_class;
    r.e_ct = planted_cluster_mean(opt, r.y, cluster);
    for (auto& x : r.e_ct) x += opt.noise * standard_normal(rng);
    r.z_ep = static_cast<int>(uniform_index(rng, 2));
    r.z_ip = r.y == 0 ? r.z_ep : 1 - r.z_ep;
    r.z_full = r.z_ep;
    auto polar = [&](int z) {
      return around_axis(rng, opt.d_m, 0, (z == 1 ? 0.5 : -0.5) * opt.polarity_gap, opt.noise, opt.noise);
    };
    r.e_st_ep = polar(r.z_ep);
    r.e_st_ip = polar(r.z_ip);
    r.e_st_full = polar(r.z_full);
    ds.records.push_back(std::move(r));
  }
  validate(ds);
  return ds;
}

Dataset make_incongruity_dataset(const IncongruityTaskOptions& opt) {
  if (opt.n < 4) throw ConfigError("incongruity dataset needs at least 4 records");
  if (opt.d_m < 2) throw ConfigError("incongruity dataset needs d_m >= 2");
  if (opt.d_s < 1) throw ConfigError("d_s must be at least 1");
  Rng rng(opt.seed);
  Dataset ds;
  ds.manifest = synthetic_manifest(opt.d_s, opt.d_m, "incongruity");
  const double half = 0.5 * opt.polarity_gap;
  for (std::size_t i = 0; i < opt.n; ++i) {
    EmbeddingRecord r;
    r.id = "q" + std::to_string(i);
    r.text = "incongruity record " + std::to_string(i);
    r.y = static_cast<int>(i % 2);
    r.e_ct = gaussian(rng, opt.d_s, 1.0);
    if (r.y == 1) {
      r.z_ep = 1;
      r.z_ip = 0;
    } else {
      r.z_ep = static_cast<int>((i / 2) % 2);
      r.z_ip = r.z_ep;
    }
    r.z_full = r.z_ep;
    auto branch = [&](int z) {
      return around_axis(rng, opt.d_m, 0, z == 1 ? half : -half, opt.polarity_noise, opt.nuisance);
    };
    r.e_st_ep = branch(r.z_ep);
    r.e_st_ip = branch(r.z_ip);
    r.e_st_full = around_axis(rng, opt.d_m, 1, r.z_full == 1 ? half : -half, opt.polarity_noise, opt.nuisance);
    ds.records.push_back(std::move(r));
  }
  validate(ds);
  return ds;
}

RandomInstance make_random_instance(std::uint64_t seed, const RandomInstanceLimits& limits) {
  if (limits.max_n < 1 || limits.max_k_a < 2 || limits.max_k_b < 2 || limits.max_d < 1 || limits.max_hidden < 1) {
    throw ConfigError("random instance limits too small");
  }
  Rng rng(seed);
  const auto n = draw_between(rng, 1, limits.max_n);
  const auto k_a = draw_between(rng, 2, limits.max_k_a);
  const auto k_b = draw_between(rng, 2, limits.max_k_b);
  const auto d_s = draw_between(rng, 1, limits.max_d);
  const auto d_m = draw_between(rng, 1, limits.max_d);
  const auto hidden = draw_between(rng, 1, limits.max_hidden);

  RandomInstance inst;
  inst.data.manifest = synthetic_manifest(d_s, d_m, "random");
  for (std::size_t i = 0; i < n; ++i) {
    EmbeddingRecord r;
    r.id = "x" + std::to_string(i);
    r.text = "random record " + std::to_string(i);
    r.y = static_cast<int>(uniform_index(rng, 2));
    r.e_ct = gaussian(rng, d_s, 1.0);
    r.e_st_ep = gaussian(rng, d_m, 1.0);
    r.e_st_ip = gaussian(rng, d_m, 1.0);
    r.e_st_full = gaussian(rng, d_m, 1.0);
    r.z_ep = static_cast<int>(uniform_index(rng, 2));
    r.z_ip = r.y == 0 ? r.z_ep : 1 - r.z_ep;
    r.z_full = static_cast<int>(uniform_index(rng, 2));
    inst.data.records.push_back(std::move(r));
  }

  auto& bank = inst.params.bank;
  bank.sigma_semantic = uniform(rng, 1.5, 3.0);
  bank.sigma_sentiment = uniform(rng, 1.5, 3.0);
  bank.eps = kDefaultEps;
  for (std::size_t j = 0; j < k_a; ++j) {
    bank.semantic.push_back(gaussian(rng, d_s, 0.8));
    bank.semantic_class.push_back(j < 2 ? static_cast<int>(j) : static_cast<int>(uniform_index(rng, 2)));
  }
  for (std::size_t j = 0; j < k_b; ++j) {
    bank.sentiment.push_back(gaussian(rng, d_m, 0.8));
    bank.sentiment_polarity.push_back(j < 2 ? static_cast<int>(j) : static_cast<int>(uniform_index(rng, 2)));
  }
  // Keep theta away from zero, where the L1 term has a kink.
  inst.params.head.theta.resize(k_a + 2 * k_b);
  for (auto& t : inst.params.head.theta) {
    t = uniform(rng, 0.1, 1.0) * (uniform_index(rng, 2) == 0 ? -1.0 : 1.0);
  }
  inst.params.head.bias = uniform(rng, -0.5, 0.5);
  auto& h = inst.params.inco_head;
  h.W1 = Matrix(k_b, hidden);
  for (auto& x : h.W1.data()) x = uniform(rng, -1.0, 1.0);
  h.b1.resize(hidden);
  for (auto& x : h.b1) x = uniform(rng, -0.5, 0.5);
  h.W2.resize(hidden);
  for (auto& x : h.W2) x = uniform(rng, -1.0, 1.0);
  h.b2 = uniform(rng, -0.5, 0.5);

  auto& w = inst.weights;
  w.division = uniform(rng, 0.1, 1.0);
  w.cluster_sep = uniform(rng, 0.05, 0.5);
  w.incongruity = uniform(rng, 0.1, 1.0);
  w.l1 = uniform(rng, 1e-4, 1e-2);
  w.cos_threshold = uniform(rng, -0.5, 0.5);
  w.sep_sign = uniform_index(rng, 2) == 0 ? -1 : 1;
  validate(inst.data);
  validate(inst.params);
  return inst;
}

}  // namespace protosarc
