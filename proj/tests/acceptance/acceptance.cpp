// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "protosarc/checkpoint.hpp"
#include "protosarc/explain.hpp"
#include "protosarc/gradients.hpp"
#include "protosarc/kmeans.hpp"
#include "protosarc/metrics.hpp"
#include "protosarc/random.hpp"
#include "protosarc/synthetic.hpp"
#include "protosarc/trainer.hpp"

using namespace protosarc;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Train / validation / test carve-up used by the end-to-end criteria.
struct Split {
  Dataset train, val, test;
};

Split split_80_20(const Dataset& ds, std::uint64_t seed) {
  const auto outer = stratified_holdout(ds, iota_n(ds.size()), 0.2, seed);
  const auto inner = stratified_holdout(ds, outer.keep, 0.1, derive_seed(seed, 1));
  return {subset(ds, inner.keep), subset(ds, inner.holdout), subset(ds, outer.holdout)};
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string where;
  bool signs[2] = {false, false};
  for (std::uint64_t s = 1; s <= 20; ++s) {
    auto inst = make_random_instance(s);
    inst.weights.sep_sign = s % 2 == 0 ? 1 : -1;
    signs[s % 2] = true;
    const auto r = finite_diff_check(inst.params, batch_of(inst.data), inst.weights, 1e-5);
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      where = "seed " + std::to_string(s) + " " + r.worst_path;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 60.0 && signs[0] && signs[1],
          "20 configs, max rel err " + fmt("%.3g", worst) + " (" + where + "), " + fmt("%.2f", secs) + " s"};
}

Outcome loss_oracle_suite() {
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 100; ++s) {
    const auto inst = make_random_instance(1000 + s);
    const auto got = evaluate_loss(batch_of(inst.data), inst.params, inst.weights);
    const auto want = oracle::loss_terms(inst.data.records, inst.params, inst.weights);
    const std::pair<double, double> terms[] = {{got.acc, want.acc},       {got.div, want.div},
                                               {got.cls_ct, want.cls_ct}, {got.sep_ct, want.sep_ct},
                                               {got.cls_st, want.cls_st}, {got.sep_st, want.sep_st},
                                               {got.inco, want.inco},     {got.l1, want.l1},
                                               {got.total, want.total}};
    for (const auto& [a, b] : terms) {
      const double scale = std::max(std::fabs(a), std::fabs(b));
      const double rel = scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 1e-10, "100 instances x 9 terms, max rel err " + fmt("%.3g", worst)};
}

Outcome kernel_properties() {
  Rng rng(2024);
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 1 + uniform_index(rng, 8);
    Vec e(d), p(d);
    for (std::size_t k = 0; k < d; ++k) {
      e[k] = uniform(rng, -2, 2);
      p[k] = uniform(rng, -2, 2);
    }
    const double sigma = uniform(rng, 1.0, 4.0);
    const double eps = uniform(rng, 1e-6, 1e-2);
    const double s = rbf_similarity(e, p, sigma, eps);
    const bool bounded = s > 0.0 && s <= std::exp(-eps / (sigma * sigma));
    const bool symmetric = s == rbf_similarity(p, e, sigma, eps);
    // Push e farther from p along the same ray.
    const double t = uniform(rng, 1.05, 1.5);
    Vec far(d);
    for (std::size_t k = 0; k < d; ++k) far[k] = p[k] + t * (e[k] - p[k]);
    const bool monotone = squared_distance(e, p) == 0.0 || rbf_similarity(far, p, sigma, eps) < s;
    if (!(bounded && symmetric && monotone)) ++violations;
  }
  return {violations == 0, "10000 draws, " + std::to_string(violations) + " violations"};
}

Outcome kmeans_properties() {
  std::size_t non_monotone = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    std::vector<Vec> pts(80, Vec(3));
    for (auto& p : pts)
      for (auto& x : p) x = 2.0 * standard_normal(rng) + (uniform_index(rng, 3) == 0 ? 6.0 : 0.0);
    const auto r = kmeans(pts, 1 + s % 6, s);
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      if (r.inertia_history[i] > r.inertia_history[i - 1]) ++non_monotone;
    }
  }
  const std::vector<Vec> four = {{0, 0}, {0, 2}, {10, 0}, {10, 2}};
  std::size_t exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto c = kmeans(four, 2, seed).centers;
    std::sort(c.begin(), c.end());
    if (c == std::vector<Vec>{{0, 1}, {10, 1}}) ++exact;
  }
  return {non_monotone == 0 && exact == 20, "50 runs with " + std::to_string(non_monotone) +
                                                " inertia increases; 4-point instance exact for " +
                                                std::to_string(exact) + "/20 seeds"};
}

struct PlantedRun {
  Dataset data;
  Split split;
  TrainResult result;
  double seconds = 0.0;
};

PlantedRun planted_run() {
  PlantedRun run;
  PlantedOptions po;
  po.n = 400;
  po.seed = 7;
  run.data = make_planted_dataset(po);
  run.split = split_80_20(run.data, 7);
  const auto t0 = Clock::now();
  run.result = train(run.split.train, run.split.val, TrainConfig{});
  run.seconds = seconds_since(t0);
  return run;
}

Outcome end_to_end(const PlantedRun& run) {
  const auto m = evaluate(run.result.params, run.split.test);
  const auto epochs = run.result.history.stopped_epoch;
  return {m.accuracy >= 0.95 && m.f1 >= 0.95 && epochs <= 100 && run.seconds < 300.0,
          "test accuracy " + fmt("%.4f", m.accuracy) + ", F1 " + fmt("%.4f", m.f1) + " on " +
              std::to_string(run.split.test.size()) + " held-out records, " + std::to_string(epochs) + " epochs, " +
              fmt("%.1f", run.seconds) + " s"};
}

Outcome incongruity_ablation() {
  std::vector<double> gains;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    IncongruityTaskOptions io;
    io.seed = seed;
    const auto split = split_80_20(make_incongruity_dataset(io), seed);
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.lr = 1e-3;
    cfg.k_per_polarity = 1;
    cfg.max_epochs = 200;
    auto without = cfg;
    without.weights.incongruity = 0.0;
    const double acc_with = evaluate(train(split.train, split.val, cfg).params, split.test).accuracy;
    const double acc_without = evaluate(train(split.train, split.val, without).params, split.test).accuracy;
    const double gain = 100.0 * (acc_with - acc_without);
    gains.push_back(gain);
    per_seed += (per_seed.empty() ? "" : ", ") + fmt("%+.1f", gain);
  }
  auto sorted = gains;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[2];
  return {median >= 5.0, "median gain " + fmt("%+.2f", median) + " points (per seed: " + per_seed + ")"};
}

Outcome projection_optimality(const PlantedRun& run) {
  Checkpoint ck;
  ck.params = run.result.params;
  const auto& train_ds = run.split.train;
  const auto projected = project_prototypes(ck, train_ds, {});
  const auto& meta = *projected.projection;
  const auto& before = ck.params.bank;
  const auto& after = projected.params.bank;
  std::size_t checked = 0, wrong = 0;

  std::vector<Vec> cts, fulls;
  for (const auto& r : train_ds.records) {
    cts.push_back(r.e_ct);
    fulls.push_back(r.e_st_full.value_or(Vec{}));
  }
  for (std::size_t j = 0; j < before.k_a(); ++j) {
    const int tag = before.semantic_class[j];
    const auto idx = oracle::nearest_index(before.semantic[j], cts,
                                           [&](std::size_t i) { return train_ds.records[i].y == tag; });
    const auto best = oracle::sq_dist(before.semantic[j], cts[static_cast<std::size_t>(idx)]);
    ++checked;
    if (oracle::sq_dist(before.semantic[j], after.semantic[j]) != best) ++wrong;
  }
  for (std::size_t j = 0; j < before.k_b(); ++j) {
    const int tag = before.sentiment_polarity[j];
    const auto idx = oracle::nearest_index(before.sentiment[j], fulls, [&](std::size_t i) {
      const auto& r = train_ds.records[i];
      return r.y == 0 && r.e_st_full && r.z_full == tag;
    });
    const auto best = oracle::sq_dist(before.sentiment[j], fulls[static_cast<std::size_t>(idx)]);
    ++checked;
    if (oracle::sq_dist(before.sentiment[j], after.sentiment[j]) != best) ++wrong;
  }

  std::size_t first = 0;
  for (std::size_t j = 0; j < after.k_a(); ++j) {
    const auto src = train_ds.find(meta.semantic[j].record_id);
    if (!src) continue;
    const auto ex = explain(projected, train_ds.records[*src], after.k_a());
    // Prototypes projected onto the same record tie at distance 0; any of them may lead.
    bool ok = ex.semantic[0].distance == 0.0;
    bool listed = false;
    for (const auto& r : ex.semantic) {
      if (r.distance != 0.0) break;
      listed = listed || r.index == j;
    }
    if (ok && listed) ++first;
  }
  return {wrong == 0 && first == after.k_a(),
          std::to_string(checked) + " prototypes over a pool of " + std::to_string(meta.pool_size) + ", " +
              std::to_string(wrong) + " not nearest; source record ranks its prototype first at distance 0 for " +
              std::to_string(first) + "/" + std::to_string(after.k_a())};
}

Outcome crossval_reproducibility() {
  fixtures::TempDir dir;
  PlantedOptions po;
  po.n = 200;
  po.seed = 11;
  write_dataset(make_planted_dataset(po), dir.file("train.jsonl"));
  std::string files[2];
  int codes[2] = {0, 0};
  for (int i = 0; i < 2; ++i) {
    const auto out = dir.file("run" + std::to_string(i));
    const std::vector<std::string> args = {"protosarc", "--train", dir.file("train.jsonl"), "--seed", "3",
                                           "--epochs",  "20",      "--out",                 out,      "crossval"};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream sink_out, sink_err;
    codes[i] = cli::run_cli(static_cast<int>(argv.size()), argv.data(), sink_out, sink_err);
    files[i] = std::regex_replace(fixtures::read_file(out + "/crossval.json"),
                                  std::regex(R"("timestamp": "[^"]*")"), R"("timestamp": "")");
  }
  const bool same = codes[0] == 0 && codes[1] == 0 && !files[0].empty() && files[0] == files[1];
  return {same, same ? "crossval.json identical across two runs (" + std::to_string(files[0].size()) + " bytes)"
                     : "crossval.json differs or a run failed (exit " + std::to_string(codes[0]) + ", " +
                           std::to_string(codes[1]) + ")"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };

  report("gradient suite", gradient_suite);
  report("loss oracle suite", loss_oracle_suite);
  report("kernel properties", kernel_properties);
  report("k-means properties", kmeans_properties);
  const auto planted = planted_run();
  report("end-to-end planted task", [&] { return end_to_end(planted); });
  report("incongruity ablation", incongruity_ablation);
  report("projection optimality", [&] { return projection_optimality(planted); });
  report("crossval reproducibility", crossval_reproducibility);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
