#include "protosarc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <ostream>

#include "protosarc/errors.hpp"
#include "protosarc/gradients.hpp"
#include "protosarc/random.hpp"
#include "json_convert.hpp"

namespace protosarc {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kSemanticInitStream = 1;
constexpr std::uint64_t kSentimentInitStream = 2;
constexpr std::uint64_t kHeadInitStream = 3;
constexpr std::uint64_t kShuffleStream = 1000;
constexpr std::uint64_t kFoldStream = 5000;

double accuracy_of(const ModelParams& params, const Dataset& ds) { return evaluate(params, ds).accuracy; }

void check_finite(const LossBreakdown& loss, std::size_t epoch, const char* which) {
  if (std::isfinite(loss.total)) return;
  throw NumericalError("non-finite " + std::string(which) + " loss at epoch " + std::to_string(epoch) + ": " +
                       detail::to_ordered_json(loss).dump());
}

}  // namespace

TrainConfig TrainConfig::paper_settings() {
  TrainConfig cfg;
  cfg.apply_paper_settings();
  return cfg;
}

void TrainConfig::apply_paper_settings() {
  lr = 1e-4;
  batch_size = 60;
  accum_steps = 30;
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw ConfigError("lr must be positive");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (cfg.accum_steps < 1) throw ConfigError("accum_steps must be at least 1");
  if (cfg.patience < 1) throw ConfigError("patience must be at least 1");
  if (cfg.max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (cfg.k_per_class < 1 || cfg.k_per_polarity < 1) throw ConfigError("prototype counts must be at least 1");
  if (!(cfg.sigma_semantic > 0.0) || !(cfg.sigma_sentiment > 0.0)) throw ConfigError("sigma must be positive");
  if (!(cfg.eps > 0.0)) throw ConfigError("eps must be positive");
  if (cfg.hidden < 1) throw ConfigError("hidden must be at least 1");
  if (!(cfg.min_delta >= 0.0)) throw ConfigError("min_delta must be nonnegative");
  validate(cfg.weights);
}

ModelParams initialize_model(const Dataset& train_ds, const TrainConfig& cfg, std::vector<std::string>* warnings) {
  validate(cfg);
  if (train_ds.count_label(0) == 0 || train_ds.count_label(1) == 0) {
    throw DataError("training set must contain both classes");
  }
  ModelParams p;
  auto& bank = p.bank;
  bank.sigma_semantic = cfg.sigma_semantic;
  bank.sigma_sentiment = cfg.sigma_sentiment;
  bank.eps = cfg.eps;
  for (auto& tv : init_semantic_prototypes(train_ds, cfg.k_per_class, derive_seed(cfg.seed, kSemanticInitStream),
                                           cfg.kmeans, warnings)) {
    bank.semantic.push_back(std::move(tv.vector));
    bank.semantic_class.push_back(tv.tag);
  }
  for (auto& tv : init_sentiment_prototypes(train_ds, cfg.k_per_polarity,
                                            derive_seed(cfg.seed, kSentimentInitStream), cfg.kmeans, warnings)) {
    bank.sentiment.push_back(std::move(tv.vector));
    bank.sentiment_polarity.push_back(tv.tag);
  }

  Rng rng(derive_seed(cfg.seed, kHeadInitStream));
  const auto ka = bank.k_a();
  const auto kb = bank.k_b();
  p.head.theta.resize(ka + 2 * kb);
  for (auto& t : p.head.theta) t = uniform(rng, -0.01, 0.01);
  p.head.bias = uniform(rng, -0.01, 0.01);

  auto& h = p.inco_head;
  h.W1 = Matrix(kb, cfg.hidden);
  const double lim1 = std::sqrt(6.0 / static_cast<double>(kb));
  for (auto& x : h.W1.data()) x = uniform(rng, -lim1, lim1);
  h.b1.assign(cfg.hidden, 0.0);
  h.W2.resize(cfg.hidden);
  const double lim2 = std::sqrt(6.0 / static_cast<double>(cfg.hidden + 1));
  for (auto& x : h.W2) x = uniform(rng, -lim2, lim2);
  h.b2 = 0.0;
  validate(p);
  return p;
}

TrainResult train(const Dataset& train_ds, const Dataset& val_ds, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  TrainResult r;
  std::vector<std::string> warnings;
  auto init = initialize_model(train_ds, cfg, &warnings);
  r = train_from(std::move(init), train_ds, val_ds, cfg, on_epoch);
  r.history.warnings.insert(r.history.warnings.begin(), warnings.begin(), warnings.end());
  return r;
}

TrainResult train_from(ModelParams init, const Dataset& train_ds, const Dataset& val_ds, const TrainConfig& cfg,
                       const EpochCallback& on_epoch) {
  validate(cfg);
  validate(init);
  if (train_ds.records.empty()) throw DataError("empty training set");
  if (val_ds.records.empty()) throw DataError("empty validation set");
  if (train_ds.count_label(0) == 0 || train_ds.count_label(1) == 0) {
    throw DataError("training set must contain both classes");
  }
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult result;
  auto& hist = result.history;
  ModelParams params = std::move(init);
  result.params = params;
  AdamState adam = make_adam_state(params, {cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps});
  const auto& w = cfg.weights;
  const auto val_batch = batch_of(val_ds);
  const auto train_batch = batch_of(train_ds);

  std::vector<std::size_t> order(train_ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto n_params = parameter_count(params);
  Vec accum(n_params, 0.0);
  std::size_t pending = 0;
  std::size_t since_best = 0;
  bool have_best = false;

  auto flush = [&]() {
    if (pending == 0) return;
    const double inv = 1.0 / static_cast<double>(pending);
    for (auto& x : accum) x *= inv;
    auto flat = flatten(params);
    adam_step(flat, accum, adam);
    unflatten(flat, params);
    std::fill(accum.begin(), accum.end(), 0.0);
    pending = 0;
  };

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, kShuffleStream + epoch));
    shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto stop = std::min(order.size(), start + cfg.batch_size);
      const auto batch = batch_of(train_ds, std::span(order).subspan(start, stop - start));
      GradientResult g;
      try {
        g = gradients(batch, params, w);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", records " +
                             std::to_string(start) + ".." + std::to_string(stop - 1) + " of the shuffled order");
      }
      check_finite(g.loss, epoch, "mini-batch");
      for_each_parameter(g.grads, [&](const double& x, std::size_t i) { accum[i] += x; });
      if (++pending == cfg.accum_steps) flush();
    }
    // A partial accumulation window is applied at the end of every epoch.
    flush();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train = evaluate_loss(train_batch, params, w);
    rec.val = evaluate_loss(val_batch, params, w);
    check_finite(rec.train, epoch, "training");
    check_finite(rec.val, epoch, "validation");
    rec.train_accuracy = accuracy_of(params, train_ds);
    rec.val_accuracy = accuracy_of(params, val_ds);
    rec.optimizer_steps = adam.t;
    hist.epochs.push_back(rec);
    hist.stopped_epoch = epoch;

    if (!have_best || rec.val.total < hist.best_val_loss - cfg.min_delta) {
      have_best = true;
      hist.best_val_loss = rec.val.total;
      hist.best_epoch = epoch;
      result.params = params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      hist.early_stopped = true;
      break;
    }
    if (on_epoch && !on_epoch(rec)) break;
  }

  hist.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::string epoch_to_json(const EpochRecord& e) {
  detail::ordered_json j;
  j["epoch"] = e.epoch;
  j["optimizer_steps"] = e.optimizer_steps;
  j["train"] = detail::to_ordered_json(e.train);
  j["val"] = detail::to_ordered_json(e.val);
  j["train_accuracy"] = e.train_accuracy;
  j["val_accuracy"] = e.val_accuracy;
  return j.dump();
}

void write_history_jsonl(const TrainHistory& h, std::ostream& out) {
  for (const auto& e : h.epochs) out << epoch_to_json(e) << '\n';
}

CrossValidationReport cross_validate(const Dataset& ds, const TrainConfig& cfg, const CrossValidationOptions& options) {
  validate(cfg);
  const auto plan = split_folds(ds, options.k, cfg.seed);
  CrossValidationReport report;
  report.k = options.k;
  report.seed = cfg.seed;
  report.stratified = plan.stratified;
  report.val_frac = options.val_frac;
  report.warnings = plan.warnings;

  auto run_fold = [&](int fold) {
    const auto test_idx = plan.test_indices(fold);
    const auto rest = plan.train_indices(fold);
    const auto fold_seed = derive_seed(cfg.seed, kFoldStream + static_cast<std::uint64_t>(fold));
    const auto split = stratified_holdout(ds, rest, options.val_frac, fold_seed);
    if (split.holdout.empty()) throw DataError("fold " + std::to_string(fold) + ": empty validation slice");
    const auto train_ds = subset(ds, split.keep);
    const auto val_ds = subset(ds, split.holdout);
    const auto test_ds = subset(ds, test_idx);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed;
    const auto trained = train(train_ds, val_ds, fold_cfg);
    FoldResult fr;
    fr.fold = fold;
    fr.metrics = evaluate(trained.params, test_ds);
    fr.train_size = train_ds.size();
    fr.val_size = val_ds.size();
    fr.test_size = test_ds.size();
    fr.best_epoch = trained.history.best_epoch;
    fr.stopped_epoch = trained.history.stopped_epoch;
    return std::make_pair(fr, trained.history.warnings);
  };

  std::vector<std::pair<FoldResult, std::vector<std::string>>> results;
  if (options.parallel) {
    std::vector<std::future<std::pair<FoldResult, std::vector<std::string>>>> futures;
    for (int f = 0; f < options.k; ++f) futures.push_back(std::async(std::launch::async, run_fold, f));
    for (auto& fut : futures) results.push_back(fut.get());
  } else {
    for (int f = 0; f < options.k; ++f) results.push_back(run_fold(f));
  }

  for (auto& [fr, warns] : results) {
    for (auto& wmsg : warns) report.warnings.push_back("fold " + std::to_string(fr.fold) + ": " + wmsg);
    report.mean.accuracy += fr.metrics.accuracy;
    report.mean.precision += fr.metrics.precision;
    report.mean.recall += fr.metrics.recall;
    report.mean.f1 += fr.metrics.f1;
    report.folds.push_back(fr);
  }
  const double inv = 1.0 / static_cast<double>(options.k);
  report.mean.accuracy *= inv;
  report.mean.precision *= inv;
  report.mean.recall *= inv;
  report.mean.f1 *= inv;
  return report;
}

std::string cv_report_to_json(const CrossValidationReport& r, int indent) {
  detail::ordered_json j;
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["stratified"] = r.stratified;
  j["val_frac"] = r.val_frac;
  auto folds = detail::ordered_json::array();
  for (const auto& f : r.folds) {
    detail::ordered_json fj;
    fj["fold"] = f.fold;
    fj["train_size"] = f.train_size;
    fj["val_size"] = f.val_size;
    fj["test_size"] = f.test_size;
    fj["best_epoch"] = f.best_epoch;
    fj["stopped_epoch"] = f.stopped_epoch;
    fj["metrics"] = detail::to_ordered_json(f.metrics);
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  j["mean"] = {{"accuracy", r.mean.accuracy}, {"precision", r.mean.precision}, {"recall", r.mean.recall}, {"f1", r.mean.f1}};
  j["warnings"] = r.warnings;
  return j.dump(indent);
}

}  // namespace protosarc
