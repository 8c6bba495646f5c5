#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "protosarc/embedding_store.hpp"
#include "protosarc/kmeans.hpp"
#include "protosarc/losses.hpp"
#include "protosarc/metrics.hpp"
#include "protosarc/optimizer.hpp"
#include "protosarc/prototype_network.hpp"

namespace protosarc {

/// Everything that determines a training run. Defaults are desk-scale:
/// batch 32 without accumulation. `paper_settings()` switches to batch 60
/// with 30 accumulated micro-batches per optimizer step.
struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 32;
  std::size_t accum_steps = 1;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double min_delta = 0.0;  // required validation improvement
  std::uint64_t seed = 42;
  LossWeights weights;
  std::size_t k_per_class = 8;
  std::size_t k_per_polarity = 4;
  double sigma_semantic = kDefaultSigma;
  double sigma_sentiment = kDefaultSigma;
  double eps = kDefaultEps;
  std::size_t hidden = 64;
  KMeansOptions kmeans;

  static TrainConfig paper_settings();
  void apply_paper_settings();
};

void validate(const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown train;
  LossBreakdown val;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  std::size_t optimizer_steps = 0;  // cumulative
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  std::size_t stopped_epoch = 0;
  double best_val_loss = 0.0;
  bool early_stopped = false;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

struct TrainResult {
  ModelParams params;  // from the best validation epoch
  TrainHistory history;
};

// Prototypes from k-means, output weights from uniform(-0.01, 0.01),
// incongruity head from a He-uniform draw with zero biases.
ModelParams initialize_model(const Dataset& train_ds, const TrainConfig& cfg,
                             std::vector<std::string>* warnings = nullptr);

// Called after each epoch; return false to stop.
using EpochCallback = std::function<bool(const EpochRecord&)>;

TrainResult train(const Dataset& train_ds, const Dataset& val_ds, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});
// Same loop from explicit initial parameters.
TrainResult train_from(ModelParams init, const Dataset& train_ds, const Dataset& val_ds, const TrainConfig& cfg,
                       const EpochCallback& on_epoch = {});

std::string epoch_to_json(const EpochRecord& e);
void write_history_jsonl(const TrainHistory& h, std::ostream& out);

struct FoldResult {
  int fold = 0;
  Metrics metrics;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  std::size_t test_size = 0;
  std::size_t best_epoch = 0;
  std::size_t stopped_epoch = 0;
};

struct MeanMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct CrossValidationReport {
  int k = 0;
  std::uint64_t seed = 0;
  bool stratified = true;
  double val_frac = 0.1;
  std::vector<FoldResult> folds;
  MeanMetrics mean;
  std::vector<std::string> warnings;
};

struct CrossValidationOptions {
  int k = 5;
  double val_frac = 0.1;  // stratified early-stopping slice of each training portion
  bool parallel = false;  // train folds concurrently
};

CrossValidationReport cross_validate(const Dataset& ds, const TrainConfig& cfg, const CrossValidationOptions& options = {});

std::string cv_report_to_json(const CrossValidationReport& r, int indent = 2);

}  // namespace protosarc
