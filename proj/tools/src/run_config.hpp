#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "protosarc/trainer.hpp"

namespace protosarc::cli {

/// Every option a subcommand can read. The JSON config file uses exactly the
/// keys produced by run_config_to_json; unknown keys are rejected.
struct RunConfig {
  TrainConfig train;
  bool paper_settings = false;

  std::string train_path;
  std::string val_path;  // empty: hold out val_frac of the training file
  std::string test_path;
  std::string checkpoint_path;
  std::string out_dir = ".";
  double val_frac = 0.1;

  int folds = 5;
  bool parallel_folds = false;

  std::optional<double> sample_frac;
  bool class_restricted = true;
  bool project_sentiment = true;

  std::string record_id;  // empty: explain every record of the explain file
  std::string explain_path;  // empty: test_path
  std::size_t top_k = 5;

  double gradcheck_step = 1e-5;
  double gradcheck_threshold = 1e-4;
  std::size_t gradcheck_max_params = 10000;
  std::size_t gradcheck_records = 8;
};

// Throws ConfigError on malformed JSON, unknown keys or wrongly typed values.
void apply_config_json(RunConfig& cfg, std::string_view text);
void apply_config_file(RunConfig& cfg, const std::string& path);

std::string run_config_to_json(const RunConfig& cfg, int indent = 2);

void validate(const RunConfig& cfg);

}  // namespace protosarc::cli
