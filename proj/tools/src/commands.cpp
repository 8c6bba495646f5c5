#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "protosarc/checkpoint.hpp"
#include "protosarc/errors.hpp"
#include "protosarc/explain.hpp"
#include "protosarc/gradients.hpp"
#include "protosarc/metrics.hpp"
#include "protosarc/random.hpp"
#include "protosarc/synthetic.hpp"
#include "protosarc/trainer.hpp"

namespace protosarc::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kValidationStream = 77;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + cfg.out_dir + "'");
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

fs::path write_effective_config(const RunConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  write_text(dir / "effective_config.json", run_config_to_json(cfg));
  return dir;
}

const std::string& require_path(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string("missing required '") + key + "'");
  return value;
}

std::vector<std::size_t> all_indices(const Dataset& ds) {
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

ordered_json weights_json(const LossWeights& w) {
  ordered_json j;
  j["division"] = w.division;
  j["cluster_sep"] = w.cluster_sep;
  j["incongruity"] = w.incongruity;
  j["l1"] = w.l1;
  j["cos_threshold"] = w.cos_threshold;
  j["sep_sign"] = w.sep_sign;
  return j;
}

}  // namespace

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  validate(cfg);
  const auto dir = write_effective_config(cfg);
  const auto full = load_dataset(require_path(cfg.train_path, "train_path"));
  print_warnings(full.warnings, err);
  Dataset train_ds;
  Dataset val_ds;
  if (!cfg.val_path.empty()) {
    train_ds = full;
    val_ds = load_dataset(cfg.val_path);
  } else {
    const auto split = stratified_holdout(full, all_indices(full), cfg.val_frac,
                                          derive_seed(cfg.train.seed, kValidationStream));
    train_ds = subset(full, split.keep);
    val_ds = subset(full, split.holdout);
  }
  const auto result = train(train_ds, val_ds, cfg.train);
  const auto& h = result.history;
  print_warnings(h.warnings, err);

  Checkpoint ck;
  ck.params = result.params;
  save_checkpoint(ck, dir / "checkpoint.json");

  const bool inco_disabled = cfg.train.weights.incongruity == 0.0;
  std::string lines;
  for (const auto& e : h.epochs) {
    auto j = ordered_json::parse(epoch_to_json(e));
    j["incongruity_disabled"] = inco_disabled;
    lines += j.dump() + '\n';
  }
  write_text(dir / "history.jsonl", lines);

  ordered_json summary;
  summary["seed"] = cfg.train.seed;
  summary["incongruity_disabled"] = inco_disabled;
  summary["weights"] = weights_json(cfg.train.weights);
  summary["train_size"] = train_ds.size();
  summary["val_size"] = val_ds.size();
  summary["best_epoch"] = h.best_epoch;
  summary["stopped_epoch"] = h.stopped_epoch;
  summary["early_stopped"] = h.early_stopped;
  summary["best_val_loss"] = h.best_val_loss;
  summary["warnings"] = h.warnings;
  summary["wall_seconds"] = h.wall_seconds;
  summary["timestamp"] = utc_timestamp();
  write_text(dir / "train_summary.json", summary.dump(2));

  out << "trained " << h.stopped_epoch << " epochs (best epoch " << h.best_epoch << ", val loss " << h.best_val_loss
      << ")\ncheckpoint: " << (dir / "checkpoint.json").string() << '\n';
  return kExitOk;
}

int cmd_crossval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  validate(cfg);
  const auto dir = write_effective_config(cfg);
  const auto ds = load_dataset(require_path(cfg.train_path, "train_path"));
  print_warnings(ds.warnings, err);
  CrossValidationOptions opts;
  opts.k = cfg.folds;
  opts.val_frac = cfg.val_frac;
  opts.parallel = cfg.parallel_folds;
  const auto report = cross_validate(ds, cfg.train, opts);
  print_warnings(report.warnings, err);
  auto j = ordered_json::parse(cv_report_to_json(report));
  j["timestamp"] = utc_timestamp();
  write_text(dir / "crossval.json", j.dump(2));
  out << "mean over " << report.k << " folds: accuracy " << report.mean.accuracy << ", precision "
      << report.mean.precision << ", recall " << report.mean.recall << ", f1 " << report.mean.f1 << '\n';
  return kExitOk;
}

int cmd_project(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  validate(cfg);
  const auto dir = write_effective_config(cfg);
  const auto model = load_checkpoint(require_path(cfg.checkpoint_path, "checkpoint_path"));
  const auto ds = load_dataset(require_path(cfg.train_path, "train_path"));
  print_warnings(ds.warnings, err);
  ProjectionOptions opts;
  opts.sample_frac = cfg.sample_frac;
  opts.seed = cfg.train.seed;
  opts.class_restricted = cfg.class_restricted;
  opts.project_sentiment = cfg.project_sentiment;
  const auto projected = project_prototypes(model, ds, opts);
  save_checkpoint(projected, dir / "checkpoint.json");
  const auto& p = *projected.projection;
  out << "projection version " << p.version << " over " << p.pool_size << " records (sample_frac " << p.sample_frac
      << ")\n";
  for (const auto& s : p.semantic) {
    out << "  semantic #" << s.index << " [class " << s.tag << "] <- " << s.record_id << " (moved "
        << format_distance(s.distance) << ")\n";
  }
  for (const auto& s : p.sentiment) {
    out << "  sentiment #" << s.index << " [polarity " << s.tag << "] <- " << s.record_id << " (moved "
        << format_distance(s.distance) << ")\n";
  }
  out << "checkpoint: " << (dir / "checkpoint.json").string() << '\n';
  return kExitOk;
}

int cmd_explain(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  validate(cfg);
  const auto dir = write_effective_config(cfg);
  const auto model = load_checkpoint(require_path(cfg.checkpoint_path, "checkpoint_path"));
  const auto& source = !cfg.explain_path.empty() ? cfg.explain_path : cfg.test_path;
  const auto ds = load_dataset(require_path(source, "explain_path or test_path"));
  print_warnings(ds.warnings, err);

  std::size_t top_k = cfg.top_k;
  const auto k_a = model.params.bank.k_a();
  if (top_k > k_a) {
    err << "warning: top_k " << top_k << " exceeds the " << k_a << " semantic prototypes; clamped to " << k_a << '\n';
    top_k = k_a;
  }
  std::vector<std::size_t> targets;
  if (!cfg.record_id.empty()) {
    const auto idx = ds.find(cfg.record_id);
    if (!idx) throw DataError("unknown record id '" + cfg.record_id + "' in '" + source + "'");
    targets.push_back(*idx);
  } else {
    targets = all_indices(ds);
  }

  auto arr = ordered_json::array();
  std::string text;
  for (auto i : targets) {
    const auto ex = explain(model, ds.records[i], top_k);
    arr.push_back(ordered_json::parse(explanation_to_json(ex)));
    if (!text.empty()) text += '\n';
    text += render_text(ex);
  }
  write_text(dir / "explanations.json", arr.dump(2));
  write_text(dir / "explanations.txt", text);
  if (targets.size() == 1) out << text;
  out << "explained " << targets.size() << " record(s): " << (dir / "explanations.json").string() << '\n';
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  validate(cfg);
  const auto dir = write_effective_config(cfg);
  const auto model = load_checkpoint(require_path(cfg.checkpoint_path, "checkpoint_path"));
  const auto ds = load_dataset(require_path(cfg.test_path, "test_path"));
  print_warnings(ds.warnings, err);
  const auto m = evaluate(model.params, ds);
  write_text(dir / "metrics.json", metrics_to_json(m, 2));
  out << "accuracy " << m.accuracy << ", precision " << m.precision << ", recall " << m.recall << ", f1 " << m.f1
      << " over " << ds.size() << " records\n";
  if (m.precision_undefined || m.recall_undefined || m.f1_undefined) {
    err << "warning: some metrics are undefined (zero division) and reported as 0\n";
  }
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  validate(cfg);
  const auto dir = write_effective_config(cfg);
  ModelParams params;
  Dataset data;
  LossWeights weights = cfg.train.weights;
  std::string source;
  if (!cfg.train_path.empty()) {
    data = load_dataset(cfg.train_path);
    print_warnings(data.warnings, err);
    if (!cfg.checkpoint_path.empty()) {
      params = load_checkpoint(cfg.checkpoint_path).params;
      source = "checkpoint";
    } else {
      std::vector<std::string> warnings;
      params = initialize_model(data, cfg.train, &warnings);
      print_warnings(warnings, err);
      source = "initialized";
    }
    data.records.resize(std::min(data.records.size(), cfg.gradcheck_records));
  } else {
    auto inst = make_random_instance(cfg.train.seed);
    data = std::move(inst.data);
    params = std::move(inst.params);
    weights = inst.weights;
    source = "random instance";
  }
  const auto batch = batch_of(data);
  const auto report = finite_diff_check(params, batch, weights, cfg.gradcheck_step, cfg.gradcheck_max_params,
                                        cfg.train.seed);
  const bool passed = report.max_rel_err <= cfg.gradcheck_threshold;

  ordered_json j;
  j["source"] = source;
  j["records"] = data.size();
  j["weights"] = weights_json(weights);
  j["step"] = cfg.gradcheck_step;
  j["threshold"] = cfg.gradcheck_threshold;
  j["max_rel_err"] = report.max_rel_err;
  j["passed"] = passed;
  j["worst_path"] = report.worst_path;
  j["worst_index"] = report.worst_index;
  j["worst_analytic"] = report.worst_analytic;
  j["worst_numeric"] = report.worst_numeric;
  j["checked"] = report.checked;
  j["total"] = report.total;
  write_text(dir / "gradcheck.json", j.dump(2));

  out << (passed ? "PASS" : "FAIL") << " max relative error " << report.max_rel_err << " (threshold "
      << cfg.gradcheck_threshold << ") at " << report.worst_path << ", " << report.checked << " of " << report.total
      << " parameters checked\n";
  return passed ? kExitOk : kExitNumerical;
}

}  // namespace protosarc::cli
