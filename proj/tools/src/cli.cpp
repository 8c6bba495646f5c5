#include <functional>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "protosarc/errors.hpp"

namespace protosarc::cli {

namespace {

// Values given on the command line; unset ones leave the file/default value.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool no_incongruity = false;
  std::optional<std::string> sep_sign;
  bool paper_settings = false;
  std::optional<std::string> train, val, test, checkpoint;
  std::optional<std::size_t> epochs, batch_size, accum_steps, patience;
  std::optional<double> lr;
  std::optional<int> folds;
  bool parallel = false;
  std::optional<double> sample_frac;
  bool unrestricted = false;
  bool no_sentiment_projection = false;
  std::optional<std::string> record, explain_file;
  std::optional<std::size_t> top_k;
  std::optional<double> step, threshold;
  std::optional<std::size_t> max_params, records;
};

int parse_sep_sign(const std::string& s) {
  if (s == "+1" || s == "1") return 1;
  if (s == "-1") return -1;
  throw ConfigError("--sep-sign must be +1 or -1, got '" + s + "'");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg;
  if (!o.config.empty()) apply_config_file(cfg, o.config);
  if (o.paper_settings) {
    cfg.paper_settings = true;
    cfg.train.apply_paper_settings();
  }
  auto set = [](auto& target, const auto& value) {
    if (value) target = *value;
  };
  set(cfg.train.seed, o.seed);
  set(cfg.out_dir, o.out);
  if (o.no_incongruity) cfg.train.weights.incongruity = 0.0;
  if (o.sep_sign) cfg.train.weights.sep_sign = parse_sep_sign(*o.sep_sign);
  set(cfg.train_path, o.train);
  set(cfg.val_path, o.val);
  set(cfg.test_path, o.test);
  set(cfg.checkpoint_path, o.checkpoint);
  set(cfg.train.max_epochs, o.epochs);
  set(cfg.train.batch_size, o.batch_size);
  set(cfg.train.accum_steps, o.accum_steps);
  set(cfg.train.patience, o.patience);
  set(cfg.train.lr, o.lr);
  set(cfg.folds, o.folds);
  if (o.parallel) cfg.parallel_folds = true;
  if (o.sample_frac) cfg.sample_frac = *o.sample_frac;
  if (o.unrestricted) cfg.class_restricted = false;
  if (o.no_sentiment_projection) cfg.project_sentiment = false;
  set(cfg.record_id, o.record);
  set(cfg.explain_path, o.explain_file);
  set(cfg.top_k, o.top_k);
  set(cfg.gradcheck_step, o.step);
  set(cfg.gradcheck_threshold, o.threshold);
  set(cfg.gradcheck_max_params, o.max_params);
  set(cfg.gradcheck_records, o.records);
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interpretable prototype network for sarcasm detection over fixed embeddings", "protosarc"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;

  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "root seed");
  app.add_option("--out", o.out, "output directory");
  app.add_flag("--no-incongruity", o.no_incongruity, "train without the incongruity loss");
  app.add_option("--sep-sign", o.sep_sign, "sign of the separation term: +1 or -1");
  app.add_flag("--paper-settings", o.paper_settings, "batch 60, 30 accumulated micro-batches, lr 1e-4");
  app.add_option("--train", o.train, "training dataset (JSON Lines)");
  app.add_option("--val", o.val, "validation dataset; default holds out val_frac of --train");
  app.add_option("--test", o.test, "test dataset");
  app.add_option("--checkpoint", o.checkpoint, "model checkpoint");
  app.add_option("--epochs", o.epochs, "maximum epochs");
  app.add_option("--lr", o.lr, "Adam learning rate");
  app.add_option("--batch-size", o.batch_size, "micro-batch size");
  app.add_option("--accum-steps", o.accum_steps, "micro-batches per optimizer step");
  app.add_option("--patience", o.patience, "early-stopping patience in epochs");

  std::map<CLI::App*, std::function<int(const RunConfig&, std::ostream&, std::ostream&)>> handlers;
  auto* train = app.add_subcommand("train", "train a model; writes checkpoint.json, history.jsonl and train_summary.json");
  handlers[train] = cmd_train;
  auto* crossval = app.add_subcommand("crossval", "stratified k-fold cross-validation, writes crossval.json");
  crossval->add_option("--folds", o.folds, "number of folds");
  crossval->add_flag("--parallel", o.parallel, "train folds concurrently");
  handlers[crossval] = cmd_crossval;
  auto* project = app.add_subcommand("project", "project prototypes onto training records");
  project->add_option("--sample-frac", o.sample_frac, "fraction of the training set searched");
  project->add_flag("--unrestricted", o.unrestricted, "search records of every class");
  project->add_flag("--no-sentiment-projection", o.no_sentiment_projection, "leave sentiment prototypes as trained");
  handlers[project] = cmd_project;
  auto* explain = app.add_subcommand("explain", "explain predictions of a projected model");
  explain->add_option("--record", o.record, "record id; default every record");
  explain->add_option("--explain-file", o.explain_file, "dataset holding the records; default --test");
  explain->add_option("--top-k", o.top_k, "number of nearest semantic prototypes listed");
  handlers[explain] = cmd_explain;
  auto* evaluate = app.add_subcommand("evaluate", "accuracy, precision, recall and F1 on --test");
  handlers[evaluate] = cmd_evaluate;
  auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
  gradcheck->add_option("--step", o.step, "finite-difference step");
  gradcheck->add_option("--threshold", o.threshold, "maximum accepted relative error");
  gradcheck->add_option("--max-params", o.max_params, "parameters checked at most");
  gradcheck->add_option("--records", o.records, "records of --train used");
  handlers[gradcheck] = cmd_gradcheck;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    const auto cfg = resolve(o);
    for (auto& [sub, handler] : handlers) {
      if (sub->parsed()) return handler(cfg, out, err);
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace protosarc::cli
