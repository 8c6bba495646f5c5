#include "run_config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "protosarc/errors.hpp"

namespace protosarc::cli {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct Field {
  const char* key;
  std::function<void(RunConfig&, const json&)> read;
  std::function<void(const RunConfig&, ordered_json&)> write;
};

template <class T>
Field bind(const char* key, T RunConfig::*member) {
  return {key, [member](RunConfig& c, const json& v) { c.*member = v.get<T>(); },
          [member, key](const RunConfig& c, ordered_json& j) { j[key] = c.*member; }};
}

template <class T>
Field bind_train(const char* key, T TrainConfig::*member) {
  return {key, [member](RunConfig& c, const json& v) { c.train.*member = v.get<T>(); },
          [member, key](const RunConfig& c, ordered_json& j) { j[key] = c.train.*member; }};
}

template <class T>
Field bind_weight(const char* key, T LossWeights::*member) {
  return {key, [member](RunConfig& c, const json& v) { c.train.weights.*member = v.get<T>(); },
          [member, key](const RunConfig& c, ordered_json& j) { j[key] = c.train.weights.*member; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      bind("paper_settings", &RunConfig::paper_settings),
      bind_train("seed", &TrainConfig::seed),
      bind("train_path", &RunConfig::train_path),
      bind("val_path", &RunConfig::val_path),
      bind("test_path", &RunConfig::test_path),
      bind("checkpoint_path", &RunConfig::checkpoint_path),
      bind("out_dir", &RunConfig::out_dir),
      bind("val_frac", &RunConfig::val_frac),
      bind_train("lr", &TrainConfig::lr),
      bind_train("beta1", &TrainConfig::beta1),
      bind_train("beta2", &TrainConfig::beta2),
      bind_train("adam_eps", &TrainConfig::adam_eps),
      bind_train("batch_size", &TrainConfig::batch_size),
      bind_train("accum_steps", &TrainConfig::accum_steps),
      bind_train("max_epochs", &TrainConfig::max_epochs),
      bind_train("patience", &TrainConfig::patience),
      bind_train("min_delta", &TrainConfig::min_delta),
      bind_train("k_per_class", &TrainConfig::k_per_class),
      bind_train("k_per_polarity", &TrainConfig::k_per_polarity),
      bind_train("sigma_semantic", &TrainConfig::sigma_semantic),
      bind_train("sigma_sentiment", &TrainConfig::sigma_sentiment),
      bind_train("eps", &TrainConfig::eps),
      bind_train("hidden", &TrainConfig::hidden),
      {"kmeans_max_iter", [](RunConfig& c, const json& v) { c.train.kmeans.max_iter = v.get<std::size_t>(); },
       [](const RunConfig& c, ordered_json& j) { j["kmeans_max_iter"] = c.train.kmeans.max_iter; }},
      {"kmeans_tol", [](RunConfig& c, const json& v) { c.train.kmeans.tol = v.get<double>(); },
       [](const RunConfig& c, ordered_json& j) { j["kmeans_tol"] = c.train.kmeans.tol; }},
      {"kmeans_n_init", [](RunConfig& c, const json& v) { c.train.kmeans.n_init = v.get<std::size_t>(); },
       [](const RunConfig& c, ordered_json& j) { j["kmeans_n_init"] = c.train.kmeans.n_init; }},
      bind_weight("lambda_division", &LossWeights::division),
      bind_weight("lambda_cluster_sep", &LossWeights::cluster_sep),
      bind_weight("lambda_incongruity", &LossWeights::incongruity),
      bind_weight("lambda_l1", &LossWeights::l1),
      bind_weight("cos_threshold", &LossWeights::cos_threshold),
      bind_weight("sep_sign", &LossWeights::sep_sign),
      bind("folds", &RunConfig::folds),
      bind("parallel_folds", &RunConfig::parallel_folds),
      {"sample_frac",
       [](RunConfig& c, const json& v) {
         if (v.is_null()) {
           c.sample_frac.reset();
         } else {
           c.sample_frac = v.get<double>();
         }
       },
       [](const RunConfig& c, ordered_json& j) {
         if (c.sample_frac) {
           j["sample_frac"] = *c.sample_frac;
         } else {
           j["sample_frac"] = nullptr;
         }
       }},
      bind("class_restricted", &RunConfig::class_restricted),
      bind("project_sentiment", &RunConfig::project_sentiment),
      bind("record_id", &RunConfig::record_id),
      bind("explain_path", &RunConfig::explain_path),
      bind("top_k", &RunConfig::top_k),
      bind("gradcheck_step", &RunConfig::gradcheck_step),
      bind("gradcheck_threshold", &RunConfig::gradcheck_threshold),
      bind("gradcheck_max_params", &RunConfig::gradcheck_max_params),
      bind("gradcheck_records", &RunConfig::gradcheck_records),
  };
  return table;
}

}  // namespace

void apply_config_json(RunConfig& cfg, std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& f : fields()) known = known || key == f.key;
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }
  // The preset sits below every explicit key of the same file.
  try {
    if (j.contains("paper_settings") && j["paper_settings"].get<bool>()) cfg.train.apply_paper_settings();
    for (const auto& f : fields()) {
      if (j.contains(f.key)) f.read(cfg, j[f.key]);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    apply_config_json(cfg, ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string run_config_to_json(const RunConfig& cfg, int indent) {
  ordered_json j = ordered_json::object();
  for (const auto& f : fields()) f.write(cfg, j);
  return j.dump(indent);
}

void validate(const RunConfig& cfg) {
  validate(cfg.train);
  if (!(cfg.val_frac > 0.0 && cfg.val_frac < 1.0)) throw ConfigError("val_frac must lie in (0, 1)");
  if (cfg.folds < 2) throw ConfigError("folds must be at least 2");
  if (cfg.sample_frac && !(*cfg.sample_frac > 0.0 && *cfg.sample_frac <= 1.0)) {
    throw ConfigError("sample_frac must lie in (0, 1]");
  }
  if (cfg.top_k < 1) throw ConfigError("top_k must be at least 1");
  if (!(cfg.gradcheck_step > 0.0)) throw ConfigError("gradcheck_step must be positive");
  if (!(cfg.gradcheck_threshold > 0.0)) throw ConfigError("gradcheck_threshold must be positive");
  if (cfg.gradcheck_records < 1) throw ConfigError("gradcheck_records must be at least 1");
  if (cfg.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

}  // namespace protosarc::cli
