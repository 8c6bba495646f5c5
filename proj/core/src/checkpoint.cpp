#include "protosarc/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "protosarc/errors.hpp"
#include "json_convert.hpp"

namespace protosarc {

namespace {

using json = nlohmann::json;
using detail::ordered_json;

ordered_json projected_to_json(const std::vector<ProjectedPrototype>& list, const char* tag_key) {
  auto arr = ordered_json::array();
  for (const auto& p : list) {
    ordered_json j;
    j["index"] = p.index;
    j[tag_key] = p.tag;
    j["record_id"] = p.record_id;
    j["text"] = p.text;
    j["distance"] = p.distance;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<ProjectedPrototype> projected_from_json(const json& arr, const char* tag_key) {
  std::vector<ProjectedPrototype> out;
  for (const auto& j : arr) {
    ProjectedPrototype p;
    p.index = j.at("index").get<std::size_t>();
    p.tag = j.at(tag_key).get<int>();
    p.record_id = j.at("record_id").get<std::string>();
    p.text = j.at("text").get<std::string>();
    p.distance = j.at("distance").get<double>();
    out.push_back(std::move(p));
  }
  return out;
}

void read_tagged(const json& arr, const char* tag_key, std::vector<Vec>& vectors, std::vector<int>& tags) {
  for (const auto& j : arr) {
    vectors.push_back(j.at("vector").get<Vec>());
    tags.push_back(j.at(tag_key).get<int>());
  }
}

}  // namespace

void Checkpoint::replace_params(ModelParams p) {
  params = std::move(p);
  ++revision;
}

std::string checkpoint_to_json(const Checkpoint& ck, int indent) {
  const auto& bank = ck.params.bank;
  const auto& inco = ck.params.inco_head;
  ordered_json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["revision"] = ck.revision;
  j["manifest"] = {{"d_s", bank.d_s()},
                   {"d_m", bank.d_m()},
                   {"k_a", bank.k_a()},
                   {"k_b", bank.k_b()},
                   {"sigma_semantic", bank.sigma_semantic},
                   {"sigma_sentiment", bank.sigma_sentiment},
                   {"eps", bank.eps},
                   {"hidden", inco.hidden()}};
  auto sem = ordered_json::array();
  for (std::size_t i = 0; i < bank.k_a(); ++i) {
    sem.push_back({{"class", bank.semantic_class[i]}, {"vector", bank.semantic[i]}});
  }
  j["semantic_prototypes"] = std::move(sem);
  auto sen = ordered_json::array();
  for (std::size_t i = 0; i < bank.k_b(); ++i) {
    sen.push_back({{"polarity", bank.sentiment_polarity[i]}, {"vector", bank.sentiment[i]}});
  }
  j["sentiment_prototypes"] = std::move(sen);
  j["output_head"] = {{"theta", ck.params.head.theta}, {"bias", ck.params.head.bias}};
  auto w1 = ordered_json::array();
  for (std::size_t r = 0; r < inco.W1.rows(); ++r) {
    const auto row = inco.W1.row(r);
    w1.push_back(Vec(row.begin(), row.end()));
  }
  j["incongruity_head"] = {{"W1", std::move(w1)}, {"b1", inco.b1}, {"W2", inco.W2}, {"b2", inco.b2}};
  if (ck.projection) {
    const auto& p = *ck.projection;
    ordered_json pj;
    pj["version"] = p.version;
    pj["model_revision"] = p.model_revision;
    pj["sample_frac"] = p.sample_frac;
    pj["seed"] = p.seed;
    pj["class_restricted"] = p.class_restricted;
    pj["sentiment_projected"] = p.sentiment_projected;
    pj["pool_size"] = p.pool_size;
    pj["semantic"] = projected_to_json(p.semantic, "class");
    pj["sentiment"] = projected_to_json(p.sentiment, "polarity");
    j["projection"] = std::move(pj);
  } else {
    j["projection"] = nullptr;
  }
  return j.dump(indent);
}

Checkpoint checkpoint_from_json(std::string_view text) {
  Checkpoint ck;
  try {
    const auto j = json::parse(text);
    const auto version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw DataError("unsupported checkpoint format_version " + std::to_string(version));
    }
    ck.revision = j.at("revision").get<std::uint64_t>();
    const auto& m = j.at("manifest");
    auto& bank = ck.params.bank;
    bank.sigma_semantic = m.at("sigma_semantic").get<double>();
    bank.sigma_sentiment = m.at("sigma_sentiment").get<double>();
    bank.eps = m.at("eps").get<double>();
    read_tagged(j.at("semantic_prototypes"), "class", bank.semantic, bank.semantic_class);
    read_tagged(j.at("sentiment_prototypes"), "polarity", bank.sentiment, bank.sentiment_polarity);
    if (bank.d_s() != m.at("d_s").get<std::size_t>() || bank.d_m() != m.at("d_m").get<std::size_t>() ||
        bank.k_a() != m.at("k_a").get<std::size_t>() || bank.k_b() != m.at("k_b").get<std::size_t>()) {
      throw DataError("checkpoint manifest disagrees with the stored prototypes");
    }
    ck.params.head.theta = j.at("output_head").at("theta").get<Vec>();
    ck.params.head.bias = j.at("output_head").at("bias").get<double>();
    const auto& ih = j.at("incongruity_head");
    const auto hidden = m.at("hidden").get<std::size_t>();
    const auto& w1 = ih.at("W1");
    auto& inco = ck.params.inco_head;
    inco.W1 = Matrix(w1.size(), hidden);
    for (std::size_t r = 0; r < w1.size(); ++r) {
      const auto row = w1[r].get<Vec>();
      if (row.size() != hidden) throw DataError("checkpoint W1 row width disagrees with hidden size");
      for (std::size_t c = 0; c < hidden; ++c) inco.W1(r, c) = row[c];
    }
    inco.b1 = ih.at("b1").get<Vec>();
    inco.W2 = ih.at("W2").get<Vec>();
    inco.b2 = ih.at("b2").get<double>();
    if (!j.at("projection").is_null()) {
      const auto& pj = j.at("projection");
      Projection p;
      p.version = pj.at("version").get<std::uint64_t>();
      p.model_revision = pj.at("model_revision").get<std::uint64_t>();
      p.sample_frac = pj.at("sample_frac").get<double>();
      p.seed = pj.at("seed").get<std::uint64_t>();
      p.class_restricted = pj.at("class_restricted").get<bool>();
      p.sentiment_projected = pj.at("sentiment_projected").get<bool>();
      p.pool_size = pj.at("pool_size").get<std::size_t>();
      p.semantic = projected_from_json(pj.at("semantic"), "class");
      p.sentiment = projected_from_json(pj.at("sentiment"), "polarity");
      ck.projection = std::move(p);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
  validate(ck.params);
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_to_json(ck) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return checkpoint_from_json(ss.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace protosarc
