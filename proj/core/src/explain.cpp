#include "protosarc/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "protosarc/errors.hpp"
#include "protosarc/metrics.hpp"
#include "protosarc/random.hpp"
#include "json_convert.hpp"

namespace protosarc {

namespace {

struct Nearest {
  std::size_t record = 0;
  double dist2 = std::numeric_limits<double>::infinity();
  bool found = false;
};

template <class Accept, class Embedding>
Nearest nearest_record(const Vec& p, const Dataset& ds, const std::vector<std::size_t>& pool, Accept accept,
                       Embedding embedding) {
  Nearest best;
  for (auto i : pool) {
    const auto& r = ds.records[i];
    if (!accept(r)) continue;
    const double d = squared_distance(p, embedding(r));
    if (!best.found || d < best.dist2) {
      best = {i, d, true};
    }
  }
  return best;
}

std::string display_text(const EmbeddingRecord& r) { return r.text.empty() ? r.id : r.text; }

}  // namespace

double resolve_sample_frac(const ProjectionOptions& options, std::size_t train_size) {
  if (options.sample_frac) {
    const double f = *options.sample_frac;
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("sample_frac must lie in (0, 1]");
    return f;
  }
  return train_size > kPresampleThreshold ? kDefaultPresampleFraction : 1.0;
}

Checkpoint project_prototypes(const Checkpoint& model, const Dataset& train_ds, const ProjectionOptions& options) {
  validate(model.params);
  if (train_ds.records.empty()) throw DataError("projection: empty training set");
  const auto& bank = model.params.bank;
  if (train_ds.d_s() != bank.d_s() || train_ds.d_m() != bank.d_m()) {
    throw DataError("projection: dataset dimensions do not match the model");
  }
  const double frac = resolve_sample_frac(options, train_ds.size());

  std::vector<std::size_t> pool(train_ds.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (frac < 1.0) {
    Rng rng(options.seed);
    shuffle(pool.begin(), pool.end(), rng);
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frac * static_cast<double>(pool.size()))));
    pool.resize(keep);
    std::sort(pool.begin(), pool.end());
  }

  Checkpoint out = model;
  Projection proj;
  proj.version = model.projection ? model.projection->version + 1 : 1;
  proj.sample_frac = frac;
  proj.seed = options.seed;
  proj.class_restricted = options.class_restricted;
  proj.sentiment_projected = options.project_sentiment;
  proj.pool_size = pool.size();

  auto& params = out.params;
  for (std::size_t j = 0; j < bank.k_a(); ++j) {
    const int tag = bank.semantic_class[j];
    const auto best = nearest_record(
        bank.semantic[j], train_ds, pool,
        [&](const EmbeddingRecord& r) { return !options.class_restricted || r.y == tag; },
        [](const EmbeddingRecord& r) -> const Vec& { return r.e_ct; });
    if (!best.found) {
      throw DataError("projection: empty pool for semantic prototype " + std::to_string(j) + " (class " +
                      std::to_string(tag) + ")");
    }
    const auto& rec = train_ds.records[best.record];
    params.bank.semantic[j] = rec.e_ct;
    proj.semantic.push_back({j, rec.id, display_text(rec), std::sqrt(best.dist2), tag});
  }

  if (options.project_sentiment) {
    for (std::size_t j = 0; j < bank.k_b(); ++j) {
      const int tag = bank.sentiment_polarity[j];
      const auto best = nearest_record(
          bank.sentiment[j], train_ds, pool,
          [&](const EmbeddingRecord& r) {
            return r.y == 0 && r.e_st_full.has_value() && (!options.class_restricted || r.z_full == tag);
          },
          [](const EmbeddingRecord& r) -> const Vec& { return *r.e_st_full; });
      if (!best.found) {
        throw DataError("projection: empty pool for sentiment prototype " + std::to_string(j) + " (polarity " +
                        std::to_string(tag) + ")");
      }
      const auto& rec = train_ds.records[best.record];
      params.bank.sentiment[j] = *rec.e_st_full;
      proj.sentiment.push_back({j, rec.id, display_text(rec), std::sqrt(best.dist2), tag});
    }
  }

  ++out.revision;
  proj.model_revision = out.revision;
  out.projection = std::move(proj);
  return out;
}

Explanation explain(const Checkpoint& model, const EmbeddingRecord& rec, std::size_t top_k) {
  if (!model.is_projected()) {
    throw DataError("explain: model has no valid projection; run project first");
  }
  if (top_k == 0) throw ConfigError("top_k must be at least 1");
  const auto& params = model.params;
  const auto& bank = params.bank;
  const auto trace = forward(rec, params);

  Explanation ex;
  ex.record_id = rec.id;
  ex.text = rec.text;
  ex.prob = trace.prob;
  ex.predicted = predict_label(trace.prob);

  std::vector<RankedPrototype> ranked;
  ranked.reserve(bank.k_a());
  for (std::size_t j = 0; j < bank.k_a(); ++j) {
    const auto& meta = model.projection->semantic.at(j);
    ranked.push_back({j, bank.semantic_class[j], meta.record_id, meta.text,
                      std::sqrt(squared_distance(rec.e_ct, bank.semantic[j])), trace.w_ct[j]});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedPrototype& a, const RankedPrototype& b) { return a.distance < b.distance; });
  ranked.resize(std::min(top_k, ranked.size()));
  ex.semantic = std::move(ranked);

  auto summarize = [&](const Vec& w, double h) {
    BranchSummary s;
    s.h = h;
    bool have[2] = {false, false};
    for (std::size_t j = 0; j < w.size(); ++j) {
      const int tag = bank.sentiment_polarity[j];
      if (tag == 1 && (!have[1] || w[j] > s.top_positive_similarity)) {
        s.top_positive = j;
        s.top_positive_similarity = w[j];
        have[1] = true;
      } else if (tag == 0 && (!have[0] || w[j] > s.top_negative_similarity)) {
        s.top_negative = j;
        s.top_negative_similarity = w[j];
        have[0] = true;
      }
    }
    return s;
  };
  ex.explicit_branch = summarize(trace.w_ep, trace.h_ep);
  ex.implicit_branch = summarize(trace.w_ip, trace.h_ip);
  return ex;
}

std::string format_distance(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", d);
  return buf;
}

std::string explanation_to_json(const Explanation& ex, int indent) {
  detail::ordered_json j;
  j["record_id"] = ex.record_id;
  j["text"] = ex.text;
  j["prob"] = ex.prob;
  j["predicted"] = ex.predicted;
  auto arr = detail::ordered_json::array();
  for (const auto& p : ex.semantic) {
    arr.push_back({{"index", p.index},
                   {"class", p.tag},
                   {"record_id", p.record_id},
                   {"text", p.text},
                   {"distance", p.distance},
                   {"similarity", p.similarity}});
  }
  j["semantic_prototypes"] = std::move(arr);
  auto branch = [](const BranchSummary& s) {
    return detail::ordered_json{{"h", s.h},
                                {"top_positive", {{"index", s.top_positive}, {"similarity", s.top_positive_similarity}}},
                                {"top_negative", {{"index", s.top_negative}, {"similarity", s.top_negative_similarity}}}};
  };
  j["sentiment"] = {{"explicit", branch(ex.explicit_branch)}, {"implicit", branch(ex.implicit_branch)}};
  return j.dump(indent);
}

std::string render_text(const Explanation& ex) {
  std::ostringstream os;
  char buf[160];
  os << "Input [" << ex.record_id << "]: " << (ex.text.empty() ? ex.record_id : ex.text) << '\n';
  std::snprintf(buf, sizeof buf, "Verdict: %s (p=%.4f)\n", ex.predicted == 1 ? "sarcastic" : "not sarcastic", ex.prob);
  os << buf;
  os << "Nearest semantic prototypes:\n";
  for (std::size_t i = 0; i < ex.semantic.size(); ++i) {
    const auto& p = ex.semantic[i];
    std::snprintf(buf, sizeof buf, "  %zu. #%zu [%s] distance=%s similarity=%.6f ", i + 1, p.index,
                  p.tag == 1 ? "sarcastic" : "non-sarcastic", format_distance(p.distance).c_str(), p.similarity);
    os << buf << '"' << p.text << "\" (" << p.record_id << ")\n";
  }
  os << "Sentiment branches:\n";
  auto branch = [&](const char* name, const BranchSummary& s) {
    std::snprintf(buf, sizeof buf,
                  "  %-8s P(positive)=%.4f  top positive #%zu sim=%.6f  top negative #%zu sim=%.6f\n", name, s.h,
                  s.top_positive, s.top_positive_similarity, s.top_negative, s.top_negative_similarity);
    os << buf;
  };
  branch("explicit", ex.explicit_branch);
  branch("implicit", ex.implicit_branch);
  return os.str();
}

}  // namespace protosarc
