#include "protosarc/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "protosarc/errors.hpp"
#include "protosarc/random.hpp"

namespace protosarc {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kRecordKeys[] = {"id",      "text",      "ancestor", "y",
                                            "e_ct",    "e_st_ep",   "e_st_ip",  "e_st_full",
                                            "z_ep",    "z_ip",      "z_full"};
constexpr std::string_view kManifestKeys[] = {"d_s",   "d_m",  "dataset", "split", "semantic_encoder",
                                              "sentiment_encoder", "encoding"};

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

std::string encode_hex(const Vec& v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(v.size() * 16);
  for (double x : v) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int shift = 60; shift >= 0; shift -= 4) out.push_back(kDigits[(bits >> shift) & 0xF]);
  }
  return out;
}

Vec decode_hex(const std::string& s, std::size_t line, std::string_view field) {
  if (s.size() % 16 != 0) {
    throw DataError("field '" + std::string(field) + "' has a hex payload whose length is not a multiple of 16" +
                    at_line(line));
  }
  Vec out(s.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < 16; ++j) {
      const char c = s[i * 16 + j];
      std::uint64_t nibble = 0;
      if (c >= '0' && c <= '9') nibble = static_cast<std::uint64_t>(c - '0');
      else if (c >= 'a' && c <= 'f') nibble = static_cast<std::uint64_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') nibble = static_cast<std::uint64_t>(c - 'A' + 10);
      else throw DataError("field '" + std::string(field) + "' has a non-hex character" + at_line(line));
      bits = (bits << 4) | nibble;
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

Vec read_vector(const json& j, VectorEncoding enc, std::size_t line, std::string_view field) {
  Vec out;
  if (enc == VectorEncoding::kHex) {
    if (!j.is_string()) throw DataError("field '" + std::string(field) + "' must be a hex string" + at_line(line));
    out = decode_hex(j.get<std::string>(), line, field);
  } else {
    if (!j.is_array()) throw DataError("field '" + std::string(field) + "' must be an array" + at_line(line));
    out.reserve(j.size());
    for (const auto& x : j) {
      if (!x.is_number()) throw DataError("field '" + std::string(field) + "' has a non-numeric entry" + at_line(line));
      out.push_back(x.get<double>());
    }
  }
  for (double x : out) {
    if (!std::isfinite(x)) throw DataError("field '" + std::string(field) + "' has a non-finite entry" + at_line(line));
  }
  return out;
}

ordered_json write_vector(const Vec& v, VectorEncoding enc) {
  if (enc == VectorEncoding::kHex) return encode_hex(v);
  return ordered_json(v);
}

int read_label(const json& obj, std::string_view key, std::size_t line) {
  const auto& j = obj.at(std::string(key));
  if (!j.is_number_integer()) throw DataError("label '" + std::string(key) + "' must be an integer" + at_line(line));
  const auto v = j.get<long long>();
  if (v != 0 && v != 1) throw DataError("label '" + std::string(key) + "' outside {0,1}" + at_line(line));
  return static_cast<int>(v);
}

std::string read_string(const json& obj, std::string_view key, std::size_t line) {
  const auto& j = obj.at(std::string(key));
  if (!j.is_string()) throw DataError("field '" + std::string(key) + "' must be a string" + at_line(line));
  return j.get<std::string>();
}

std::size_t read_dim(const json& obj, std::string_view key, std::size_t line) {
  if (!obj.contains(std::string(key))) throw DataError("manifest is missing '" + std::string(key) + "'" + at_line(line));
  const auto& j = obj.at(std::string(key));
  if (!j.is_number_integer() || j.get<long long>() <= 0) {
    throw DataError("manifest '" + std::string(key) + "' must be a positive integer" + at_line(line));
  }
  return static_cast<std::size_t>(j.get<long long>());
}

Manifest parse_manifest(const json& j, std::size_t line) {
  if (!j.is_object()) throw DataError("manifest must be a JSON object" + at_line(line));
  Manifest m;
  m.d_s = read_dim(j, "d_s", line);
  m.d_m = read_dim(j, "d_m", line);
  auto opt_string = [&](const char* key) -> std::string {
    if (!j.contains(key) || j.at(key).is_null()) return {};
    return read_string(j, key, line);
  };
  m.dataset = opt_string("dataset");
  m.split = opt_string("split");
  m.semantic_encoder = opt_string("semantic_encoder");
  m.sentiment_encoder = opt_string("sentiment_encoder");
  const std::string enc = opt_string("encoding");
  try {
    m.encoding = enc.empty() ? VectorEncoding::kPlain : parse_vector_encoding(enc);
  } catch (const DataError& e) {
    throw DataError(std::string(e.what()) + at_line(line));
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kManifestKeys), std::end(kManifestKeys), key) == std::end(kManifestKeys)) {
      m.extra[key] = value.dump();
    }
  }
  return m;
}

void check_record(const EmbeddingRecord& r, const Manifest& m, std::size_t line) {
  auto dim_error = [&](std::string_view field, std::size_t got, std::size_t want) {
    return DataError("dimension mismatch: '" + std::string(field) + "' has length " + std::to_string(got) +
                     ", expected " + std::to_string(want) + at_line(line));
  };
  if (r.e_ct.size() != m.d_s) throw dim_error("e_ct", r.e_ct.size(), m.d_s);
  if (r.e_st_ep.size() != m.d_m) throw dim_error("e_st_ep", r.e_st_ep.size(), m.d_m);
  if (r.e_st_ip.size() != m.d_m) throw dim_error("e_st_ip", r.e_st_ip.size(), m.d_m);
  if (r.e_st_full && r.e_st_full->size() != m.d_m) throw dim_error("e_st_full", r.e_st_full->size(), m.d_m);
  for (int label : {r.y, r.z_ep, r.z_ip, r.z_full}) {
    if (label != 0 && label != 1) throw DataError("label outside {0,1}" + at_line(line));
  }
  const int expected_ip = r.y == 0 ? r.z_ep : 1 - r.z_ep;
  if (r.z_ip != expected_ip) throw DataError("z-consistency violated" + at_line(line));
}

EmbeddingRecord parse_record(const json& j, VectorEncoding enc, std::size_t line) {
  if (!j.is_object()) throw DataError("record must be a JSON object" + at_line(line));
  for (auto key : kRecordKeys) {
    if (!j.contains(std::string(key))) throw DataError("record is missing '" + std::string(key) + "'" + at_line(line));
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kRecordKeys), std::end(kRecordKeys), key) == std::end(kRecordKeys)) {
      throw DataError("record has unknown key '" + key + "'" + at_line(line));
    }
  }
  EmbeddingRecord r;
  r.id = read_string(j, "id", line);
  r.text = read_string(j, "text", line);
  if (!j.at("ancestor").is_null()) r.ancestor = read_string(j, "ancestor", line);
  r.y = read_label(j, "y", line);
  r.e_ct = read_vector(j.at("e_ct"), enc, line, "e_ct");
  r.e_st_ep = read_vector(j.at("e_st_ep"), enc, line, "e_st_ep");
  r.e_st_ip = read_vector(j.at("e_st_ip"), enc, line, "e_st_ip");
  if (!j.at("e_st_full").is_null()) r.e_st_full = read_vector(j.at("e_st_full"), enc, line, "e_st_full");
  r.z_ep = read_label(j, "z_ep", line);
  r.z_ip = read_label(j, "z_ip", line);
  r.z_full = read_label(j, "z_full", line);
  return r;
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::string_view to_string(VectorEncoding e) { return e == VectorEncoding::kHex ? "hex" : "plain"; }

VectorEncoding parse_vector_encoding(std::string_view s) {
  if (s == "plain") return VectorEncoding::kPlain;
  if (s == "hex") return VectorEncoding::kHex;
  throw DataError("unknown vector encoding '" + std::string(s) + "'");
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [label](const auto& r) { return r.y == label; }));
}

std::optional<std::size_t> Dataset::find(std::string_view id) const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].id == id) return i;
  }
  return std::nullopt;
}

void validate(const Dataset& ds) {
  if (ds.records.empty()) throw DataError("dataset has no records");
  if (ds.manifest.d_s == 0 || ds.manifest.d_m == 0) throw DataError("dataset dimensions must be positive");
  // Physical line numbers as they would appear in the written file.
  for (std::size_t i = 0; i < ds.records.size(); ++i) check_record(ds.records[i], ds.manifest, i + 2);
}

Dataset parse_dataset(std::istream& in, std::string_view source) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_manifest = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(std::string(source) + ": malformed JSON" + at_line(line_no) + " (" + e.what() + ")");
    }
    try {
      if (!have_manifest) {
        ds.manifest = parse_manifest(j, line_no);
        have_manifest = true;
        continue;
      }
      EmbeddingRecord r = parse_record(j, ds.manifest.encoding, line_no);
      if (ds.records.empty()) {
        // Dimensions come from the first record and must agree with the manifest.
        if (r.e_ct.size() != ds.manifest.d_s || r.e_st_ep.size() != ds.manifest.d_m) {
          throw DataError("dimension mismatch: first record has d_s=" + std::to_string(r.e_ct.size()) +
                          ", d_m=" + std::to_string(r.e_st_ep.size()) + " but manifest declares d_s=" +
                          std::to_string(ds.manifest.d_s) + ", d_m=" + std::to_string(ds.manifest.d_m) +
                          at_line(line_no));
        }
      }
      check_record(r, ds.manifest, line_no);
      if (r.text.empty()) ds.warnings.push_back("record '" + r.id + "' has empty text" + at_line(line_no));
      ds.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(std::string(source) + ": malformed record" + at_line(line_no) + " (" + e.what() + ")");
    } catch (const DataError& e) {
      throw DataError(std::string(source) + ": " + e.what());
    }
  }
  if (!have_manifest) throw DataError(std::string(source) + ": missing manifest line");
  if (ds.records.empty()) throw DataError(std::string(source) + ": dataset has no records");
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");
  return parse_dataset(in, path.string());
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  const auto enc = ds.manifest.encoding;
  ordered_json m;
  m["d_s"] = ds.manifest.d_s;
  m["d_m"] = ds.manifest.d_m;
  m["dataset"] = ds.manifest.dataset;
  m["split"] = ds.manifest.split;
  m["semantic_encoder"] = ds.manifest.semantic_encoder;
  m["sentiment_encoder"] = ds.manifest.sentiment_encoder;
  m["encoding"] = std::string(to_string(enc));
  for (const auto& [key, raw] : ds.manifest.extra) m[key] = ordered_json::parse(raw);
  out << m.dump() << '\n';
  for (const auto& r : ds.records) {
    ordered_json j;
    j["id"] = r.id;
    j["text"] = r.text;
    j["ancestor"] = r.ancestor ? ordered_json(*r.ancestor) : ordered_json(nullptr);
    j["y"] = r.y;
    j["e_ct"] = write_vector(r.e_ct, enc);
    j["e_st_ep"] = write_vector(r.e_st_ep, enc);
    j["e_st_ip"] = write_vector(r.e_st_ip, enc);
    j["e_st_full"] = r.e_st_full ? write_vector(*r.e_st_full, enc) : ordered_json(nullptr);
    j["z_ep"] = r.z_ep;
    j["z_ip"] = r.z_ip;
    j["z_full"] = r.z_full;
    out << j.dump() << '\n';
  }
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file '" + path.string() + "'");
  write_dataset(ds, out);
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.manifest = ds.manifest;
  out.records.reserve(indices.size());
  for (auto i : indices) out.records.push_back(ds.records.at(i));
  return out;
}

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

FoldPlan split_folds(const Dataset& ds, int k, std::uint64_t seed) {
  const auto n = ds.records.size();
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw ConfigError("fold count k=" + std::to_string(k) + " out of range [2, " + std::to_string(n) + "]");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n, -1);

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < n; ++i) by_class[ds.records[i].y].push_back(i);

  std::vector<std::size_t> order;
  if (by_class[0].size() < static_cast<std::size_t>(k) || by_class[1].size() < static_cast<std::size_t>(k)) {
    plan.stratified = false;
    plan.warnings.push_back("a class has fewer than k=" + std::to_string(k) +
                            " members; folds are not stratified");
    order.resize(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0));
    shuffle(order.begin(), order.end(), rng);
  } else {
    for (int c = 0; c < 2; ++c) {
      auto members = by_class[c];
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c) + 1));
      shuffle(members.begin(), members.end(), rng);
      order.insert(order.end(), members.begin(), members.end());
    }
  }
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    plan.assignments[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return plan;
}

HoldoutSplit stratified_holdout(const Dataset& ds, std::span<const std::size_t> indices, double frac,
                                std::uint64_t seed) {
  if (!(frac >= 0.0 && frac < 1.0)) throw ConfigError("holdout fraction must lie in [0, 1)");
  HoldoutSplit split;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (auto i : indices) {
      if (ds.records.at(i).y == c) members.push_back(i);
    }
    Rng rng(derive_seed(seed, 100 + static_cast<std::uint64_t>(c)));
    shuffle(members.begin(), members.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(frac * static_cast<double>(members.size())));
    if (frac > 0.0 && take == 0 && members.size() >= 2) take = 1;
    split.holdout.insert(split.holdout.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    split.keep.insert(split.keep.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  std::sort(split.keep.begin(), split.keep.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  return split;
}

}  // namespace protosarc
