#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "protosarc/embedding_store.hpp"
#include "protosarc/errors.hpp"
#include "protosarc/synthetic.hpp"

using namespace protosarc;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "mem");
}

std::string three_records() {
  return std::string(fixtures::kManifest4) + "\n" + fixtures::record_line("a", 0, 1, 1) + "\n" +
         fixtures::record_line("b", 1, 1, 0) + "\n" + fixtures::record_line("c", 1, 0, 1) + "\n";
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

Dataset balanced(std::size_t per_class) {
  auto ds = fixtures::dataset(2, 2);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    ds.records.push_back(fixtures::record("r" + std::to_string(i), static_cast<int>(i % 2),
                                          {static_cast<double>(i), 0.0}, {0.0, 1.0}, 0));
  }
  return ds;
}

}  // namespace

TEST_CASE("three valid records load with their dimensions") {
  const auto ds = parse(three_records());
  CHECK(ds.size() == 3);
  CHECK(ds.d_s() == 4);
  CHECK(ds.d_m() == 4);
  CHECK(ds.records[1].id == "b");
  CHECK(ds.records[0].e_ct == Vec{1, 2, 3, 4});
  CHECK(ds.records[0].e_st_full.has_value());
  CHECK(ds.count_label(1) == 2);
  CHECK(ds.find("c") == std::optional<std::size_t>(2));
  CHECK_FALSE(ds.find("zz").has_value());
  CHECK(ds.warnings.empty());
}

TEST_CASE("z-consistency violation reports the line") {
  const auto text = std::string(fixtures::kManifest4) + "\n" + fixtures::record_line("a", 0, 1, 1) + "\n" +
                    fixtures::record_line("b", 1, 1, 1) + "\n";
  CHECK(error_of(text).find("z-consistency violated at line 3") != std::string::npos);
  const auto text0 = std::string(fixtures::kManifest4) + "\n" + fixtures::record_line("a", 0, 1, 0) + "\n";
  CHECK(error_of(text0).find("z-consistency violated at line 2") != std::string::npos);
}

TEST_CASE("dimension mismatch after d_s is established") {
  const auto text = std::string(fixtures::kManifest4) + "\n" + fixtures::record_line("a", 0, 1, 1) + "\n" +
                    fixtures::record_line("b", 0, 1, 1, "[1,2,3]") + "\n";
  const auto msg = error_of(text);
  CHECK(msg.find("dimension mismatch") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);
}

TEST_CASE("first record must agree with the manifest dimensions") {
  const auto text = std::string(fixtures::kManifest4) + "\n" + fixtures::record_line("a", 0, 1, 1, "[1,2]") + "\n";
  CHECK(error_of(text).find("dimension mismatch") != std::string::npos);
}

TEST_CASE("malformed input is rejected with a line number") {
  const std::string m = fixtures::kManifest4;
  CHECK(error_of(m + "\n{not json\n").find("line 2") != std::string::npos);
  CHECK(error_of(m + "\n").find("no records") != std::string::npos);
  CHECK(error_of("").find("missing manifest") != std::string::npos);
  auto bad_label = fixtures::record_line("a", 0, 1, 1);
  bad_label.replace(bad_label.find("\"y\": 0"), 6, "\"y\": 2");
  CHECK(error_of(m + "\n" + bad_label + "\n").find("outside {0,1}") != std::string::npos);
  auto extra = fixtures::record_line("a", 0, 1, 1);
  extra.insert(extra.size() - 1, R"(, "bogus": 1)");
  CHECK(error_of(m + "\n" + extra + "\n").find("unknown key 'bogus'") != std::string::npos);
  auto missing = fixtures::record_line("a", 0, 1, 1);
  missing.replace(missing.find(R"("ancestor": null, )"), 18, "");
  CHECK(error_of(m + "\n" + missing + "\n").find("missing 'ancestor'") != std::string::npos);
  auto nan = fixtures::record_line("a", 0, 1, 1, "[1,2,3,\"x\"]");
  CHECK(error_of(m + "\n" + nan + "\n").find("non-numeric") != std::string::npos);
}

TEST_CASE("missing file names the path") {
  try {
    load_dataset("/nonexistent/dir/data.jsonl");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/data.jsonl") != std::string::npos);
  }
}

TEST_CASE("empty text is accepted with a warning") {
  auto line = fixtures::record_line("a", 0, 1, 1);
  line.replace(line.find(R"("text": "t")"), 11, R"("text": "")");
  const auto ds = parse(std::string(fixtures::kManifest4) + "\n" + line + "\n");
  REQUIRE(ds.warnings.size() == 1);
  CHECK(ds.warnings[0].find("empty text") != std::string::npos);
}

TEST_CASE("null e_st_full is allowed") {
  auto line = fixtures::record_line("a", 0, 1, 1);
  line.replace(line.find(R"("e_st_full": [0,1,0,0])"), 22, R"("e_st_full": null)");
  const auto ds = parse(std::string(fixtures::kManifest4) + "\n" + line + "\n");
  CHECK_FALSE(ds.records[0].e_st_full.has_value());
}

TEST_CASE("write then load reproduces the file byte for byte") {
  for (auto enc : {VectorEncoding::kPlain, VectorEncoding::kHex}) {
    PlantedOptions opt;
    opt.n = 30;
    auto ds = make_planted_dataset(opt);
    ds.records[3].ancestor = "parent post";
    ds.records[4].e_st_full.reset();
    ds.manifest.encoding = enc;
    ds.manifest.extra["lexicon"] = "\"opinion-lexicon\"";
    std::ostringstream first;
    write_dataset(ds, first);
    const auto reloaded = parse(first.str());
    CHECK(reloaded.records == ds.records);
    CHECK(reloaded.manifest == ds.manifest);
    std::ostringstream second;
    write_dataset(reloaded, second);
    CHECK(first.str() == second.str());
  }
}

TEST_CASE("hex encoding stores exact bits") {
  auto ds = fixtures::dataset(2, 1);
  ds.records.push_back(fixtures::record("a", 0, {0.1, -1e-300}, {3.0}, 1));
  ds.manifest.encoding = VectorEncoding::kHex;
  std::ostringstream out;
  write_dataset(ds, out);
  CHECK(out.str().find("\"3fb999999999999a") != std::string::npos);
  const auto back = parse(out.str());
  CHECK(back.records[0].e_ct[1] == -1e-300);
  CHECK(parse_vector_encoding("hex") == VectorEncoding::kHex);
  CHECK_THROWS_AS(parse_vector_encoding("base64"), DataError);
}

TEST_CASE("validate checks in-memory datasets") {
  auto ds = fixtures::dataset(2, 2);
  CHECK_THROWS_AS(validate(ds), DataError);
  ds.records.push_back(fixtures::record("a", 1, {0, 0}, {0, 0}, 1));
  CHECK_NOTHROW(validate(ds));
  ds.records[0].z_ip = 1;
  CHECK_THROWS_WITH_AS(validate(ds), doctest::Contains("z-consistency"), DataError);
}

TEST_CASE("split_folds: 10 balanced records and k=5 give one of each class per fold") {
  const auto ds = balanced(5);
  const auto plan = split_folds(ds, 5, 3);
  CHECK(plan.stratified);
  for (int f = 0; f < 5; ++f) {
    const auto test = plan.test_indices(f);
    REQUIRE(test.size() == 2);
    CHECK(ds.records[test[0]].y != ds.records[test[1]].y);
  }
}

TEST_CASE("split_folds: 11 records and k=5 give sizes 3,2,2,2,2") {
  auto ds = balanced(5);
  ds.records.push_back(fixtures::record("extra", 0, {9, 9}, {0, 1}, 0));
  const auto plan = split_folds(ds, 5, 11);
  auto sizes = plan.fold_sizes();
  std::sort(sizes.rbegin(), sizes.rend());
  CHECK(sizes == std::vector<std::size_t>{3, 2, 2, 2, 2});
}

TEST_CASE("split_folds is a deterministic stratified partition") {
  PlantedOptions opt;
  for (std::size_t n : {23u, 40u, 57u}) {
    opt.n = n;
    const auto ds = make_planted_dataset(opt);
    for (int k : {2, 3, 5}) {
      const auto a = split_folds(ds, k, 99);
      const auto b = split_folds(ds, k, 99);
      CHECK(a.assignments == b.assignments);
      std::multiset<std::size_t> seen;
      for (int f = 0; f < k; ++f) {
        const auto test = a.test_indices(f);
        const auto train = a.train_indices(f);
        CHECK(test.size() + train.size() == n);
        seen.insert(test.begin(), test.end());
      }
      CHECK(seen.size() == n);
      CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == n);
      const auto sizes = a.fold_sizes();
      CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
      for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> per(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
          if (ds.records[i].y == c) ++per[a.assignments[i]];
        }
        CHECK(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()) <= 1);
      }
    }
  }
}

TEST_CASE("split_folds rejects k out of range and falls back for tiny classes") {
  const auto ds = balanced(3);
  CHECK_THROWS_AS(split_folds(ds, 1, 0), ConfigError);
  CHECK_THROWS_AS(split_folds(ds, 7, 0), ConfigError);
  const auto plan = split_folds(ds, 4, 0);
  CHECK_FALSE(plan.stratified);
  CHECK_FALSE(plan.warnings.empty());
  const auto sizes = plan.fold_sizes();
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
}

TEST_CASE("stratified holdout keeps class proportions") {
  PlantedOptions opt;
  opt.n = 100;
  const auto ds = make_planted_dataset(opt);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto split = stratified_holdout(ds, all, 0.1, 5);
  CHECK(split.holdout.size() == 10);
  CHECK(split.keep.size() == 90);
  std::size_t pos = 0;
  for (auto i : split.holdout) pos += static_cast<std::size_t>(ds.records[i].y);
  CHECK(pos == 5);
  const auto again = stratified_holdout(ds, all, 0.1, 5);
  CHECK(again.holdout == split.holdout);
  CHECK_THROWS_AS(stratified_holdout(ds, all, 1.0, 5), ConfigError);
}
