// Writes planted datasets in the embedding file format, for demos and tests.
#include <iostream>
#include <numeric>

#include <CLI11.hpp>

#include "protosarc/embedding_store.hpp"
#include "protosarc/errors.hpp"
#include "protosarc/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate planted embedding datasets", "protosarc-synth"};
  std::string kind = "planted";
  std::string train_out;
  std::string test_out;
  std::size_t n = 400;
  std::uint64_t seed = 1;
  double test_frac = 0.2;
  bool hex = false;
  app.add_option("--kind", kind, "planted or incongruity")->check(CLI::IsMember({"planted", "incongruity"}));
  app.add_option("--train-out", train_out, "training file")->required();
  app.add_option("--test-out", test_out, "test file; omitted: no split");
  app.add_option("-n,--records", n, "number of records");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--test-frac", test_frac, "stratified test fraction");
  app.add_flag("--hex", hex, "store vectors as hex-encoded doubles");
  CLI11_PARSE(app, argc, argv);

  try {
    protosarc::Dataset ds;
    if (kind == "planted") {
      protosarc::PlantedOptions opt;
      opt.n = n;
      opt.seed = seed;
      ds = protosarc::make_planted_dataset(opt);
    } else {
      protosarc::IncongruityTaskOptions opt;
      opt.n = n;
      opt.seed = seed;
      ds = protosarc::make_incongruity_dataset(opt);
    }
    if (hex) ds.manifest.encoding = protosarc::VectorEncoding::kHex;
    if (test_out.empty()) {
      protosarc::write_dataset(ds, train_out);
    } else {
      std::vector<std::size_t> all(ds.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      const auto split = protosarc::stratified_holdout(ds, all, test_frac, seed);
      auto train = protosarc::subset(ds, split.keep);
      auto test = protosarc::subset(ds, split.holdout);
      train.manifest.split = "train";
      test.manifest.split = "test";
      protosarc::write_dataset(train, train_out);
      protosarc::write_dataset(test, test_out);
    }
  } catch (const protosarc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const protosarc::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
