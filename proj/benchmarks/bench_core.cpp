#include <benchmark/benchmark.h>

#include "protosarc/gradients.hpp"
#include "protosarc/kmeans.hpp"
#include "protosarc/random.hpp"
#include "protosarc/synthetic.hpp"
#include "protosarc/trainer.hpp"

using namespace protosarc;

namespace {

struct Setup {
  Dataset data;
  ModelParams params;
};

// Planted data of the given dimension with a freshly initialized model.
Setup make_setup(std::size_t n, std::size_t d) {
  PlantedOptions po;
  po.n = n;
  po.d_s = d;
  po.d_m = d;
  Setup s;
  s.data = make_planted_dataset(po);
  TrainConfig cfg;
  s.params = initialize_model(s.data, cfg);
  return s;
}

void BM_Forward(benchmark::State& state) {
  const auto s = make_setup(64, static_cast<std::size_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(s.data.records[i++ % s.data.size()], s.params));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Forward)->Arg(8)->Arg(64)->Arg(384);

void BM_Gradients(benchmark::State& state) {
  const auto s = make_setup(static_cast<std::size_t>(state.range(0)), 64);
  const auto batch = batch_of(s.data);
  const LossWeights w;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradients(batch, s.params, w));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gradients)->Arg(32)->Arg(60)->Arg(256);

void BM_KMeans(benchmark::State& state) {
  Rng rng(1);
  std::vector<Vec> pts(static_cast<std::size_t>(state.range(0)), Vec(64));
  for (auto& p : pts)
    for (auto& x : p) x = standard_normal(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmeans(pts, 8, 0));
  }
}
BENCHMARK(BM_KMeans)->Arg(500)->Arg(2000);

void BM_Epoch(benchmark::State& state) {
  PlantedOptions po;
  po.n = 400;
  const auto ds = make_planted_dataset(po);
  TrainConfig cfg;
  cfg.max_epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(ds, ds, cfg));
  }
}
BENCHMARK(BM_Epoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
