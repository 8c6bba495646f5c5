#pragma once

#include <cstdint>
#include <span>

#include "protosarc/linalg.hpp"
#include "protosarc/prototype_network.hpp"

namespace protosarc {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment accumulators over the flat parameter layout.
struct AdamState {
  AdamOptions options;
  Vec m;
  Vec v;
  std::uint64_t t = 0;
};

AdamState make_adam_state(std::size_t parameter_count, const AdamOptions& options = {});
AdamState make_adam_state(const ModelParams& params, const AdamOptions& options = {});

// One bias-corrected Adam update; increments state.t.
void adam_step(std::span<double> x, std::span<const double> grad, AdamState& state);
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state);

}  // namespace protosarc
