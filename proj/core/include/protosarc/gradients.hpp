#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "protosarc/losses.hpp"
#include "protosarc/prototype_network.hpp"

namespace protosarc {

struct GradientResult {
  Gradients grads;
  LossBreakdown loss;
};

/// Exact gradient of the composite objective on one batch with respect to
/// every prototype, the output head and the incongruity head.
///
/// The nearest-prototype minima are differentiated through their argmin
/// (lowest index on ties), ReLU and the L1 term use a zero subgradient at 0.
GradientResult gradients(BatchView batch, const ModelParams& params, const LossWeights& w);

// Mean of the gradients of several micro-batches.
GradientResult averaged_gradients(std::span<const BatchView> micro_batches, const ModelParams& params,
                                  const LossWeights& w);

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  std::string worst_path;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t total = 0;
};

// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
inline constexpr double kGradCheckFloor = 1e-5;

using Objective = std::function<double(std::span<const double>)>;

/// Central differences of `objective` at `x` against `analytic`. Above
/// `max_params` entries a seeded random subsample of that size is checked.
/// Throws NumericalError if the objective is non-finite at a probe.
GradCheckReport check_gradient(const Objective& objective, std::span<const double> analytic,
                               std::span<const double> x, double step, std::size_t max_params = 10000,
                               std::uint64_t seed = 0);

GradCheckReport finite_diff_check(const ModelParams& params, BatchView batch, const LossWeights& w, double step,
                                  std::size_t max_params = 10000, std::uint64_t seed = 0);

}  // namespace protosarc
