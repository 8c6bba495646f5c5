#include "protosarc/optimizer.hpp"

#include <cmath>

#include "protosarc/errors.hpp"

namespace protosarc {

AdamState make_adam_state(std::size_t parameter_count, const AdamOptions& options) {
  if (!(options.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(options.beta1 >= 0.0 && options.beta1 < 1.0) || !(options.beta2 >= 0.0 && options.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  AdamState s;
  s.options = options;
  s.m.assign(parameter_count, 0.0);
  s.v.assign(parameter_count, 0.0);
  return s;
}

AdamState make_adam_state(const ModelParams& params, const AdamOptions& options) {
  return make_adam_state(parameter_count(params), options);
}

void adam_step(std::span<double> x, std::span<const double> grad, AdamState& state) {
  if (x.size() != grad.size() || x.size() != state.m.size()) throw DataError("adam_step: shape mismatch");
  const auto& o = state.options;
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = grad[i];
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    x[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state) {
  auto x = flatten(params);
  adam_step(x, flatten(grads), state);
  unflatten(x, params);
}

}  // namespace protosarc
