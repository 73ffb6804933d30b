#pragma once

#include <cstddef>
#include <vector>

#include "sentinel/tensor.hpp"

namespace sentinel::numerics {

// First and second moment estimates for one parameter tensor, plus the shared
// step counter. One AdamState per tensor; step() must be called once per
// optimizer update before the per-tensor applies so bias correction uses the
// same t for every tensor in the update.
struct AdamState {
    Tensor m;
    Tensor v;
    std::size_t t = 0;

    explicit AdamState(const Shape& shape) : m(shape), v(shape) {}
};

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// In-place Adam update with bias correction:
//   m <- b1 m + (1-b1) g, v <- b2 v + (1-b2) g^2
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
// The caller increments state.t before the call (or uses AdamOptimizer below,
// which handles the counter across a whole parameter set).
void adam_apply(Tensor& param, const Tensor& grad, AdamState& state,
                const AdamConfig& cfg);

// Convenience wrapper that owns one AdamState per registered tensor and keeps
// their step counters in lockstep.
class AdamOptimizer {
public:
    explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}

    // Registers a parameter tensor and returns its slot index.
    std::size_t add_param(const Shape& shape);

    // Applies one update to every registered tensor. params and grads are
    // parallel to the registration order.
    void step(const std::vector<Tensor*>& params,
              const std::vector<const Tensor*>& grads);

    const AdamConfig& config() const { return cfg_; }
    std::size_t step_count() const { return steps_; }

private:
    AdamConfig cfg_;
    std::vector<AdamState> states_;
    std::size_t steps_ = 0;
};

} // namespace sentinel::numerics
