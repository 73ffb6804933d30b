#include "sentinel/adam.hpp"

#include <cmath>

#include "sentinel/errors.hpp"

namespace sentinel::numerics {

void adam_apply(Tensor& param, const Tensor& grad, AdamState& state,
                const AdamConfig& cfg) {
    if (!param.same_shape(grad) || !param.same_shape(state.m)) {
        throw ConfigError("adam_apply shape mismatch: param " +
                          shape_str(param.shape()) + ", grad " +
                          shape_str(grad.shape()) + ", state " +
                          shape_str(state.m.shape()));
    }
    if (state.t == 0) {
        throw ConfigError("adam_apply called with step counter 0");
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        param[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

std::size_t AdamOptimizer::add_param(const Shape& shape) {
    states_.emplace_back(shape);
    return states_.size() - 1;
}

void AdamOptimizer::step(const std::vector<Tensor*>& params,
                         const std::vector<const Tensor*>& grads) {
    if (params.size() != states_.size() || grads.size() != states_.size()) {
        throw ConfigError("AdamOptimizer::step called with " +
                          std::to_string(params.size()) + " params, " +
                          std::to_string(grads.size()) + " grads for " +
                          std::to_string(states_.size()) + " registered slots");
    }
    ++steps_;
    for (std::size_t i = 0; i < states_.size(); ++i) {
        states_[i].t = steps_;
        adam_apply(*params[i], *grads[i], states_[i], cfg_);
    }
}

} // namespace sentinel::numerics
