#include "sentinel/capsnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentinel/adam.hpp"
#include "sentinel/adversarial.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::capsnet {

using numerics::GradTape;
using numerics::Shape;
using numerics::Tensor;
using Ref = numerics::GradTape::Ref;

void validate(const ModelConfig& config) {
    if (config.input_width < 1) throw ConfigError("input_width must be at least 1");
    if (config.class_count < 1) throw ConfigError("class_count must be at least 1");
    if (config.conv_filters < 1) throw ConfigError("conv_filters must be at least 1");
    if (config.conv_kernel < 1 || config.conv_kernel > config.input_width) {
        throw ConfigError("conv_kernel " + std::to_string(config.conv_kernel) +
                          " must lie in [1, input_width=" +
                          std::to_string(config.input_width) + "]");
    }
    if (config.pc_capsules < 1) throw ConfigError("pc_capsules must be at least 1");
    if (config.pc_dim < 1) throw ConfigError("pc_dim must be at least 1");
    if (config.oc_dim < 1) throw ConfigError("oc_dim must be at least 1");
    if (config.routing_iters < 1) {
        throw ConfigError("routing_iters must be at least 1");
    }
    if (!(config.lr > 0.0)) throw ConfigError("lr must be positive");
    if (config.batch_size < 1) throw ConfigError("batch_size must be at least 1");
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
    return a.input_width == b.input_width && a.class_count == b.class_count &&
           a.conv_filters == b.conv_filters && a.conv_kernel == b.conv_kernel &&
           a.pc_capsules == b.pc_capsules && a.pc_dim == b.pc_dim &&
           a.oc_dim == b.oc_dim && a.routing_iters == b.routing_iters &&
           a.epochs == b.epochs && a.lr == b.lr &&
           a.batch_size == b.batch_size && a.init_seed == b.init_seed;
}

namespace {

void validate_params(const ModelParams& params, const ModelConfig& config) {
    const Shape f_shape{config.conv_filters, config.conv_kernel};
    const Shape v_shape{config.pc_capsules, config.pc_dim, config.feature_count()};
    const Shape w_shape{config.pc_capsules, config.class_count, config.oc_dim,
                        config.pc_dim};
    if (params.F.shape() != f_shape || params.V.shape() != v_shape ||
        params.Wt.shape() != w_shape) {
        throw ConfigError("parameter shapes do not match the model config");
    }
}

Tensor uniform_tensor(Shape shape, double scale, Rng& rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = rng.uniform(-scale, scale);
    }
    return t;
}

struct RouteRefs {
    Ref agreement;
    Ref probs;
};

// Dynamic agreement routing. Coupling logits b start at zero; each
// iteration softmaxes them per primary capsule, combines predictions into
// outer capsules, squashes, and scores prediction/output agreement. The
// last iteration's agreement feeds the class scores instead of another
// logit update, which would not influence any output.
RouteRefs build_route(GradTape& tape, Ref u, Ref wt, std::size_t pc_capsules,
                      std::size_t class_count, std::size_t routing_iters) {
    Ref uhat = tape.caps_predict(wt, u);
    Ref b = tape.leaf(Tensor(Shape{pc_capsules, class_count}));
    Ref agreement{0};
    for (std::size_t iter = 0; iter < routing_iters; ++iter) {
        Ref coupling = tape.softmax_rows(b);
        Ref combined = tape.route_combine(coupling, uhat);
        Ref v = tape.squash_rows(combined);
        agreement = tape.route_agreement(uhat, v);
        if (iter + 1 < routing_iters) {
            b = tape.add(b, agreement);
        }
    }
    Ref a = tape.col_sum(agreement);
    Ref probs = tape.softmax(a);
    return {a, probs};
}

} // namespace

// Fan-in-scaled uniform bounds. The gains keep the primary and outer
// capsule pre-activations near norm 1 at init, where squash has useful
// slope; with unit gains both capsule layers start in the quadratic
// regime of squash and gradients are orders of magnitude too small to
// train in a practical number of epochs.
constexpr double kConvGain = 3.5;
constexpr double kProjGain = 3.5;
constexpr double kTransformGain = 8.0;

ModelParams init(const ModelConfig& config) {
    validate(config);
    Rng rng(derive_seed(config.init_seed, "model-init"));
    ModelParams params;
    params.F = uniform_tensor(
        {config.conv_filters, config.conv_kernel},
        kConvGain / std::sqrt(static_cast<double>(config.conv_kernel)), rng);
    params.V = uniform_tensor(
        {config.pc_capsules, config.pc_dim, config.feature_count()},
        kProjGain / std::sqrt(static_cast<double>(config.feature_count())),
        rng);
    params.Wt = uniform_tensor(
        {config.pc_capsules, config.class_count, config.oc_dim, config.pc_dim},
        kTransformGain / std::sqrt(static_cast<double>(config.pc_dim)), rng);
    return params;
}

std::size_t count_params(const ModelConfig& config) {
    validate(config);
    return config.conv_filters * config.conv_kernel +
           config.pc_capsules * config.pc_dim * config.feature_count() +
           config.pc_capsules * config.class_count * config.oc_dim *
               config.pc_dim;
}

GraphRefs build_forward(GradTape& tape, const ModelParams& params,
                        const ModelConfig& config, const Tensor& pixels) {
    validate(config);
    validate_params(params, config);
    if (pixels.rank() != 3 || pixels.dim(0) != 1 ||
        pixels.dim(1) != config.input_width || pixels.dim(2) != 1) {
        throw ConfigError("input image shaped " +
                          numerics::shape_str(pixels.shape()) + ", expected (1, " +
                          std::to_string(config.input_width) + ", 1)");
    }
    GraphRefs refs;
    refs.image = tape.leaf(pixels);
    refs.F = tape.leaf(params.F);
    refs.V = tape.leaf(params.V);
    refs.Wt = tape.leaf(params.Wt);
    refs.con = tape.relu(tape.conv1d(refs.image, refs.F));
    Ref flat = tape.reshape(refs.con, Shape{config.feature_count()});
    Ref s = tape.caps_project(refs.V, flat);
    refs.u = tape.squash_rows(s);
    RouteRefs routed = build_route(tape, refs.u, refs.Wt, config.pc_capsules,
                                   config.class_count, config.routing_iters);
    refs.agreement = routed.agreement;
    refs.probs = routed.probs;
    return refs;
}

ForwardTrace forward(const ModelParams& params, const ModelConfig& config,
                     const dataset::GrayscaleImage& img) {
    GradTape tape;
    GraphRefs refs = build_forward(tape, params, config, img.pixels);
    ForwardTrace trace;
    trace.con = tape.value(refs.con);
    trace.u = tape.value(refs.u);
    trace.agreement = tape.value(refs.agreement);
    trace.probs = tape.value(refs.probs);
    return trace;
}

RouteResult route(const Tensor& u, const Tensor& wt, std::size_t routing_iters) {
    if (u.rank() != 2 || wt.rank() != 4 || wt.dim(0) != u.dim(0) ||
        wt.dim(3) != u.dim(1)) {
        throw ConfigError("route shapes " + numerics::shape_str(u.shape()) +
                          " and " + numerics::shape_str(wt.shape()) +
                          " are inconsistent");
    }
    if (routing_iters < 1) throw ConfigError("routing_iters must be at least 1");
    GradTape tape;
    Ref u_ref = tape.leaf(u);
    Ref wt_ref = tape.leaf(wt);
    RouteRefs refs =
        build_route(tape, u_ref, wt_ref, u.dim(0), wt.dim(1), routing_iters);
    return {tape.value(refs.agreement), tape.value(refs.probs)};
}

std::size_t predict(const ForwardTrace& trace) {
    if (trace.probs.size() == 0) throw ConfigError("empty probability vector");
    const double* begin = trace.probs.data();
    const double* mx = std::max_element(begin, begin + trace.probs.size());
    return static_cast<std::size_t>(mx - begin);
}

namespace {

// One forward/backward pass; adds parameter gradients into the
// accumulators and returns the sample loss.
double accumulate_sample(const ModelParams& params, const ModelConfig& config,
                         const Tensor& pixels, std::size_t label, Tensor& g_f,
                         Tensor& g_v, Tensor& g_wt) {
    GradTape tape;
    GraphRefs refs = build_forward(tape, params, config, pixels);
    Ref loss = tape.sparse_ce(refs.probs, label);
    tape.backward(loss);
    const Tensor& df = tape.grad(refs.F);
    const Tensor& dv = tape.grad(refs.V);
    const Tensor& dw = tape.grad(refs.Wt);
    for (std::size_t i = 0; i < g_f.size(); ++i) g_f[i] += df[i];
    for (std::size_t i = 0; i < g_v.size(); ++i) g_v[i] += dv[i];
    for (std::size_t i = 0; i < g_wt.size(); ++i) g_wt[i] += dw[i];
    return tape.value(loss).item();
}

} // namespace

TrainResult train(ModelParams params, const ModelConfig& config,
                  const std::vector<Sample>& train_set,
                  const std::optional<adversarial::AttackConfig>& adv,
                  std::uint64_t seed) {
    validate(config);
    validate_params(params, config);
    if (train_set.empty()) throw ConfigError("training set is empty");
    for (const Sample& sample : train_set) {
        if (sample.image.width() != config.input_width) {
            throw ConfigError("training image width " +
                              std::to_string(sample.image.width()) +
                              " does not match input_width " +
                              std::to_string(config.input_width));
        }
        if (sample.label >= config.class_count) {
            throw ConfigError("training label " + std::to_string(sample.label) +
                              " out of range for " +
                              std::to_string(config.class_count) + " classes");
        }
    }
    adversarial::APMask mask;
    if (adv) {
        adversarial::validate(*adv);
        if (adv->method == adversarial::AttackMethod::NONE) {
            throw ConfigError("adversarial training requires an attack method");
        }
        mask = adversarial::make_mask(config.input_width, adv->phi,
                                      adv->mask_seed);
    }

    numerics::AdamOptimizer optimizer(numerics::AdamConfig{config.lr, 0.9,
                                                           0.999, 1e-8});
    optimizer.add_param(params.F.shape());
    optimizer.add_param(params.V.shape());
    optimizer.add_param(params.Wt.shape());

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    TrainResult result;
    result.loss_curve.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(seed, "epoch-order", epoch));
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += config.batch_size) {
            const std::size_t end =
                std::min(order.size(), start + config.batch_size);
            Tensor g_f = Tensor::zeros_like(params.F);
            Tensor g_v = Tensor::zeros_like(params.V);
            Tensor g_wt = Tensor::zeros_like(params.Wt);
            double batch_loss = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const Sample& sample = train_set[order[i]];
                double sample_loss =
                    accumulate_sample(params, config, sample.image.pixels,
                                      sample.label, g_f, g_v, g_wt);
                if (adv) {
                    dataset::GrayscaleImage adv_img = adversarial::attack_image(
                        params, config, sample.image, sample.label, *adv, mask);
                    sample_loss +=
                        accumulate_sample(params, config, adv_img.pixels,
                                          sample.label, g_f, g_v, g_wt);
                }
                if (!std::isfinite(sample_loss)) {
                    throw NumericError(
                        "training aborted: non-finite loss at epoch " +
                        std::to_string(epoch) + ", sample " +
                        std::to_string(order[i]));
                }
                batch_loss += sample_loss;
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            for (std::size_t i = 0; i < g_f.size(); ++i) g_f[i] *= inv;
            for (std::size_t i = 0; i < g_v.size(); ++i) g_v[i] *= inv;
            for (std::size_t i = 0; i < g_wt.size(); ++i) g_wt[i] *= inv;
            optimizer.step({&params.F, &params.V, &params.Wt},
                           {&g_f, &g_v, &g_wt});
            epoch_loss += batch_loss;
        }
        result.loss_curve.push_back(epoch_loss /
                                    static_cast<double>(train_set.size()));
    }
    result.params = std::move(params);
    return result;
}

} // namespace sentinel::capsnet
