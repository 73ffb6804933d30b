#include "sentinel/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel::adversarial {

using numerics::GradTape;
using numerics::Tensor;

std::string to_string(AttackMethod method) {
    switch (method) {
        case AttackMethod::NONE: return "NONE";
        case AttackMethod::FGSM: return "FGSM";
        case AttackMethod::PGD: return "PGD";
        case AttackMethod::MIM: return "MIM";
    }
    throw ConfigError("unknown attack method");
}

AttackMethod attack_method_from_string(const std::string& name) {
    if (name == "NONE") return AttackMethod::NONE;
    if (name == "FGSM") return AttackMethod::FGSM;
    if (name == "PGD") return AttackMethod::PGD;
    if (name == "MIM") return AttackMethod::MIM;
    throw ConfigError("unknown attack method '" + name +
                      "', expected NONE, FGSM, PGD or MIM");
}

void validate(const AttackConfig& cfg) {
    if (!(cfg.eps >= 0.0 && cfg.eps <= 0.5)) {
        throw ConfigError("eps must lie in [0, 0.5], got " +
                          std::to_string(cfg.eps));
    }
    if (!(cfg.phi >= 0.0 && cfg.phi <= 100.0)) {
        throw ConfigError("phi must lie in [0, 100], got " +
                          std::to_string(cfg.phi));
    }
    const bool iterative =
        cfg.method == AttackMethod::PGD || cfg.method == AttackMethod::MIM;
    if (iterative && cfg.iters < 1) {
        throw ConfigError("iters must be at least 1 for iterative attacks");
    }
    if (!(cfg.alpha >= 0.0)) {
        throw ConfigError("alpha must be non-negative");
    }
}

APMask make_mask(std::size_t ap_count, double phi, std::uint64_t seed) {
    if (!(phi >= 0.0 && phi <= 100.0)) {
        throw ConfigError("phi must lie in [0, 100], got " + std::to_string(phi));
    }
    const auto compromised = static_cast<std::size_t>(
        std::llround(phi * static_cast<double>(ap_count) / 100.0));
    std::vector<std::size_t> indices(ap_count);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "ap-mask"));
    rng.shuffle(indices);
    APMask mask(ap_count, false);
    for (std::size_t i = 0; i < compromised; ++i) mask[indices[i]] = true;
    return mask;
}

std::size_t popcount(const APMask& mask) {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

ImageGrad image_loss_grad(const capsnet::ModelParams& params,
                          const capsnet::ModelConfig& config,
                          const Tensor& pixels, std::size_t label) {
    GradTape tape;
    capsnet::GraphRefs refs = capsnet::build_forward(tape, params, config, pixels);
    GradTape::Ref loss = tape.sparse_ce(refs.probs, label);
    tape.backward(loss);
    ImageGrad result{tape.value(loss).item(), tape.grad(refs.image)};
    if (!std::isfinite(result.loss) || !result.grad.all_finite()) {
        throw NumericError("attack gradient is not finite");
    }
    return result;
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double sign(double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
    return 0.0;
}

void check_mask(const APMask& mask, const capsnet::ModelConfig& config) {
    if (mask.size() != config.input_width) {
        throw ConfigError("mask length " + std::to_string(mask.size()) +
                          " does not match input_width " +
                          std::to_string(config.input_width));
    }
}

// Ridge-regularized step: eps * g / ||g||_2^2, zero when the gradient
// vanishes. The norm runs over the full gradient; the mask only restricts
// which coordinates get updated.
Tensor ridge_step(const Tensor& grad, double eps) {
    Tensor eta = Tensor::zeros_like(grad);
    const double n2 = numerics::squared_l2_norm(grad);
    if (n2 > 0.0) {
        for (std::size_t i = 0; i < grad.size(); ++i) {
            eta[i] = eps * grad[i] / n2;
        }
    }
    return eta;
}

} // namespace

dataset::GrayscaleImage fgsm(const capsnet::ModelParams& params,
                             const capsnet::ModelConfig& config,
                             const dataset::GrayscaleImage& img,
                             std::size_t label, const AttackConfig& cfg,
                             const APMask& mask) {
    validate(cfg);
    check_mask(mask, config);
    const Tensor& clean = img.pixels;
    ImageGrad ig = image_loss_grad(params, config, clean, label);
    Tensor out = clean;
    for (std::size_t j = 0; j < mask.size(); ++j) {
        if (!mask[j]) continue;
        out[j] = clamp01(clean[j] + cfg.eps * sign(ig.grad[j]));
    }
    return dataset::GrayscaleImage(std::move(out));
}

dataset::GrayscaleImage pgd(const capsnet::ModelParams& params,
                            const capsnet::ModelConfig& config,
                            const dataset::GrayscaleImage& img,
                            std::size_t label, const AttackConfig& cfg,
                            const APMask& mask) {
    validate(cfg);
    check_mask(mask, config);
    const Tensor& clean = img.pixels;
    Tensor current = clean;
    for (std::size_t iter = 0; iter < cfg.iters; ++iter) {
        ImageGrad ig = image_loss_grad(params, config, current, label);
        Tensor eta = ridge_step(ig.grad, cfg.eps);
        for (std::size_t j = 0; j < mask.size(); ++j) {
            if (!mask[j]) continue;
            current[j] = std::clamp(current[j] + eta[j], clean[j] - cfg.eps,
                                    clean[j] + cfg.eps);
        }
    }
    for (std::size_t j = 0; j < mask.size(); ++j) {
        if (mask[j]) current[j] = clamp01(current[j]);
    }
    return dataset::GrayscaleImage(std::move(current));
}

dataset::GrayscaleImage mim(const capsnet::ModelParams& params,
                            const capsnet::ModelConfig& config,
                            const dataset::GrayscaleImage& img,
                            std::size_t label, const AttackConfig& cfg,
                            const APMask& mask) {
    validate(cfg);
    check_mask(mask, config);
    const Tensor& clean = img.pixels;

    if (cfg.mim_literal) {
        // Recurrence as published: X(t+1) = Clip_{X,eps}(alpha X(t) + eta).
        Tensor current = clean;
        for (std::size_t iter = 0; iter < cfg.iters; ++iter) {
            ImageGrad ig = image_loss_grad(params, config, current, label);
            Tensor eta = ridge_step(ig.grad, cfg.eps);
            for (std::size_t j = 0; j < mask.size(); ++j) {
                if (!mask[j]) continue;
                current[j] = std::clamp(cfg.alpha * current[j] + eta[j],
                                        clean[j] - cfg.eps, clean[j] + cfg.eps);
            }
        }
        for (std::size_t j = 0; j < mask.size(); ++j) {
            if (mask[j]) current[j] = clamp01(current[j]);
        }
        return dataset::GrayscaleImage(std::move(current));
    }

    // Momentum on the deviation from the clean image, which keeps the
    // clean pixels as the anchor instead of dragging them toward zero.
    Tensor deviation(numerics::Shape{1, config.input_width, 1});
    for (std::size_t iter = 0; iter < cfg.iters; ++iter) {
        Tensor current = clean;
        for (std::size_t j = 0; j < mask.size(); ++j) {
            if (mask[j]) current[j] = clean[j] + deviation[j];
        }
        ImageGrad ig = image_loss_grad(params, config, current, label);
        Tensor eta = ridge_step(ig.grad, cfg.eps);
        for (std::size_t j = 0; j < mask.size(); ++j) {
            if (!mask[j]) continue;
            deviation[j] = std::clamp(cfg.alpha * deviation[j] + eta[j],
                                      -cfg.eps, cfg.eps);
        }
    }
    Tensor out = clean;
    for (std::size_t j = 0; j < mask.size(); ++j) {
        if (mask[j]) out[j] = clamp01(clean[j] + deviation[j]);
    }
    return dataset::GrayscaleImage(std::move(out));
}

dataset::GrayscaleImage attack_image(const capsnet::ModelParams& params,
                                     const capsnet::ModelConfig& config,
                                     const dataset::GrayscaleImage& img,
                                     std::size_t label, const AttackConfig& cfg,
                                     const APMask& mask) {
    switch (cfg.method) {
        case AttackMethod::NONE: return img;
        case AttackMethod::FGSM: return fgsm(params, config, img, label, cfg, mask);
        case AttackMethod::PGD: return pgd(params, config, img, label, cfg, mask);
        case AttackMethod::MIM: return mim(params, config, img, label, cfg, mask);
    }
    throw ConfigError("unknown attack method");
}

double adversarial_loss(const capsnet::ModelParams& params,
                        const capsnet::ModelConfig& config,
                        const std::vector<capsnet::Sample>& batch,
                        const AttackConfig& cfg) {
    validate(cfg);
    if (cfg.method == AttackMethod::NONE) {
        throw ConfigError("adversarial_loss requires an attack method");
    }
    const APMask mask = make_mask(config.input_width, cfg.phi, cfg.mask_seed);
    double total = 0.0;
    for (const capsnet::Sample& sample : batch) {
        capsnet::ForwardTrace clean =
            capsnet::forward(params, config, sample.image);
        total += numerics::sparse_ce_loss(clean.probs, sample.label);
        dataset::GrayscaleImage adv_img =
            attack_image(params, config, sample.image, sample.label, cfg, mask);
        capsnet::ForwardTrace attacked =
            capsnet::forward(params, config, adv_img);
        total += numerics::sparse_ce_loss(attacked.probs, sample.label);
    }
    if (!std::isfinite(total)) {
        throw NumericError("adversarial loss is not finite");
    }
    return total;
}

std::vector<capsnet::Sample> attack_dataset(
    const capsnet::ModelParams& params, const capsnet::ModelConfig& config,
    const std::vector<capsnet::Sample>& test_set, const AttackConfig& cfg) {
    validate(cfg);
    if (cfg.method == AttackMethod::NONE) return test_set;
    const APMask mask = make_mask(config.input_width, cfg.phi, cfg.mask_seed);
    std::vector<capsnet::Sample> attacked;
    attacked.reserve(test_set.size());
    for (const capsnet::Sample& sample : test_set) {
        attacked.push_back(
            {attack_image(params, config, sample.image, sample.label, cfg, mask),
             sample.label});
    }
    return attacked;
}

} // namespace sentinel::adversarial
