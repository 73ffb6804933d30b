#pragma once

#include <cstdint>
#include <vector>

#include "sentinel/attack_config.hpp"
#include "sentinel/capsnet.hpp"
#include "sentinel/dataset.hpp"

namespace sentinel::adversarial {

// true = the attacker controls this AP's pixel.
using APMask = std::vector<bool>;

// Uniformly random subset of exactly round(phi * W / 100) APs.
APMask make_mask(std::size_t ap_count, double phi, std::uint64_t seed);

std::size_t popcount(const APMask& mask);

// All three attacks perturb only masked pixels, keep every masked pixel
// within [X - eps, X + eps] of the clean image, leave unmasked pixels
// bit-identical, and clamp the result to [0, 1].

// Single step in the gradient sign direction, sign(0) = 0.
dataset::GrayscaleImage fgsm(const capsnet::ModelParams& params,
                             const capsnet::ModelConfig& config,
                             const dataset::GrayscaleImage& img,
                             std::size_t label, const AttackConfig& cfg,
                             const APMask& mask);

// Iterative attack with the ridge-regularized step eps * g / ||g||^2
// (squared L2 norm, zero-gradient guard), each iterate clipped to the
// eps-box around the clean image.
dataset::GrayscaleImage pgd(const capsnet::ModelParams& params,
                            const capsnet::ModelConfig& config,
                            const dataset::GrayscaleImage& img,
                            std::size_t label, const AttackConfig& cfg,
                            const APMask& mask);

// Momentum variant: the deviation from the clean image carries momentum
// alpha between iterations. With cfg.mim_literal the recurrence instead
// multiplies the iterate itself by alpha, as published.
dataset::GrayscaleImage mim(const capsnet::ModelParams& params,
                            const capsnet::ModelConfig& config,
                            const dataset::GrayscaleImage& img,
                            std::size_t label, const AttackConfig& cfg,
                            const APMask& mask);

// Dispatches on cfg.method; NONE returns the image unchanged.
dataset::GrayscaleImage attack_image(const capsnet::ModelParams& params,
                                     const capsnet::ModelConfig& config,
                                     const dataset::GrayscaleImage& img,
                                     std::size_t label, const AttackConfig& cfg,
                                     const APMask& mask);

// Combined objective of one batch: sum over samples of clean loss plus
// loss on an adversarial example generated with the current parameters.
// The mask is derived from cfg.mask_seed.
double adversarial_loss(const capsnet::ModelParams& params,
                        const capsnet::ModelConfig& config,
                        const std::vector<capsnet::Sample>& batch,
                        const AttackConfig& cfg);

// Perturbs a whole evaluation set under one shared mask (the same physical
// APs are compromised everywhere). Labels pass through unchanged.
std::vector<capsnet::Sample> attack_dataset(
    const capsnet::ModelParams& params, const capsnet::ModelConfig& config,
    const std::vector<capsnet::Sample>& test_set, const AttackConfig& cfg);

// Loss and the loss gradient w.r.t. the input pixels at one point. pixels
// may lie outside [0, 1] (attack iterates). Exposed for tests.
struct ImageGrad {
    double loss = 0.0;
    numerics::Tensor grad;  // (1, W, 1)
};
ImageGrad image_loss_grad(const capsnet::ModelParams& params,
                          const capsnet::ModelConfig& config,
                          const numerics::Tensor& pixels, std::size_t label);

} // namespace sentinel::adversarial
