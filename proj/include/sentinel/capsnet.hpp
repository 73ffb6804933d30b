#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sentinel/attack_config.hpp"
#include "sentinel/dataset.hpp"
#include "sentinel/grad_tape.hpp"
#include "sentinel/tensor.hpp"

namespace sentinel::capsnet {

// Architecture and training hyperparameters. Defaults follow the reference
// architecture: 32 conv filters, 8 primary capsules of 32 dims, 32-dim
// outer capsules, 3 routing iterations, 300 epochs of Adam at lr 0.001.
struct ModelConfig {
    std::size_t input_width = 0;  // W, the AP count
    std::size_t class_count = 0;  // n, the RP count
    std::size_t conv_filters = 32;
    std::size_t conv_kernel = 9;
    std::size_t pc_capsules = 8;
    std::size_t pc_dim = 32;
    std::size_t oc_dim = 32;
    std::size_t routing_iters = 3;
    std::size_t epochs = 300;
    double lr = 0.001;
    std::size_t batch_size = 32;
    std::uint64_t init_seed = 0;

    std::size_t conv_out_width() const {
        return input_width - conv_kernel + 1;
    }
    // Flattened CONV output length, the fan-in of every primary capsule.
    std::size_t feature_count() const {
        return conv_out_width() * conv_filters;
    }
};

void validate(const ModelConfig& config);

bool operator==(const ModelConfig& a, const ModelConfig& b);

// Trainable tensors:
//   F  (conv_filters, conv_kernel)                  conv filter bank
//   V  (pc_capsules, pc_dim, feature_count)         primary-capsule projections
//   Wt (pc_capsules, class_count, oc_dim, pc_dim)   outer-capsule transforms
struct ModelParams {
    numerics::Tensor F;
    numerics::Tensor V;
    numerics::Tensor Wt;
};

// Intermediate activations of one forward pass.
struct ForwardTrace {
    numerics::Tensor con;        // (1, conv_out_width, conv_filters), post ReLU
    numerics::Tensor u;          // (pc_capsules, pc_dim), post squash
    numerics::Tensor agreement;  // (class_count) class scores a
    numerics::Tensor probs;      // (class_count) P, sums to 1
};

// Zero-mean uniform init scaled by 1/sqrt(fan_in) per tensor, drawn from a
// single stream seeded by config.init_seed.
ModelParams init(const ModelConfig& config);

std::size_t count_params(const ModelConfig& config);

// Tape handles for one recorded forward pass. Gradients are available for
// the parameters and the input image after tape.backward(loss).
struct GraphRefs {
    numerics::GradTape::Ref image;
    numerics::GradTape::Ref F, V, Wt;
    numerics::GradTape::Ref con, u, agreement, probs;
};

// Records the full forward computation on the tape. pixels must be shaped
// (1, W, 1); values outside [0, 1] are accepted so attack iterates can be
// evaluated before their final clamp.
GraphRefs build_forward(numerics::GradTape& tape, const ModelParams& params,
                        const ModelConfig& config,
                        const numerics::Tensor& pixels);

ForwardTrace forward(const ModelParams& params, const ModelConfig& config,
                     const dataset::GrayscaleImage& img);

// Standalone routing: predictions, coupling refinement, class scores and
// probabilities from primary-capsule activities. Exposed for testing; the
// forward pass records the identical computation.
struct RouteResult {
    numerics::Tensor agreement;
    numerics::Tensor probs;
};
RouteResult route(const numerics::Tensor& u, const numerics::Tensor& Wt,
                  std::size_t routing_iters);

// Argmax of P; ties break to the lowest class index.
std::size_t predict(const ForwardTrace& trace);

struct Sample {
    dataset::GrayscaleImage image;
    std::size_t label = 0;
};

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_curve;  // per-epoch mean training loss
};

// Mini-batch Adam training with a seeded per-epoch shuffle. When adv is
// set, every batch optimizes clean loss plus adversarial loss, with the
// adversarial examples regenerated against the current parameters. Aborts
// with NumericError if the loss goes non-finite.
TrainResult train(ModelParams params, const ModelConfig& config,
                  const std::vector<Sample>& train_set,
                  const std::optional<adversarial::AttackConfig>& adv,
                  std::uint64_t seed);

} // namespace sentinel::capsnet
