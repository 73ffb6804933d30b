#pragma once

#include <cstdint>
#include <string>

namespace sentinel::adversarial {

enum class AttackMethod { NONE, FGSM, PGD, MIM };

std::string to_string(AttackMethod method);
AttackMethod attack_method_from_string(const std::string& name);

// eps is in pixel units ([0, 1] image scale), so eps = 0.1 corresponds to
// 10 dBm of the 100 dBm dynamic range. phi is the percentage of APs the
// attacker controls. mim_literal selects the published MIM recurrence that
// multiplies the iterate itself by alpha instead of its deviation from the
// clean image.
struct AttackConfig {
    AttackMethod method = AttackMethod::NONE;
    double eps = 0.1;
    double phi = 100.0;
    std::size_t iters = 10;
    double alpha = 0.9;
    std::uint64_t mask_seed = 0;
    bool mim_literal = false;
};

// Throws ConfigError on out-of-range fields (eps in [0, 0.5], phi in
// [0, 100], iters >= 1 for iterative methods).
void validate(const AttackConfig& cfg);

} // namespace sentinel::adversarial
