#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "eden/error.hpp"

namespace eden {

/// Monotone maps from entropy to [0, 1].
enum class EntropyMap {
    Normalized,  // H / log|V|
    Perplexity,  // (e^H - 1) / (|V| - 1)
};

/// B_t = max(1, floor(a * B_max * phi(H) + b)), capped at B_max. With the
/// defaults a = 1, b = 0, phi = H / log|V| this is max(1, floor(B_max * H_bar)).
struct BranchingPolicy {
    std::size_t b_max = 5;
    double a = 1.0;
    double b = 0.0;
    EntropyMap phi = EntropyMap::Normalized;

    void validate() const {
        if (b_max < 1) throw InputError("B_max must be at least 1");
        if (!(a > 0.0) || std::isinf(a)) throw InputError("branching scale a must be positive");
        if (std::isnan(b) || std::isinf(b)) throw InputError("branching offset b must be finite");
    }
};

inline constexpr double kEntropyRangeTolerance = 1e-9;

// Absorbs rounding in H / log|V| so an exactly-uniform row maps to B_max.
inline constexpr double kFloorSlack = 1e-12;

inline double entropy_map(double entropy, std::size_t vocab_size, EntropyMap phi) {
    if (vocab_size < 2) return 0.0;
    const double log_v = std::log(static_cast<double>(vocab_size));
    switch (phi) {
        case EntropyMap::Normalized:
            return std::clamp(entropy / log_v, 0.0, 1.0);
        case EntropyMap::Perplexity:
            return std::clamp(std::expm1(entropy) / (static_cast<double>(vocab_size) - 1.0), 0.0, 1.0);
    }
    return 0.0;
}

/// Branch count from an already-normalized value in [0, 1].
inline std::size_t branch_factor_from_normalized(double phi_value, const BranchingPolicy& policy) {
    const double raw = std::floor(policy.a * static_cast<double>(policy.b_max) * phi_value + policy.b + kFloorSlack);
    if (!(raw >= 1.0)) return 1;
    return std::min(policy.b_max, static_cast<std::size_t>(std::min(raw, 1e15)));
}

inline std::size_t branch_factor(double entropy, std::size_t vocab_size, const BranchingPolicy& policy = {}) {
    if (vocab_size < 2) throw InputError("vocabulary size must be at least 2");
    const double log_v = std::log(static_cast<double>(vocab_size));
    if (std::isnan(entropy) || entropy < -kEntropyRangeTolerance || entropy > log_v + kEntropyRangeTolerance)
        throw InputError("entropy " + std::to_string(entropy) + " outside [0, log|V|]");
    return branch_factor_from_normalized(entropy_map(entropy, vocab_size, policy.phi), policy);
}

/// Largest normalized-entropy error that cannot move B_t across a
/// discretization boundary it is not already near: 0.5 / B_max.
inline double entropy_tolerance(const BranchingPolicy& policy) {
    return 0.5 / static_cast<double>(policy.b_max);
}

}  // namespace eden
