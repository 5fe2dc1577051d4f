#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "eden/error.hpp"

namespace eden {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent per-trial streams from
/// (seed, index) so results do not depend on execution order.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(mix_seed(seed, stream)); }

/// Uniform double in [0, 1) from the top 53 bits; independent of the
/// standard library's distribution implementation.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Symmetric-or-not Dirichlet draw. Components are floored at 1e-300 before
/// normalization so log-probabilities stay finite.
inline std::vector<double> sample_dirichlet(std::span<const double> concentration, Rng& rng) {
    if (concentration.size() < 2) throw InputError("dirichlet needs at least two components");
    std::vector<double> out(concentration.size());
    double total = 0.0;
    for (std::size_t i = 0; i < concentration.size(); ++i) {
        const double a = concentration[i];
        if (!(a > 0.0) || std::isinf(a)) throw InputError("dirichlet concentration must be positive and finite");
        std::gamma_distribution<double> gamma(a, 1.0);
        out[i] = std::max(gamma(rng), 1e-300);
        total += out[i];
    }
    for (double& x : out) x /= total;
    return out;
}

inline std::vector<double> sample_dirichlet(std::size_t dim, double concentration, Rng& rng) {
    std::vector<double> alpha(dim, concentration);
    return sample_dirichlet(alpha, rng);
}

/// Inverse-CDF draw from a probability vector.
inline std::size_t sample_index(std::span<const double> probs, Rng& rng) {
    double total = 0.0;
    for (double p : probs) total += p;
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0) return i;
    return 0;
}

}  // namespace eden
