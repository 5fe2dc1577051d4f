#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "eden/entropy.hpp"
#include "eden/random.hpp"

namespace eden::lab {

/// How step distributions are drawn: a symmetric Dirichlet whose
/// concentration is log-uniform in [min, max] per step. `shared` draws one
/// distribution and reuses it at every step, which pins Var(H_t) to zero.
struct EntropySpec {
    std::size_t vocab_size = 10;
    double min_concentration = 1.0;
    double max_concentration = 1.0;
    bool shared = false;

    void validate() const {
        if (vocab_size < 2) throw InputError("instances need at least two candidates");
        if (!(min_concentration > 0.0) || !(max_concentration >= min_concentration) ||
            std::isinf(max_concentration))
            throw InputError("concentration range must satisfy 0 < min <= max < inf");
    }
};

/// One synthetic decision step. Values are log p_i (no continuation term),
/// so the effective gap is the top-two log gap.
struct StepInstance {
    TokenDistribution dist;
    double entropy = 0.0;
    std::vector<double> values;
    std::size_t i_star = 0;
    std::vector<double> gaps;
    double lipschitz_weight = 0.0;
    double eff_gap = 0.0;
};

inline StepInstance make_instance(const TokenDistribution& dist) {
    StepInstance s;
    s.dist = dist;
    s.entropy = shannon_entropy(dist).entropy;
    s.values = dist.dense_log();
    s.i_star = dist.support()[0].token;
    const double best = s.values[s.i_star];
    s.gaps.resize(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i)
        s.gaps[i] = s.values[i] == kNegInf ? kPosInf : best - s.values[i];
    s.gaps[s.i_star] = 0.0;
    const double second = dist.support()[1].log_prob;
    s.eff_gap = second == kNegInf ? kPosInf : best - second;
    return s;
}

inline std::vector<StepInstance> generate_instances(std::size_t steps, const EntropySpec& spec, std::uint64_t seed) {
    if (steps < 1) throw InputError("instance count T must be at least 1");
    spec.validate();
    Rng rng = make_rng(seed);
    const double lo = std::log(spec.min_concentration), hi = std::log(spec.max_concentration);
    auto draw = [&] {
        const double u = uniform01(rng);
        const double c = lo == hi ? spec.min_concentration : std::exp(lo + u * (hi - lo));
        return make_instance(TokenDistribution::from_probabilities(sample_dirichlet(spec.vocab_size, c, rng), true));
    };
    std::vector<StepInstance> out;
    out.reserve(steps);
    if (spec.shared) {
        out.assign(steps, draw());
        return out;
    }
    for (std::size_t t = 0; t < steps; ++t) out.push_back(draw());
    return out;
}

inline double entropy_variance(const std::vector<StepInstance>& instances) {
    if (instances.empty()) return 0.0;
    // Shifted by the first entry so identical entropies give exactly zero.
    const double h0 = instances.front().entropy;
    double sum = 0.0, sq = 0.0;
    for (const auto& s : instances) {
        sum += s.entropy - h0;
        sq += (s.entropy - h0) * (s.entropy - h0);
    }
    const double n = static_cast<double>(instances.size());
    return std::max(0.0, sq / n - (sum / n) * (sum / n));
}

}  // namespace eden::lab
