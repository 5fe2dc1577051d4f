#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eden/search/eden.hpp"
#include "eden/search/oracle.hpp"
#include "eden/suite.hpp"

namespace eden {

/// Random tiny table models for exhaustive cross-checks.
struct RandomModelSpec {
    std::size_t min_vocab = 3;
    std::size_t max_vocab = 5;
    std::size_t min_length = 3;
    std::size_t max_length = 6;
    double min_concentration = 0.1;
    double max_concentration = 10.0;

    void validate() const {
        if (min_vocab < 2 || max_vocab < min_vocab) throw InputError("vocabulary range must satisfy 2 <= min <= max");
        if (min_length < 1 || max_length < min_length) throw InputError("length range must satisfy 1 <= min <= max");
        if (std::pow(static_cast<double>(max_vocab), static_cast<double>(max_length)) > kOracleGuard)
            throw InputError("exhaustive search space |V|^T exceeds 1e6");
    }
};

struct RandomCase {
    std::size_t index = 0;
    TableModel model;
    ScoreConfig config;
};

/// Case `index` of the suite keyed by `seed`: |V| and T uniform over their
/// ranges, alpha drawn from {0, 1}.
inline RandomCase random_case(std::uint64_t seed, std::size_t index, const RandomModelSpec& spec = {}) {
    spec.validate();
    Rng rng = make_rng(seed, index);
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
    };
    const std::size_t v = pick(spec.min_vocab, spec.max_vocab);
    const std::size_t t = pick(spec.min_length, spec.max_length);
    const double alpha = uniform01(rng) < 0.5 ? 0.0 : 1.0;
    const RandomProvider source(v, rng(), spec.min_concentration, spec.max_concentration);
    ScoreConfig config;
    config.alpha = alpha;
    config.max_length = t;
    config.vocab_size = v;
    return {index, materialize(source, t), config};
}

struct CaseReport {
    std::size_t index = 0;
    std::size_t vocab_size = 0;
    std::size_t max_length = 0;
    double alpha = 0.0;
    double oracle_score = 0.0;
    double eden_score = 0.0;
    double unpruned_score = 0.0;
    bool oracle_match = false;
    bool pruning_sound = false;
    bool conservative_identical = false;

    bool passed() const noexcept { return oracle_match && pruning_sound && conservative_identical; }
};

/// Eden with B_max = |V| against the oracle, pruning on against pruning off,
/// and conservative pruning against pruning off (token-identical).
inline CaseReport verify_case(const RandomCase& c, const EdenOptions& base = {}, double tolerance = 1e-9) {
    const std::vector<TokenId> prompt;
    EdenOptions options = base;
    options.policy.b_max = c.config.vocab_size;
    options.pruning = true;
    options.conservative = false;
    EdenOptions unpruned = options;
    unpruned.pruning = false;
    EdenOptions conservative = options;
    conservative.conservative = true;

    const auto oracle = exhaustive_oracle(c.model, prompt, c.config);
    const auto eden = eden_decode(c.model, prompt, c.config, options);
    const auto reference = eden_decode(c.model, prompt, c.config, unpruned);
    const auto cons = eden_decode(c.model, prompt, c.config, conservative);

    CaseReport r;
    r.index = c.index;
    r.vocab_size = c.config.vocab_size;
    r.max_length = c.config.max_length;
    r.alpha = c.config.alpha;
    r.oracle_score = oracle.score;
    r.eden_score = eden.score;
    r.unpruned_score = reference.score;
    r.oracle_match = std::abs(eden.score - oracle.score) <= tolerance;
    r.pruning_sound = std::abs(eden.score - reference.score) <= tolerance;
    r.conservative_identical = cons.tokens == reference.tokens;
    return r;
}

}  // namespace eden
