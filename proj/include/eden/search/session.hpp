#pragma once

#include <map>
#include <span>
#include <vector>

#include "eden/branching.hpp"
#include "eden/entropy.hpp"
#include "eden/providers/provider.hpp"
#include "eden/scoring.hpp"

namespace eden {

/// One decode's view of a provider: prepends the prompt, memoizes
/// distributions per generated prefix, and counts the calls that actually
/// reach the provider (the expansion count).
class DecodeSession {
public:
    DecodeSession(const Provider& provider, std::span<const TokenId> prompt)
        : provider_(provider), prompt_(prompt.begin(), prompt.end()) {
        provider_.vocabulary().check(prompt_);
    }

    const TokenDistribution& distribution(const TokenSequence& generated) {
        auto it = cache_.find(generated);
        if (it != cache_.end()) return it->second;
        TokenSequence context = prompt_;
        context.insert(context.end(), generated.begin(), generated.end());
        auto dist = provider_.next_distribution(context);
        ++calls_;
        if (dist.empty()) throw ProviderError("provider returned an empty support");
        return cache_.emplace(generated, std::move(dist)).first->second;
    }

    std::size_t calls() const noexcept { return calls_; }
    const Provider& provider() const noexcept { return provider_; }
    const Vocabulary& vocabulary() const { return provider_.vocabulary(); }
    const TokenSequence& prompt() const noexcept { return prompt_; }

private:
    const Provider& provider_;
    TokenSequence prompt_;
    std::map<TokenSequence, TokenDistribution> cache_;
    std::size_t calls_ = 0;
};

/// Entropy used for branching: exact for full rows, the partial-sum
/// (top-k) entropy for truncated ones.
struct NodeEntropy {
    double entropy = 0.0;
    double normalized = 0.0;
    std::size_t normalizer = 2;  // |V| or k
};

inline NodeEntropy node_entropy(const TokenDistribution& dist) {
    if (dist.is_full()) {
        const auto r = shannon_entropy(dist);
        return {r.entropy, r.normalized, dist.support().size()};
    }
    const auto r = truncated_entropy(dist);
    return {r.entropy, r.normalized, dist.vocab_size().value_or(dist.truncation())};
}

inline std::size_t node_branch_factor(const NodeEntropy& h, const BranchingPolicy& policy) {
    const double phi = policy.phi == EntropyMap::Normalized ? h.normalized
                                                            : entropy_map(h.entropy, h.normalizer, policy.phi);
    return branch_factor_from_normalized(phi, policy);
}

/// Per-step record. Entropy columns are means over the expanded nodes.
struct StepTrace {
    std::size_t step = 0;
    std::size_t active = 0;
    double entropy = 0.0;
    double normalized_entropy = 0.0;
    double mean_branch = 0.0;
    std::size_t max_branch = 0;
    std::size_t children = 0;  // admitted children
    std::size_t prunes = 0;
    std::size_t beam = 0;      // open candidates retained
    double s_star = 0.0;
};

struct DecodeResult {
    TokenSequence tokens;
    double score = kNegInf;
    std::size_t expansions = 0;
    std::size_t completed = 0;  // completed sequences considered
    std::vector<StepTrace> trace;

    bool empty() const noexcept { return tokens.empty(); }
};

/// Total order on finished candidates: higher score, then
/// lexicographically smaller token sequence.
inline bool better_candidate(double score_a, const TokenSequence& a, double score_b, const TokenSequence& b) {
    if (score_a != score_b) return score_a > score_b;
    return a < b;
}

/// Best-so-far holder for finished sequences.
class CompletedPool {
public:
    void offer(const SequenceState& state, double score) {
        ++count_;
        if (!has_ || better_candidate(score, state.tokens, best_score_, best_.tokens)) {
            best_ = state;
            best_score_ = score;
            has_ = true;
        }
    }

    bool has_best() const noexcept { return has_; }
    const SequenceState& best() const noexcept { return best_; }
    double best_score() const noexcept { return best_score_; }
    std::size_t count() const noexcept { return count_; }

private:
    SequenceState best_;
    double best_score_ = kNegInf;
    bool has_ = false;
    std::size_t count_ = 0;
};

inline DecodeResult make_result(const CompletedPool& pool, const DecodeSession& session, std::vector<StepTrace> trace) {
    if (!pool.has_best()) throw ProviderError("search finished without a completed sequence");
    DecodeResult r;
    r.tokens = pool.best().tokens;
    r.score = pool.best_score();
    r.expansions = session.calls();
    r.completed = pool.count();
    r.trace = std::move(trace);
    return r;
}

}  // namespace eden
