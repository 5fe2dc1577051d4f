#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "eden/search/greedy.hpp"

namespace eden {

struct EdenOptions {
    BranchingPolicy policy;
    /// When false, bounds and S* are still tracked but never used to reject
    /// a child (reference mode for soundness checks).
    bool pruning = true;
    /// Raise S* only from completed sequences, never from open lower bounds.
    bool conservative = false;
    /// Replaces the standard bound formula (verification fixtures only).
    std::function<BoundPair(const SequenceState&, const ScoreConfig&)> bounds_fn;
};

namespace detail {

struct OpenCandidate {
    SequenceState state;
    BoundPair bounds;
};

// Best-first order for beam retention: upper bound, then cumulative
// log-probability, then token sequence.
inline bool rank_before(const OpenCandidate& a, const OpenCandidate& b) {
    if (a.bounds.upper != b.bounds.upper) return a.bounds.upper > b.bounds.upper;
    if (a.state.log_prob != b.state.log_prob) return a.state.log_prob > b.state.log_prob;
    return a.state.tokens < b.state.tokens;
}

}  // namespace detail

/// Entropy-adaptive branch-and-bound decoding.
///
/// A greedy pass seeds S* and the completed pool. Each round expands every
/// open beam node through its top-B_t tokens, B_t = f(entropy), in support
/// order. A child is admitted iff its upper bound reaches S*; admission raises
/// S* to the child's lower bound. Support order makes every later open
/// sibling weaker, so the first rejected open child ends that node's
/// expansion; a rejected EOS child is skipped.
/// Completed children go to the pool; the best B_max open children (by upper
/// bound) form the next beam.
inline DecodeResult eden_decode(DecodeSession& session, const ScoreConfig& config, const EdenOptions& options = {}) {
    config.validate();
    options.policy.validate();
    const TokenId eos = session.vocabulary().eos();

    const DecodeResult warm = greedy_decode(session, config);
    double s_star = warm.score;
    CompletedPool pool;
    {
        SequenceState g;
        g.tokens = warm.tokens;
        g.finished = true;
        pool.offer(g, warm.score);
    }

    std::vector<detail::OpenCandidate> beam{{SequenceState{}, BoundPair{0.0, 0.0}}};
    std::vector<StepTrace> trace;
    std::size_t step = 0;

    while (!beam.empty()) {
        ++step;
        StepTrace st;
        st.step = step;
        std::vector<detail::OpenCandidate> open;

        for (const auto& node : beam) {
            if (node.state.finished) continue;
            const auto& dist = session.distribution(node.state.tokens);
            const auto h = node_entropy(dist);
            const std::size_t branches = std::min(node_branch_factor(h, options.policy), dist.support().size());
            ++st.active;
            st.entropy += h.entropy;
            st.normalized_entropy += h.normalized;
            st.mean_branch += static_cast<double>(branches);
            st.max_branch = std::max(st.max_branch, branches);

            for (std::size_t j = 0; j < branches; ++j) {
                const auto& e = dist.support()[j];
                if (!(e.prob > 0.0)) {
                    ++st.prunes;
                    break;
                }
                SequenceState child = extend(node.state, e.token, e.log_prob, eos, config);
                const BoundPair bp = options.bounds_fn ? options.bounds_fn(child, config) : bounds(child, config);
                if (options.pruning && prune_decision(bp, s_star) == PruneDecision::Prune) {
                    ++st.prunes;
                    // An early EOS child is scored at its own length, so its
                    // bound is not comparable with open siblings normalized at
                    // T; only an open (or horizon) rejection ends the node.
                    if (child.finished && child.length() < config.max_length) continue;
                    break;
                }
                ++st.children;
                if (child.finished) {
                    s_star = std::max(s_star, bp.lower);
                    pool.offer(child, normalized_score(child, config));
                } else {
                    if (!options.conservative) s_star = std::max(s_star, bp.lower);
                    open.push_back({std::move(child), bp});
                }
            }
        }
        if (st.active == 0) break;

        std::sort(open.begin(), open.end(), detail::rank_before);
        if (open.size() > options.policy.b_max) open.resize(options.policy.b_max);
        beam = std::move(open);

        st.entropy /= static_cast<double>(st.active);
        st.normalized_entropy /= static_cast<double>(st.active);
        st.mean_branch /= static_cast<double>(st.active);
        st.beam = beam.size();
        st.s_star = s_star;
        trace.push_back(st);
    }
    return make_result(pool, session, std::move(trace));
}

inline DecodeResult eden_decode(const Provider& provider, std::span<const TokenId> prompt, const ScoreConfig& config,
                                const EdenOptions& options = {}) {
    DecodeSession session(provider, prompt);
    return eden_decode(session, config, options);
}

}  // namespace eden
