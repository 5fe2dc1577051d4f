#pragma once

#include "eden/search/session.hpp"

namespace eden {

/// Follows the support head (highest probability, lowest token index on
/// ties) until EOS or the length cap. Uses the caller's session so a warm
/// start shares the cache and the expansion count.
inline DecodeResult greedy_decode(DecodeSession& session, const ScoreConfig& config) {
    config.validate();
    const TokenId eos = session.vocabulary().eos();
    SequenceState state;
    std::vector<StepTrace> trace;
    while (!state.finished) {
        const auto& dist = session.distribution(state.tokens);
        const auto h = node_entropy(dist);
        const auto& head = dist.head();
        if (!(head.prob > 0.0)) throw ProviderError("distribution has no positive-probability token");
        state = extend(state, head.token, head.log_prob, eos, config);
        StepTrace st;
        st.step = state.length();
        st.active = 1;
        st.entropy = h.entropy;
        st.normalized_entropy = h.normalized;
        st.mean_branch = 1.0;
        st.max_branch = 1;
        st.children = 1;
        st.beam = state.finished ? 0 : 1;
        trace.push_back(st);
    }
    const double score = normalized_score(state, config);
    for (auto& st : trace) st.s_star = score;
    CompletedPool pool;
    pool.offer(state, score);
    return make_result(pool, session, std::move(trace));
}

inline DecodeResult greedy_decode(const Provider& provider, std::span<const TokenId> prompt, const ScoreConfig& config) {
    DecodeSession session(provider, prompt);
    return greedy_decode(session, config);
}

}  // namespace eden
