#pragma once

#include <algorithm>
#include <vector>

#include "eden/search/session.hpp"

namespace eden {

/// Fixed-width beam search. Every open hypothesis is expanded over its whole
/// positive-probability support; the `width` best children by cumulative
/// log-probability (all children share a length, so this is also the
/// normalized-score order) are kept, and finished ones among them leave the
/// beam for the completed pool. Width 1 reproduces greedy decoding.
inline DecodeResult beam_decode(DecodeSession& session, const ScoreConfig& config, std::size_t width) {
    config.validate();
    if (width < 1) throw InputError("beam width must be at least 1");
    const TokenId eos = session.vocabulary().eos();

    CompletedPool pool;
    std::vector<SequenceState> beam{SequenceState{}};
    std::vector<StepTrace> trace;
    std::size_t step = 0;

    while (!beam.empty()) {
        ++step;
        StepTrace st;
        st.step = step;
        std::vector<SequenceState> candidates;
        for (const auto& node : beam) {
            const auto& dist = session.distribution(node.tokens);
            const auto h = node_entropy(dist);
            ++st.active;
            st.entropy += h.entropy;
            st.normalized_entropy += h.normalized;
            std::size_t expanded = 0;
            for (const auto& e : dist.support()) {
                if (!(e.prob > 0.0)) break;
                candidates.push_back(extend(node, e.token, e.log_prob, eos, config));
                ++expanded;
            }
            st.mean_branch += static_cast<double>(expanded);
            st.max_branch = std::max(st.max_branch, expanded);
        }
        const std::size_t keep = std::min(width, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                          [](const SequenceState& a, const SequenceState& b) {
                              if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                              return a.tokens < b.tokens;
                          });
        st.prunes = candidates.size() - keep;
        st.children = keep;
        std::vector<SequenceState> next;
        for (std::size_t i = 0; i < keep; ++i) {
            if (candidates[i].finished) {
                pool.offer(candidates[i], normalized_score(candidates[i], config));
            } else {
                next.push_back(std::move(candidates[i]));
            }
        }
        beam = std::move(next);
        st.entropy /= static_cast<double>(st.active);
        st.normalized_entropy /= static_cast<double>(st.active);
        st.mean_branch /= static_cast<double>(st.active);
        st.beam = beam.size();
        st.s_star = pool.has_best() ? pool.best_score() : kNegInf;
        trace.push_back(st);
    }
    return make_result(pool, session, std::move(trace));
}

inline DecodeResult beam_decode(const Provider& provider, std::span<const TokenId> prompt, const ScoreConfig& config,
                                std::size_t width) {
    DecodeSession session(provider, prompt);
    return beam_decode(session, config, width);
}

}  // namespace eden
