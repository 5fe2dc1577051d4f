#pragma once

#include <cmath>

#include "eden/search/session.hpp"

namespace eden {

inline constexpr double kOracleGuard = 1e6;

/// Depth-first enumeration of every sequence ending in EOS or reaching T.
/// Returns the best by normalized score (ties: lexicographically smallest).
inline DecodeResult exhaustive_oracle(DecodeSession& session, const ScoreConfig& config) {
    config.validate();
    const double v = static_cast<double>(session.vocabulary().size());
    if (std::pow(v, static_cast<double>(config.max_length)) > kOracleGuard)
        throw InputError("exhaustive search space |V|^T exceeds 1e6");
    const TokenId eos = session.vocabulary().eos();
    CompletedPool pool;
    auto visit = [&](auto&& self, const SequenceState& node) -> void {
        // Cache entries are map nodes; references survive later insertions.
        const auto& dist = session.distribution(node.tokens);
        for (const auto& e : dist.support()) {
            if (!(e.prob > 0.0)) break;
            SequenceState child = extend(node, e.token, e.log_prob, eos, config);
            if (child.finished) {
                pool.offer(child, normalized_score(child, config));
            } else {
                self(self, child);
            }
        }
    };
    visit(visit, SequenceState{});
    return make_result(pool, session, {});
}

inline DecodeResult exhaustive_oracle(const Provider& provider, std::span<const TokenId> prompt,
                                      const ScoreConfig& config) {
    DecodeSession session(provider, prompt);
    return exhaustive_oracle(session, config);
}

}  // namespace eden
