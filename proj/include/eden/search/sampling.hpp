#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eden/random.hpp"
#include "eden/search/session.hpp"

namespace eden {

enum class SamplingKind { TopK, TopP, MinP };

struct SamplingSpec {
    SamplingKind kind = SamplingKind::TopP;
    std::size_t k = 10;  // top-k
    double p = 0.9;      // top-p mass or min-p ratio

    void validate() const {
        if (kind == SamplingKind::TopK && k < 1) throw InputError("top-k needs k >= 1");
        if (kind != SamplingKind::TopK && !(p > 0.0 && p <= 1.0)) throw InputError("p must lie in (0, 1]");
    }
};

/// Head of the support kept by the sampling rule (always at least one token).
inline std::size_t sampling_cutoff(const TokenDistribution& dist, const SamplingSpec& spec) {
    const auto& s = dist.support();
    std::size_t positive = 0;
    while (positive < s.size() && s[positive].prob > 0.0) ++positive;
    if (positive == 0) throw ProviderError("distribution has no positive-probability token");
    switch (spec.kind) {
        case SamplingKind::TopK:
            return std::min(spec.k, positive);
        case SamplingKind::TopP: {
            double cum = 0.0;
            for (std::size_t i = 0; i < positive; ++i) {
                cum += s[i].prob;
                if (cum >= spec.p) return i + 1;
            }
            return positive;
        }
        case SamplingKind::MinP: {
            const double floor = spec.p * s[0].prob;
            std::size_t n = 1;
            while (n < positive && s[n].prob >= floor) ++n;
            return n;
        }
    }
    return 1;
}

/// Ancestral sampling from the renormalized head kept by `spec`.
inline DecodeResult sample_decode(DecodeSession& session, const ScoreConfig& config, const SamplingSpec& spec,
                                  std::uint64_t seed) {
    config.validate();
    spec.validate();
    Rng rng = make_rng(seed);
    const TokenId eos = session.vocabulary().eos();
    SequenceState state;
    std::vector<StepTrace> trace;
    std::vector<double> weights;
    while (!state.finished) {
        const auto& dist = session.distribution(state.tokens);
        const auto h = node_entropy(dist);
        const std::size_t n = sampling_cutoff(dist, spec);
        weights.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) weights[i] = dist.support()[i].prob;
        const std::size_t pick = n == 1 ? 0 : sample_index(weights, rng);
        const auto& e = dist.support()[pick];
        state = extend(state, e.token, e.log_prob, eos, config);
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
    CompletedPool pool;
    pool.offer(state, normalized_score(state, config));
    for (auto& st : trace) st.s_star = pool.best_score();
    return make_result(pool, session, std::move(trace));
}

inline DecodeResult sample_decode(const Provider& provider, std::span<const TokenId> prompt, const ScoreConfig& config,
                                  const SamplingSpec& spec, std::uint64_t seed) {
    DecodeSession session(provider, prompt);
    return sample_decode(session, config, spec, seed);
}

/// Seed of the i-th best-of-n run; run 0 uses the base seed itself.
inline std::uint64_t best_of_n_seed(std::uint64_t seed, std::size_t run) {
    return run == 0 ? seed : mix_seed(seed, run);
}

/// n independent sampled generations, each in its own session; returns the
/// one with the highest normalized score. Expansions are summed over runs.
inline DecodeResult best_of_n(const Provider& provider, std::span<const TokenId> prompt, const ScoreConfig& config,
                              std::size_t n, std::uint64_t seed, const SamplingSpec& spec = {}) {
    if (n < 1) throw InputError("best-of-n needs n >= 1");
    DecodeResult best;
    std::size_t expansions = 0, completed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        DecodeResult r = sample_decode(provider, prompt, config, spec, best_of_n_seed(seed, i));
        expansions += r.expansions;
        completed += r.completed;
        if (i == 0 || better_candidate(r.score, r.tokens, best.score, best.tokens)) best = std::move(r);
    }
    best.expansions = expansions;
    best.completed = completed;
    return best;
}

}  // namespace eden
