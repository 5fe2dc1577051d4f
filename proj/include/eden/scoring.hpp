#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "eden/distribution.hpp"
#include "eden/error.hpp"
#include "eden/vocabulary.hpp"

namespace eden {

/// Per-step bonus rho_t in [0, 1] for appending `token` after `prefix`
/// (generated tokens only, prompt excluded).
using BonusFn = std::function<double(std::span<const TokenId> prefix, TokenId token)>;

struct ScoreConfig {
    double alpha = 1.0;          // length-penalty exponent
    std::size_t max_length = 400;  // T
    std::size_t vocab_size = 2;    // |V|, drives the pessimistic bound
    double lambda_bonus = 0.0;
    BonusFn bonus;

    void validate() const {
        if (!(alpha >= 0.0) || std::isinf(alpha)) throw InputError("alpha must be a finite value >= 0");
        if (max_length < 1) throw InputError("max length T must be at least 1");
        if (vocab_size < 2) throw InputError("vocabulary size must be at least 2");
        if (!(lambda_bonus >= 0.0)) throw InputError("bonus weight must be >= 0");
        if (lambda_bonus > 0.0 && !bonus) throw InputError("bonus weight set without a bonus source");
    }
};

/// A generated continuation y_{1:t}: cumulative log-probability s, summed
/// bonus R, and whether it has terminated (EOS or t = T).
struct SequenceState {
    TokenSequence tokens;
    double log_prob = 0.0;
    double bonus = 0.0;
    bool finished = false;

    std::size_t length() const noexcept { return tokens.size(); }
};

struct BoundPair {
    double upper = 0.0;
    double lower = 0.0;
};

enum class PruneDecision { Keep, Prune };

namespace detail {

inline double length_norm(std::size_t t, double alpha) {
    return alpha == 0.0 ? 1.0 : std::pow(static_cast<double>(t), alpha);
}

}  // namespace detail

/// s / t^alpha, with lambda * R folded into the numerator when a bonus is active.
inline double normalized_score(const SequenceState& state, const ScoreConfig& config) {
    const std::size_t t = state.length();
    if (t == 0) throw InputError("normalized score undefined for an empty sequence");
    const double numerator = config.lambda_bonus > 0.0 ? state.log_prob + config.lambda_bonus * state.bonus
                                                       : state.log_prob;
    return numerator / detail::length_norm(t, config.alpha);
}

/// Optimistic and pessimistic normalized scores over all completions.
/// Completed states (or t = T) collapse to their exact score. Open states
/// assume every remaining token has probability 1 (upper) or 1/|V| (lower)
/// and are normalized at the full horizon T.
inline BoundPair bounds(const SequenceState& state, const ScoreConfig& config) {
    const std::size_t t = state.length();
    const std::size_t horizon = config.max_length;
    if (t == 0) throw InputError("bounds undefined for an empty sequence");
    if (t > horizon) throw InputError("sequence longer than the maximum length");
    if (state.finished || t == horizon) {
        const double score = normalized_score(state, config);
        return {score, score};
    }
    const double remaining = static_cast<double>(horizon - t);
    const double norm_t = detail::length_norm(horizon, config.alpha);
    const double lower_numerator = state.log_prob + remaining * std::log(1.0 / static_cast<double>(config.vocab_size));
    if (config.lambda_bonus == 0.0) {
        return {state.log_prob / norm_t, lower_numerator / norm_t};
    }
    // Future bonus at its cap. The numerator may be positive here, so the
    // optimum over completion lengths t' in (t, T] is taken explicitly.
    const double base = state.log_prob + config.lambda_bonus * state.bonus;
    double upper = (base + config.lambda_bonus * remaining) / norm_t;
    for (std::size_t tp = t + 1; tp < horizon; ++tp) {
        const double numerator = base + config.lambda_bonus * static_cast<double>(tp - t);
        upper = std::max(upper, numerator / detail::length_norm(tp, config.alpha));
    }
    const double lower = (lower_numerator + config.lambda_bonus * state.bonus) / norm_t;
    return {upper, std::min(lower, upper)};
}

/// Prune iff the optimistic bound falls strictly below the running best lower bound.
inline PruneDecision prune_decision(const BoundPair& bound, double s_star) noexcept {
    return bound.upper < s_star ? PruneDecision::Prune : PruneDecision::Keep;
}

/// Append `token` with log-probability `log_prob` to `parent`.
inline SequenceState extend(const SequenceState& parent, TokenId token, double log_prob, TokenId eos,
                            const ScoreConfig& config) {
    SequenceState child;
    child.tokens.reserve(parent.tokens.size() + 1);
    child.tokens = parent.tokens;
    child.log_prob = parent.log_prob + log_prob;
    child.bonus = parent.bonus;
    if (config.lambda_bonus > 0.0) {
        const double rho = config.bonus(parent.tokens, token);
        if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("bonus must lie in [0, 1], got " + std::to_string(rho));
        child.bonus += rho;
    }
    child.tokens.push_back(token);
    child.finished = token == eos || child.tokens.size() >= config.max_length;
    return child;
}

}  // namespace eden
