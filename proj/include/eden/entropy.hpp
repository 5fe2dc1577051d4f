#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "eden/distribution.hpp"
#include "eden/error.hpp"
#include "eden/random.hpp"

namespace eden {

inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Entropy in nats, normalized entropy H / log|V|, and perplexity exp(H).
struct EntropyReport {
    double entropy = 0.0;
    double normalized = 0.0;
    double perplexity = 1.0;
};

namespace detail {

// -sum p log p over the given entries with 0 log 0 = 0.
inline double partial_entropy(std::span<const TokenProb> entries) {
    double h = 0.0;
    for (const auto& e : entries)
        if (e.prob > 0.0) h -= e.prob * e.log_prob;
    return std::max(0.0, h);
}

inline double normalize_by(double h, std::size_t n) {
    if (n <= 1) return 0.0;
    return h / std::log(static_cast<double>(n));
}

}  // namespace detail

inline EntropyReport shannon_entropy(const TokenDistribution& dist) {
    if (!dist.is_full()) throw UnsupportedOperation("shannon_entropy requires a full distribution; use truncated_entropy");
    EntropyReport r;
    r.entropy = detail::partial_entropy(dist.support());
    r.normalized = detail::normalize_by(r.entropy, dist.support().size());
    r.perplexity = std::exp(r.entropy);
    return r;
}

/// Quantities from the top-1 and top-2 lemmas. Infinite sentinels mark the
/// cases p2 = 0, p1 = 1 and H = 0 where a log-ratio is unbounded.
struct LemmaBounds {
    double p1 = 0.0;
    double p1_lower = 0.0;      // e^{-H}
    double gap = 0.0;           // log p1 - log p2
    double gap_lower_p1 = 0.0;  // log(p1 / (1 - p1))
    double gap_lower_h = 0.0;   // log(e^{-H} / (1 - e^{-H}))
};

inline LemmaBounds lemma_bounds(const TokenDistribution& dist) {
    if (!dist.is_full()) throw UnsupportedOperation("lemma_bounds requires a full distribution");
    const auto& s = dist.support();
    if (s.size() < 2) throw InputError("lemma_bounds needs at least two tokens");
    const double h = shannon_entropy(dist).entropy;
    LemmaBounds b;
    b.p1 = s[0].prob;
    b.p1_lower = std::exp(-h);
    b.gap = s[1].prob > 0.0 ? s[0].log_prob - s[1].log_prob : kPosInf;
    b.gap_lower_p1 = s[0].prob < 1.0 ? s[0].log_prob - std::log1p(-s[0].prob) : kPosInf;
    b.gap_lower_h = h > 0.0 ? -h - std::log(-std::expm1(-h)) : kPosInf;
    return b;
}

struct TypicalSetQuery {
    double epsilon = 0.0;
    double threshold = 0.0;  // PP^{-1/epsilon}
    std::vector<TokenId> members;
    double mass = 0.0;
};

/// Tokens with p_i >= PP^{-1/epsilon}. Membership is decided in log space.
inline TypicalSetQuery typical_set(const TokenDistribution& dist, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0, 1)");
    const double h = shannon_entropy(dist).entropy;
    const double log_threshold = -h / epsilon;
    TypicalSetQuery q;
    q.epsilon = epsilon;
    q.threshold = std::exp(log_threshold);
    for (const auto& e : dist.support()) {
        if (e.prob > 0.0 && e.log_prob >= log_threshold) {
            q.members.push_back(e.token);
            q.mass += e.prob;
        }
    }
    return q;
}

enum class EstimatorMethod { PlugIn, MillerMadow };

struct EstimatorConfig {
    std::size_t samples = 1;
    EstimatorMethod method = EstimatorMethod::PlugIn;
    std::uint64_t seed = 0;
};

/// Entropy of the empirical frequencies of `samples`; Miller-Madow adds
/// (K - 1) / (2m) for K distinct observed tokens.
inline double estimate_entropy(std::span<const TokenId> samples, EstimatorMethod method = EstimatorMethod::PlugIn) {
    if (samples.empty()) throw InputError("entropy estimation needs at least one sample");
    std::map<TokenId, std::size_t> counts;
    for (TokenId t : samples) ++counts[t];
    const double m = static_cast<double>(samples.size());
    double h = 0.0;
    for (const auto& [token, c] : counts) {
        const double f = static_cast<double>(c) / m;
        h -= f * std::log(f);
    }
    h = std::max(0.0, h);
    if (method == EstimatorMethod::MillerMadow) h += (static_cast<double>(counts.size()) - 1.0) / (2.0 * m);
    return h;
}

inline std::vector<TokenId> draw_tokens(const TokenDistribution& dist, std::size_t m, Rng& rng) {
    std::vector<double> probs;
    probs.reserve(dist.support().size());
    for (const auto& e : dist.support()) probs.push_back(e.prob);
    std::vector<TokenId> out(m);
    for (auto& t : out) t = dist.support()[sample_index(probs, rng)].token;
    return out;
}

/// Draws config.samples tokens from a full distribution and estimates its entropy.
inline double estimate_entropy(const TokenDistribution& dist, const EstimatorConfig& config) {
    if (config.samples == 0) throw InputError("entropy estimation needs at least one sample");
    if (!dist.is_full()) throw UnsupportedOperation("sampling requires a full distribution");
    Rng rng = make_rng(config.seed);
    const auto draws = draw_tokens(dist, config.samples, rng);
    return estimate_entropy(draws, config.method);
}

struct TruncatedEntropy {
    double entropy = 0.0;     // partial sum over the support, unrenormalized
    double normalized = 0.0;  // by log|V| when known, else by log k
};

/// Partial-sum entropy over the listed support. Every omitted term is
/// nonnegative, so this never exceeds the entropy of a consistent full row.
inline TruncatedEntropy truncated_entropy(const TokenDistribution& dist) {
    if (dist.empty()) throw InputError("truncated entropy needs a non-empty support");
    TruncatedEntropy r;
    r.entropy = detail::partial_entropy(dist.support());
    const std::size_t n = dist.vocab_size().value_or(dist.truncation());
    r.normalized = std::min(1.0, detail::normalize_by(r.entropy, n));
    return r;
}

/// Entropy of the support renormalized to unit mass. Not used for branching.
inline double renormalized_truncated_entropy(const TokenDistribution& dist) {
    if (dist.empty()) throw InputError("truncated entropy needs a non-empty support");
    double mass = 0.0;
    for (const auto& e : dist.support()) mass += e.prob;
    if (!(mass > 0.0)) return 0.0;
    double h = 0.0;
    for (const auto& e : dist.support())
        if (e.prob > 0.0) h -= (e.prob / mass) * (e.log_prob - std::log(mass));
    return std::max(0.0, h);
}

struct DistributionDistances {
    double tv = 0.0;
    double kl_pq = 0.0;
    double kl_qp = 0.0;
    double kl_sym = 0.0;
};

namespace detail {

inline double kl(const std::vector<double>& lp, const std::vector<double>& lq) {
    double acc = 0.0;
    for (std::size_t i = 0; i < lp.size(); ++i) {
        if (lp[i] == kNegInf) continue;
        if (lq[i] == kNegInf) return kPosInf;
        acc += std::exp(lp[i]) * (lp[i] - lq[i]);
    }
    return std::max(0.0, acc);
}

}  // namespace detail

inline DistributionDistances distribution_distances(const TokenDistribution& p, const TokenDistribution& q) {
    if (!p.is_full() || !q.is_full()) throw UnsupportedOperation("distances require full distributions");
    if (p.vocab_size() != q.vocab_size()) throw InputError("distributions are over different vocabularies");
    const auto dp = p.dense(), dq = q.dense();
    const auto lp = p.dense_log(), lq = q.dense_log();
    DistributionDistances d;
    for (std::size_t i = 0; i < dp.size(); ++i) d.tv += std::abs(dp[i] - dq[i]);
    d.tv *= 0.5;
    d.kl_pq = detail::kl(lp, lq);
    d.kl_qp = detail::kl(lq, lp);
    d.kl_sym = d.kl_pq + d.kl_qp;
    return d;
}

/// Diagnostic for the entropy-stability chain |dH| vs symmetric KL vs TV.
/// Reported only; no inequality between these is asserted.
struct EntropyStability {
    double entropy_change = 0.0;
    double kl_sym = 0.0;
    double tv = 0.0;
};

inline EntropyStability entropy_stability(const TokenDistribution& p, const TokenDistribution& q) {
    const auto d = distribution_distances(p, q);
    return {std::abs(shannon_entropy(p).entropy - shannon_entropy(q).entropy), d.kl_sym, d.tv};
}

}  // namespace eden
