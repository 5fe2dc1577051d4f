#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eden/error.hpp"
#include "eden/vocabulary.hpp"

namespace eden {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kProbabilityTolerance = 1e-9;

/// log(sum(exp(x))) with max-shift; returns -inf for an all -inf input.
inline double log_sum_exp(std::span<const double> xs) {
    double hi = kNegInf;
    for (double x : xs) hi = std::max(hi, x);
    if (hi == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

struct TokenProb {
    TokenId token = 0;
    double prob = 0.0;
    double log_prob = kNegInf;

    friend bool operator==(const TokenProb&, const TokenProb&) = default;
};

enum class SupportKind { Full, Truncated };

/// Categorical next-token distribution. The support is ordered by probability
/// descending with ties broken by token index ascending; search relies on it.
///
/// A full distribution lists every vocabulary token (zeros included) and sums
/// to one. A truncated one carries at most k entries plus an explicit tail
/// mass that is never redistributed onto invented tokens.
class TokenDistribution {
public:
    TokenDistribution() = default;

    /// Full distribution from unnormalized log weights indexed by token id.
    static TokenDistribution from_log_weights(std::span<const double> log_weights) {
        if (log_weights.size() < 2) throw InputError("distribution needs at least two tokens");
        for (double w : log_weights) {
            if (std::isnan(w) || w == std::numeric_limits<double>::infinity())
                throw InputError("log weight must be finite or -inf");
        }
        const double z = log_sum_exp(log_weights);
        if (z == kNegInf) throw InputError("distribution has no positive mass");
        TokenDistribution d;
        d.kind_ = SupportKind::Full;
        d.vocab_size_ = log_weights.size();
        d.support_.reserve(log_weights.size());
        for (std::size_t i = 0; i < log_weights.size(); ++i) {
            const double lp = log_weights[i] == kNegInf ? kNegInf : log_weights[i] - z;
            d.support_.push_back({static_cast<TokenId>(i), std::exp(lp), lp});
        }
        d.sort_support();
        return d;
    }

    /// Full distribution from probabilities indexed by token id. The sum must
    /// already be one within tolerance unless `renormalize` is set.
    static TokenDistribution from_probabilities(std::span<const double> probs, bool renormalize = false,
                                                double tolerance = kProbabilityTolerance) {
        double total = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0) || std::isinf(p)) throw InputError("probabilities must be finite and nonnegative");
            total += p;
        }
        if (!renormalize && std::abs(total - 1.0) > tolerance)
            throw InputError("probabilities sum to " + std::to_string(total) + ", expected 1");
        std::vector<double> logs(probs.size());
        std::transform(probs.begin(), probs.end(), logs.begin(),
                       [](double p) { return p > 0.0 ? std::log(p) : kNegInf; });
        return from_log_weights(logs);
    }

    /// Top-k view over an unknown full distribution. Entries are (token, log
    /// probability); the remainder of the unit mass becomes tail_mass.
    static TokenDistribution truncated(std::vector<std::pair<TokenId, double>> entries, std::size_t k,
                                       std::optional<std::size_t> vocab_size = std::nullopt) {
        if (k == 0) throw InputError("truncation level k must be at least 1");
        if (entries.size() > k) throw InputError("truncated support larger than k");
        TokenDistribution d;
        d.kind_ = SupportKind::Truncated;
        d.k_ = k;
        d.vocab_size_ = vocab_size.value_or(0);
        double mass = 0.0;
        for (auto [token, lp] : entries) {
            if (std::isnan(lp) || lp > 1e-12) throw InputError("log probability must be <= 0");
            lp = std::min(lp, 0.0);
            if (vocab_size && token >= *vocab_size) throw InputError("token index out of range");
            for (const auto& e : d.support_)
                if (e.token == token) throw InputError("duplicate token in truncated support");
            d.support_.push_back({token, std::exp(lp), lp});
            mass += std::exp(lp);
        }
        if (mass > 1.0 + 1e-6) throw InputError("truncated support mass exceeds one");
        d.tail_mass_ = std::max(0.0, 1.0 - mass);
        d.sort_support();
        return d;
    }

    SupportKind kind() const noexcept { return kind_; }
    bool is_full() const noexcept { return kind_ == SupportKind::Full; }
    /// k for truncated distributions, support size for full ones.
    std::size_t truncation() const noexcept { return is_full() ? support_.size() : k_; }
    double tail_mass() const noexcept { return tail_mass_; }
    /// Vocabulary size when known (always for full distributions).
    std::optional<std::size_t> vocab_size() const noexcept {
        if (vocab_size_ == 0) return std::nullopt;
        return vocab_size_;
    }
    const std::vector<TokenProb>& support() const noexcept { return support_; }
    bool empty() const noexcept { return support_.empty(); }
    const TokenProb& head() const {
        if (support_.empty()) throw InputError("empty support");
        return support_.front();
    }

    double probability(TokenId token) const noexcept {
        for (const auto& e : support_)
            if (e.token == token) return e.prob;
        return 0.0;
    }

    double log_probability(TokenId token) const noexcept {
        for (const auto& e : support_)
            if (e.token == token) return e.log_prob;
        return kNegInf;
    }

    /// Probabilities indexed by token id (full distributions only).
    std::vector<double> dense() const {
        if (!is_full()) throw UnsupportedOperation("dense view requires a full distribution");
        std::vector<double> out(vocab_size_, 0.0);
        for (const auto& e : support_) out[e.token] = e.prob;
        return out;
    }

    std::vector<double> dense_log() const {
        if (!is_full()) throw UnsupportedOperation("dense view requires a full distribution");
        std::vector<double> out(vocab_size_, kNegInf);
        for (const auto& e : support_) out[e.token] = e.log_prob;
        return out;
    }

    friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;

private:
    void sort_support() {
        std::sort(support_.begin(), support_.end(), [](const TokenProb& a, const TokenProb& b) {
            if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
            return a.token < b.token;
        });
    }

    SupportKind kind_ = SupportKind::Full;
    std::size_t k_ = 0;
    std::size_t vocab_size_ = 0;
    double tail_mass_ = 0.0;
    std::vector<TokenProb> support_;
};

/// P_i^(1/T) / sum_j P_j^(1/T), computed in log space.
inline TokenDistribution apply_temperature(const TokenDistribution& dist, double temperature) {
    if (!(temperature > 0.0) || std::isinf(temperature)) throw InputError("temperature must be positive and finite");
    if (!dist.is_full()) throw UnsupportedOperation("temperature scaling requires a full distribution");
    if (temperature == 1.0) return dist;
    std::vector<double> logs = dist.dense_log();
    for (double& lp : logs)
        if (lp != kNegInf) lp /= temperature;
    return TokenDistribution::from_log_weights(logs);
}

}  // namespace eden
