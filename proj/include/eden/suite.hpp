#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eden/providers/table_model.hpp"
#include "eden/random.hpp"

namespace eden {

/// Vocabulary t0 .. t{n-2} followed by <eos>.
inline Vocabulary synthetic_vocabulary(std::size_t size) {
    if (size < 2) throw InputError("synthetic vocabulary needs at least two tokens");
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i + 1 < size; ++i) tokens.push_back("t" + std::to_string(i));
    tokens.emplace_back(kDefaultEos);
    return Vocabulary(tokens, kDefaultEos);
}

inline std::uint64_t hash_context(std::uint64_t seed, std::span<const TokenId> context) {
    std::uint64_t h = 1469598103934665603ULL ^ mix_seed(seed, context.size());
    for (TokenId t : context) {
        h ^= static_cast<std::uint64_t>(t) + 1;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Every context gets its own symmetric-Dirichlet row, drawn from a stream
/// keyed by (seed, context). The concentration is log-uniform in
/// [min_concentration, max_concentration] per row, so one model mixes peaked
/// and flat steps. Stateless, so it behaves like an infinite table.
class RandomProvider final : public Provider {
public:
    RandomProvider(std::size_t vocab_size, std::uint64_t seed, double min_concentration, double max_concentration)
        : vocab_(synthetic_vocabulary(vocab_size)), seed_(seed), min_c_(min_concentration), max_c_(max_concentration) {
        if (!(min_c_ > 0.0) || !(max_c_ >= min_c_) || std::isinf(max_c_))
            throw InputError("concentration range must satisfy 0 < min <= max < inf");
    }

    const Vocabulary& vocabulary() const override { return vocab_; }

    TokenDistribution next_distribution(std::span<const TokenId> context) const override {
        vocab_.check(context);
        Rng rng(hash_context(seed_, context));
        const double u = uniform01(rng);
        const double c = min_c_ == max_c_ ? min_c_ : std::exp(std::log(min_c_) + u * (std::log(max_c_) - std::log(min_c_)));
        const auto probs = sample_dirichlet(vocab_.size(), c, rng);
        return TokenDistribution::from_probabilities(probs, true);
    }

private:
    Vocabulary vocab_;
    std::uint64_t seed_;
    double min_c_;
    double max_c_;
};

/// Table holding the provider's rows for every EOS-free context of length < T.
inline TableModel materialize(const Provider& provider, std::size_t max_length) {
    const auto& vocab = provider.vocabulary();
    std::map<TokenSequence, TokenDistribution> rows;
    std::vector<TokenSequence> frontier{TokenSequence{}};
    for (std::size_t depth = 0; depth < max_length; ++depth) {
        std::vector<TokenSequence> next;
        for (const auto& ctx : frontier) {
            rows.emplace(ctx, provider.next_distribution(ctx));
            if (depth + 1 == max_length) continue;
            for (TokenId t = 0; t < vocab.size(); ++t) {
                if (t == vocab.eos()) continue;
                auto child = ctx;
                child.push_back(t);
                next.push_back(std::move(child));
            }
        }
        frontier = std::move(next);
    }
    return TableModel(vocab, std::move(rows));
}

/// A family of random models sharing vocabulary size and entropy profile;
/// model i is keyed by mix_seed(seed, i).
struct SuiteSpec {
    std::size_t models = 200;
    std::size_t vocab_size = 12;
    double min_concentration = 0.05;
    double max_concentration = 20.0;
    std::uint64_t seed = 0;
};

inline std::vector<RandomProvider> make_suite(const SuiteSpec& spec) {
    std::vector<RandomProvider> out;
    out.reserve(spec.models);
    for (std::size_t i = 0; i < spec.models; ++i)
        out.emplace_back(spec.vocab_size, mix_seed(spec.seed, i), spec.min_concentration, spec.max_concentration);
    return out;
}

}  // namespace eden
