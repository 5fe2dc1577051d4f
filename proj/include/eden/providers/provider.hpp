#pragma once

#include <atomic>
#include <span>

#include "eden/distribution.hpp"
#include "eden/vocabulary.hpp"

namespace eden {

/// Source of next-token distributions. Implementations are read-only after
/// construction and may be shared across concurrent decode sessions.
class Provider {
public:
    virtual ~Provider() = default;

    virtual const Vocabulary& vocabulary() const = 0;

    /// Distribution over the token following `context` (prompt plus generated
    /// tokens). Throws InputError for invalid token ids and ProviderError for
    /// source failures.
    virtual TokenDistribution next_distribution(std::span<const TokenId> context) const = 0;
};

/// Applies temperature scaling to a full-support provider.
class TemperedProvider final : public Provider {
public:
    TemperedProvider(const Provider& base, double temperature) : base_(base), temperature_(temperature) {
        if (!(temperature > 0.0)) throw InputError("temperature must be positive");
    }

    const Vocabulary& vocabulary() const override { return base_.vocabulary(); }

    TokenDistribution next_distribution(std::span<const TokenId> context) const override {
        return apply_temperature(base_.next_distribution(context), temperature_);
    }

    double temperature() const noexcept { return temperature_; }

private:
    const Provider& base_;
    double temperature_;
};

/// Counts every call that reaches the wrapped provider.
class CountingProvider final : public Provider {
public:
    explicit CountingProvider(const Provider& base) : base_(base) {}

    const Vocabulary& vocabulary() const override { return base_.vocabulary(); }

    TokenDistribution next_distribution(std::span<const TokenId> context) const override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return base_.next_distribution(context);
    }

    std::size_t calls() const noexcept { return calls_.load(std::memory_order_relaxed); }
    void reset() noexcept { calls_.store(0, std::memory_order_relaxed); }

private:
    const Provider& base_;
    mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace eden
