#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "eden/lab/instances.hpp"
#include "eden/lab/schedules.hpp"

namespace eden::lab {

/// Gaussian estimation noise with variance delta_sq / m.
struct NoiseModel {
    double delta_sq = 1.0;

    void validate() const {
        if (!(delta_sq > 0.0) || std::isinf(delta_sq)) throw InputError("noise variance proxy must be positive");
    }
    /// Exponent constant matched to a Gaussian tail: 1 / (2 delta^2).
    double c() const { return 1.0 / (2.0 * delta_sq); }
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

inline Estimate summarize(const std::vector<double>& xs) {
    Estimate e;
    e.trials = xs.size();
    if (xs.empty()) return e;
    for (double x : xs) e.mean += x;
    e.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - e.mean) * (x - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return e;
}

namespace detail {

// argmax_i (values_i + sigma * z_i); ties (measure zero) go to the lower index.
inline std::size_t noisy_argmax(const std::vector<double>& values, double sigma, Rng& rng,
                                std::normal_distribution<double>& normal) {
    std::size_t best = 0;
    double best_v = kNegInf;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i] + sigma * normal(rng);
        if (i == 0 || v > best_v) {
            best = i;
            best_v = v;
        }
    }
    return best;
}

}  // namespace detail

/// Frequency with which the noisy argmax misses i*. Trial j draws from its
/// own (seed, j) stream.
inline Estimate mistake_probability(const StepInstance& instance, double m, const NoiseModel& noise,
                                    std::size_t trials, std::uint64_t seed) {
    noise.validate();
    if (!(m > 0.0)) throw InputError("budget m must be positive");
    if (trials < 1) throw InputError("trials must be at least 1");
    const double sigma = std::sqrt(noise.delta_sq / m);
    std::size_t misses = 0;
    for (std::size_t j = 0; j < trials; ++j) {
        Rng rng = make_rng(seed, j);
        std::normal_distribution<double> normal;
        if (detail::noisy_argmax(instance.values, sigma, rng, normal) != instance.i_star) ++misses;
    }
    Estimate e;
    e.trials = trials;
    e.mean = static_cast<double>(misses) / static_cast<double>(trials);
    e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
    return e;
}

enum class BudgetKind { Fixed, EntropyProportional, KktOptimal };

inline std::string budget_name(BudgetKind kind) {
    switch (kind) {
        case BudgetKind::Fixed: return "fixed";
        case BudgetKind::EntropyProportional: return "entropy_proportional";
        case BudgetKind::KktOptimal: return "kkt_optimal";
    }
    return "unknown";
}

struct BudgetPolicy {
    BudgetKind kind = BudgetKind::Fixed;
    double total = 1.0;
    double floor = kBudgetFloor;
};

/// KKT problem for a step list: A_t = PP_t, kappa_t = c * gap_t^2.
inline AllocationProblem allocation_problem(const std::vector<StepInstance>& instances, const BudgetPolicy& policy,
                                            const NoiseModel& noise) {
    AllocationProblem p;
    p.total = policy.total;
    p.floor = policy.floor;
    for (const auto& s : instances) {
        p.a.push_back(std::exp(s.entropy));
        p.kappa.push_back(noise.c() * s.eff_gap * s.eff_gap);
    }
    return p;
}

inline Schedule make_schedule(const std::vector<StepInstance>& instances, const BudgetPolicy& policy,
                              const NoiseModel& noise) {
    switch (policy.kind) {
        case BudgetKind::Fixed:
            return fixed_schedule(instances.size(), policy.total, policy.floor);
        case BudgetKind::EntropyProportional: {
            std::vector<double> h;
            for (const auto& s : instances) h.push_back(s.entropy);
            return entropy_proportional_schedule(h, policy.total, policy.floor);
        }
        case BudgetKind::KktOptimal:
            return kkt_allocation(allocation_problem(instances, policy, noise)).m;
    }
    throw InputError("unknown budget policy");
}

struct RegretEstimate {
    Estimate regret;
    Schedule schedule;
};

/// Cumulative regret sum_t gap_t(choice_t). Each trial walks all steps on
/// its own (seed, trial) stream, so policies run with the same seed see the
/// same standard-normal draws.
inline RegretEstimate simulate_regret(const std::vector<StepInstance>& instances, const Schedule& schedule,
                                      const NoiseModel& noise, std::size_t trials, std::uint64_t seed) {
    noise.validate();
    if (trials < 1) throw InputError("trials must be at least 1");
    if (schedule.size() != instances.size()) throw InputError("schedule length does not match instances");
    std::vector<double> sigma(schedule.size());
    for (std::size_t t = 0; t < schedule.size(); ++t) {
        if (!(schedule[t] > 0.0)) throw InputError("schedule entries must be positive");
        sigma[t] = std::sqrt(noise.delta_sq / schedule[t]);
    }
    std::vector<double> totals(trials, 0.0);
    for (std::size_t j = 0; j < trials; ++j) {
        Rng rng = make_rng(seed, j);
        std::normal_distribution<double> normal;
        for (std::size_t t = 0; t < instances.size(); ++t) {
            const auto& s = instances[t];
            totals[j] += s.gaps[detail::noisy_argmax(s.values, sigma[t], rng, normal)];
        }
    }
    return {summarize(totals), schedule};
}

inline RegretEstimate simulate_regret(const std::vector<StepInstance>& instances, const BudgetPolicy& policy,
                                      const NoiseModel& noise, std::size_t trials, std::uint64_t seed) {
    return simulate_regret(instances, make_schedule(instances, policy, noise), noise, trials, seed);
}

}  // namespace eden::lab
