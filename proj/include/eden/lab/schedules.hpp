#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "eden/error.hpp"

namespace eden::lab {

/// Continuous per-step budget floor shared by every schedule.
inline constexpr double kBudgetFloor = 1e-3;

using Schedule = std::vector<double>;

inline double schedule_total(const Schedule& m) {
    double s = 0.0;
    for (double x : m) s += x;
    return s;
}

inline void check_budget(std::size_t steps, double total, double floor) {
    if (steps == 0) throw InputError("schedule needs at least one step");
    if (!(total > static_cast<double>(steps) * floor))
        throw InputError("budget M must exceed T * m_floor");
}

inline Schedule fixed_schedule(std::size_t steps, double total, double floor = kBudgetFloor) {
    check_budget(steps, total, floor);
    return Schedule(steps, total / static_cast<double>(steps));
}

/// m_t proportional to the weight, with entries below the floor pinned to it
/// and the rest renormalized until no entry falls under.
inline Schedule proportional_schedule(const std::vector<double>& weights, double total, double floor = kBudgetFloor) {
    check_budget(weights.size(), total, floor);
    for (double w : weights)
        if (!(w >= 0.0) || std::isinf(w)) throw InputError("schedule weights must be finite and nonnegative");
    const std::size_t n = weights.size();
    std::vector<bool> pinned(n, false);
    Schedule m(n, 0.0);
    for (std::size_t round = 0; round <= n; ++round) {
        double free_weight = 0.0;
        std::size_t pinned_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pinned[i]) ++pinned_count;
            else free_weight += weights[i];
        }
        const double rest = total - floor * static_cast<double>(pinned_count);
        if (free_weight <= 0.0) {
            // Everything left has zero weight: split the remainder evenly.
            const double share = rest / static_cast<double>(n - pinned_count);
            for (std::size_t i = 0; i < n; ++i) m[i] = pinned[i] ? floor : share;
            return m;
        }
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = pinned[i] ? floor : rest * weights[i] / free_weight;
            if (!pinned[i] && m[i] < floor) {
                pinned[i] = true;
                changed = true;
            }
        }
        if (!changed) return m;
    }
    return m;
}

inline Schedule entropy_proportional_schedule(const std::vector<double>& entropies, double total,
                                              double floor = kBudgetFloor) {
    return proportional_schedule(entropies, total, floor);
}

/// Bound-minimization problem: minimize sum A_t exp(-kappa_t m_t) subject to
/// sum m_t = M and m_t >= floor.
struct AllocationProblem {
    std::vector<double> a;
    std::vector<double> kappa;
    double total = 1.0;
    double floor = kBudgetFloor;

    void validate() const {
        if (a.empty() || a.size() != kappa.size()) throw InputError("A and kappa must be non-empty and equally long");
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!(a[i] > 0.0) || !(kappa[i] > 0.0) || std::isinf(a[i]) || std::isinf(kappa[i]))
                throw InputError("A_t and kappa_t must be positive and finite");
        check_budget(a.size(), total, floor);
    }
};

inline double allocation_objective(const AllocationProblem& p, const Schedule& m) {
    if (m.size() != p.a.size()) throw InputError("schedule length does not match problem");
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += p.a[i] * std::exp(-p.kappa[i] * m[i]);
    return s;
}

struct KktSolution {
    Schedule m;
    double lambda = 0.0;
    int iterations = 0;
};

/// Stationarity gives m_t = log(A_t kappa_t / lambda) / kappa_t, clamped at
/// the floor; lambda is found by bisection in log space so the budget is
/// spent exactly.
inline KktSolution kkt_allocation(const AllocationProblem& p) {
    p.validate();
    const std::size_t n = p.a.size();
    std::vector<double> log_ak(n);
    double max_kappa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        log_ak[i] = std::log(p.a[i]) + std::log(p.kappa[i]);
        max_kappa = std::max(max_kappa, p.kappa[i]);
    }
    auto at = [&](double log_lambda, Schedule& m) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = std::max(p.floor, (log_ak[i] - log_lambda) / p.kappa[i]);
            s += m[i];
        }
        return s;
    };
    Schedule m(n);
    double lo = *std::min_element(log_ak.begin(), log_ak.end()) - p.total * max_kappa;
    double hi = *std::max_element(log_ak.begin(), log_ak.end());
    int expansions = 0;
    for (; at(lo, m) < p.total || at(hi, m) > p.total; ++expansions) {
        if (expansions == 64) {
            std::ostringstream msg;
            msg << "kkt bisection bracket failed: log lambda in [" << lo << ", " << hi << "], budget sums "
                << at(lo, m) << " / " << at(hi, m) << " vs M = " << p.total;
            throw NumericError(msg.str());
        }
        const double width = hi - lo + 1.0;
        if (at(lo, m) < p.total) lo -= width;
        if (at(hi, m) > p.total) hi += width;
    }
    KktSolution sol;
    for (; sol.iterations < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++sol.iterations) {
        const double mid = 0.5 * (lo + hi);
        if (at(mid, m) > p.total) lo = mid;
        else hi = mid;
    }
    // Spend the last sliver of budget along the stationarity direction
    // (dm_t / d log lambda = -1/kappa_t on unclamped steps).
    const double spent = at(hi, m);
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (m[i] > p.floor) slope += 1.0 / p.kappa[i];
    const double shift = slope > 0.0 ? (p.total - spent) / slope : 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (m[i] > p.floor) m[i] += shift / p.kappa[i];
    if (!(std::abs(schedule_total(m) - p.total) <= 1e-6 * std::max(1.0, p.total)))
        throw NumericError("kkt bisection did not converge to the budget");
    sol.lambda = std::exp(hi - shift);
    sol.m = std::move(m);
    return sol;
}

/// G * P_max * sum_t exp(-c m_t delta_min^2).
struct RegretBoundParams {
    double g = 1.0;
    double p_max = 1.0;
    double delta_min = 1.0;
    double c = 1.0;

    void validate() const {
        if (!(g > 0.0) || !(p_max > 0.0) || !(delta_min > 0.0) || !(c > 0.0))
            throw InputError("regret bound parameters must be positive");
    }
};

inline double regret_bound(const RegretBoundParams& params, const Schedule& m) {
    params.validate();
    // Neumaier summation: long horizons would otherwise drift by O(T^2 eps).
    double s = 0.0, comp = 0.0;
    for (double x : m) {
        if (!(x > 0.0)) throw InputError("regret bound needs a positive schedule");
        const double term = std::exp(-params.c * x * params.delta_min * params.delta_min);
        const double t = s + term;
        comp += std::abs(s) >= std::abs(term) ? (s - t) + term : (term - t) + s;
        s = t;
    }
    return params.g * params.p_max * (s + comp);
}

/// m_t = exponent / (c delta_min^2) * log T at every step.
inline Schedule logarithmic_schedule(std::size_t steps, double exponent, const RegretBoundParams& params) {
    params.validate();
    if (steps < 2) throw InputError("logarithmic schedule needs T >= 2");
    const double m = exponent / (params.c * params.delta_min * params.delta_min) * std::log(static_cast<double>(steps));
    return Schedule(steps, m);
}

/// (C / gap^2) (log s + log(1/delta)), before rounding up.
inline double selection_budget(std::size_t candidates, double delta, double eff_gap, double c_const) {
    if (candidates < 2) throw InputError("selection needs at least two candidates");
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("target error must lie in (0, 1)");
    if (!(eff_gap > 0.0)) throw InputError("effective gap must be positive");
    if (!(c_const > 0.0)) throw InputError("constant C must be positive");
    return c_const / (eff_gap * eff_gap) * (std::log(static_cast<double>(candidates)) + std::log(1.0 / delta));
}

inline double selection_sample_complexity(std::size_t candidates, double delta, double eff_gap, double c_const) {
    return std::ceil(selection_budget(candidates, delta, eff_gap, c_const));
}

}  // namespace eden::lab
