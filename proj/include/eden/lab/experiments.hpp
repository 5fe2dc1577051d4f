#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "eden/branching.hpp"
#include "eden/lab/simulation.hpp"

namespace eden::lab {

// Shortest round-trip decimal form; independent of the global locale.
inline std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Regret sweep: for each variance level, `seeds` independent step
/// lists; each policy's regret is averaged over `trials` noise draws per list.
struct RegretExperiment {
    std::size_t steps = 50;
    double total = 500.0;
    std::size_t seeds = 200;
    std::size_t trials = 50;
    std::uint64_t seed = 0;
    NoiseModel noise{0.01};
    std::vector<EntropySpec> levels = default_levels();
    std::vector<BudgetKind> policies{BudgetKind::Fixed, BudgetKind::EntropyProportional, BudgetKind::KktOptimal};

    /// Zero variance (one distribution reused), then widening log-uniform
    /// concentration ranges.
    static std::vector<EntropySpec> default_levels() {
        return {{10, 1.0, 1.0, true}, {10, 0.5, 2.0, false}, {10, 0.2, 5.0, false},
                {10, 0.1, 10.0, false}, {10, 0.05, 20.0, false}};
    }

    void validate() const {
        noise.validate();
        if (steps < 1 || seeds < 1 || trials < 1) throw InputError("T, seeds and trials must be at least 1");
        check_budget(steps, total, kBudgetFloor);
        for (const auto& l : levels) l.validate();
    }
};

struct PolicyRegret {
    BudgetKind kind;
    std::vector<double> per_seed;  // mean regret of each step list
    Estimate summary;
};

struct LevelResult {
    std::size_t level = 0;
    double variance = 0.0;  // mean empirical Var(H_t) over seeds
    std::vector<PolicyRegret> policies;

    const PolicyRegret& policy(BudgetKind kind) const {
        for (const auto& p : policies)
            if (p.kind == kind) return p;
        throw InputError("policy not simulated: " + budget_name(kind));
    }
};

/// Standard error of the per-seed difference a - b (same step lists, same
/// noise streams).
inline Estimate paired_difference(const PolicyRegret& a, const PolicyRegret& b) {
    std::vector<double> d(a.per_seed.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.per_seed[i] - b.per_seed[i];
    return summarize(d);
}

inline LevelResult run_regret_level(const RegretExperiment& ex, std::size_t level) {
    const EntropySpec& spec = ex.levels.at(level);
    LevelResult out;
    out.level = level;
    for (BudgetKind k : ex.policies) out.policies.push_back({k, {}, {}});
    for (std::size_t s = 0; s < ex.seeds; ++s) {
        const std::uint64_t list_seed = mix_seed(mix_seed(ex.seed, level), 2 * s);
        const std::uint64_t noise_seed = mix_seed(mix_seed(ex.seed, level), 2 * s + 1);
        const auto instances = generate_instances(ex.steps, spec, list_seed);
        out.variance += entropy_variance(instances);
        for (auto& p : out.policies) {
            const BudgetPolicy policy{p.kind, ex.total, kBudgetFloor};
            p.per_seed.push_back(simulate_regret(instances, policy, ex.noise, ex.trials, noise_seed).regret.mean);
        }
    }
    out.variance /= static_cast<double>(ex.seeds);
    for (auto& p : out.policies) p.summary = summarize(p.per_seed);
    return out;
}

inline std::vector<LevelResult> run_regret_experiment(const RegretExperiment& ex) {
    ex.validate();
    std::vector<LevelResult> out;
    for (std::size_t l = 0; l < ex.levels.size(); ++l) out.push_back(run_regret_level(ex, l));
    return out;
}

inline void write_regret_csv(std::ostream& os, const RegretExperiment& ex, const std::vector<LevelResult>& levels) {
    os << "variance_level,policy,mean_regret,stderr,M,T,seed_count\n";
    for (const auto& l : levels)
        for (const auto& p : l.policies)
            os << format_number(l.variance) << ',' << budget_name(p.kind) << ',' << format_number(p.summary.mean) << ','
               << format_number(p.summary.std_error) << ',' << format_number(ex.total) << ',' << ex.steps << ','
               << ex.seeds << '\n';
}

struct MistakePoint {
    double m = 0.0;
    Estimate rate;
};

inline std::vector<MistakePoint> mistake_curve(const StepInstance& instance, const std::vector<double>& budgets,
                                               const NoiseModel& noise, std::size_t trials, std::uint64_t seed) {
    std::vector<MistakePoint> out;
    for (double m : budgets) out.push_back({m, mistake_probability(instance, m, noise, trials, seed)});
    return out;
}

inline void write_mistake_csv(std::ostream& os, const std::vector<MistakePoint>& curve) {
    os << "m,mistake_rate,stderr\n";
    for (const auto& p : curve)
        os << format_number(p.m) << ',' << format_number(p.rate.mean) << ',' << format_number(p.rate.std_error) << '\n';
}

/// Estimation sweep: every seed draws a Dirichlet distribution and m samples
/// from it; the error is the estimate minus the exact entropy.
struct EstimationExperiment {
    std::size_t vocab_size = 100;
    double concentration = 1.0;
    bool point_mass = false;
    std::vector<std::size_t> grid{10, 100, 1000, 10000};
    std::size_t seeds = 200;
    std::uint64_t seed = 0;
    EstimatorMethod method = EstimatorMethod::PlugIn;

    void validate() const {
        if (vocab_size < 2) throw InputError("vocabulary must have at least two tokens");
        if (!(concentration > 0.0) || std::isinf(concentration)) throw InputError("concentration must be positive");
        if (grid.empty() || seeds < 1) throw InputError("sample grid and seed count must be non-empty");
        for (std::size_t m : grid)
            if (m < 1) throw InputError("sample counts must be at least 1");
    }

    TokenDistribution distribution(std::size_t s) const {
        if (point_mass) {
            std::vector<double> p(vocab_size, 0.0);
            p[s % vocab_size] = 1.0;
            return TokenDistribution::from_probabilities(p);
        }
        Rng rng = make_rng(mix_seed(seed, s), 0);
        return TokenDistribution::from_probabilities(sample_dirichlet(vocab_size, concentration, rng), true);
    }
};

struct EstimationSample {
    double truth = 0.0;
    double estimate = 0.0;
};

struct EstimationPoint {
    std::size_t m = 0;
    double rmse = 0.0;
    double std_error = 0.0;
    std::vector<EstimationSample> samples;
};

inline std::vector<EstimationPoint> run_estimation_experiment(const EstimationExperiment& ex) {
    ex.validate();
    std::vector<TokenDistribution> dists;
    std::vector<double> truth;
    for (std::size_t s = 0; s < ex.seeds; ++s) {
        dists.push_back(ex.distribution(s));
        truth.push_back(shannon_entropy(dists.back()).entropy);
    }
    std::vector<EstimationPoint> out;
    for (std::size_t gi = 0; gi < ex.grid.size(); ++gi) {
        EstimationPoint pt;
        pt.m = ex.grid[gi];
        std::vector<double> sq;
        for (std::size_t s = 0; s < ex.seeds; ++s) {
            const double h = estimate_entropy(dists[s], {pt.m, ex.method, mix_seed(mix_seed(ex.seed, s), gi + 1)});
            pt.samples.push_back({truth[s], h});
            sq.push_back((h - truth[s]) * (h - truth[s]));
        }
        const Estimate mse = summarize(sq);
        pt.rmse = std::sqrt(mse.mean);
        // Delta method: se(sqrt(x)) = se(x) / (2 sqrt(x)).
        pt.std_error = pt.rmse > 0.0 ? mse.std_error / (2.0 * pt.rmse) : 0.0;
        out.push_back(std::move(pt));
    }
    return out;
}

inline void write_estimation_csv(std::ostream& os, const std::vector<EstimationPoint>& points) {
    const double t5 = entropy_tolerance(BranchingPolicy{5});
    const double t10 = entropy_tolerance(BranchingPolicy{10});
    os << "m,rmse,stderr,threshold_bmax5,threshold_bmax10\n";
    for (const auto& p : points)
        os << p.m << ',' << format_number(p.rmse) << ',' << format_number(p.std_error) << ',' << format_number(t5)
           << ',' << format_number(t10) << '\n';
}

}  // namespace eden::lab
