#pragma once

#include <algorithm>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "eden/lab/experiments.hpp"
#include "eden/search/decoder.hpp"

namespace eden {

/// One (provider, prompt) pair of a benchmark.
struct BenchItem {
    const Provider* provider = nullptr;
    TokenSequence prompt;
};

struct BenchRow {
    std::string decoder;
    std::optional<double> param;  // B_max, width, k, p or n; none for greedy/oracle
    double mean_score = 0.0;
    double mean_expansions = 0.0;
    std::size_t prompts = 0;
    double total_expansions = 0.0;
};

/// The swept parameter of a decoder spec, if it has one.
inline std::optional<double> swept_param(const DecoderSpec& spec) {
    switch (spec.kind) {
        case DecoderKind::Eden: return static_cast<double>(spec.eden.policy.b_max);
        case DecoderKind::Beam: return static_cast<double>(spec.width);
        case DecoderKind::TopK: return static_cast<double>(spec.k);
        case DecoderKind::TopP: return spec.p;
        case DecoderKind::MinP: return spec.min_p;
        case DecoderKind::BestOfN: return static_cast<double>(spec.n);
        case DecoderKind::Greedy:
        case DecoderKind::Oracle: return std::nullopt;
    }
    return std::nullopt;
}

/// Runs every spec over every item. Items are split across `threads`
/// workers; per-item results land in input order, so the output does not
/// depend on the thread count.
inline std::vector<BenchRow> run_bench(const std::vector<BenchItem>& items, const std::vector<DecoderSpec>& specs,
                                       const ScoreConfig& config, unsigned threads = 1) {
    std::vector<BenchRow> rows;
    for (const auto& spec : specs) {
        spec.validate();
        std::vector<DecodeResult> results(items.size());
        auto work = [&](std::size_t begin, std::size_t stride) {
            for (std::size_t i = begin; i < items.size(); i += stride)
                results[i] = decode(*items[i].provider, items[i].prompt, config, spec);
        };
        const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(items.size())));
        if (n == 1) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(n);
            for (unsigned w = 0; w < n; ++w)
                pool.emplace_back([&, w] {
                    try {
                        work(w, n);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            for (auto& t : pool) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        BenchRow row;
        row.decoder = decoder_name(spec.kind);
        row.param = swept_param(spec);
        row.prompts = items.size();
        for (const auto& r : results) {
            row.mean_score += r.score;
            row.total_expansions += static_cast<double>(r.expansions);
        }
        if (!items.empty()) {
            row.mean_score /= static_cast<double>(items.size());
            row.mean_expansions = row.total_expansions / static_cast<double>(items.size());
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
        if (a.decoder != b.decoder) return a.decoder < b.decoder;
        return a.param.value_or(0.0) < b.param.value_or(0.0);
    });
    return rows;
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
    os << "decoder,param,mean_normalized_score,mean_expansions,n_prompts\n";
    for (const auto& r : rows)
        os << r.decoder << ',' << (r.param ? lab::format_number(*r.param) : std::string()) << ','
           << lab::format_number(r.mean_score) << ',' << lab::format_number(r.mean_expansions) << ',' << r.prompts
           << '\n';
}

}  // namespace eden
