#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "eden/search/beam.hpp"
#include "eden/search/eden.hpp"
#include "eden/search/greedy.hpp"
#include "eden/search/oracle.hpp"
#include "eden/search/sampling.hpp"

namespace eden {

enum class DecoderKind { Eden, Greedy, Beam, TopK, TopP, MinP, BestOfN, Oracle };

struct DecoderSpec {
    DecoderKind kind = DecoderKind::Eden;
    std::size_t width = 3;  // beam width
    std::size_t k = 10;     // top-k
    double p = 0.9;         // top-p
    double min_p = 0.1;
    std::size_t n = 5;      // best-of-n
    std::uint64_t seed = 0;
    EdenOptions eden;

    void validate() const {
        if (width < 1 || k < 1 || n < 1) throw InputError("width, k and n must be at least 1");
        if (!(p > 0.0 && p <= 1.0) || !(min_p > 0.0 && min_p <= 1.0)) throw InputError("p must lie in (0, 1]");
        eden.policy.validate();
    }
};

inline DecoderKind parse_decoder_kind(const std::string& name) {
    if (name == "eden") return DecoderKind::Eden;
    if (name == "greedy") return DecoderKind::Greedy;
    if (name == "beam") return DecoderKind::Beam;
    if (name == "top_k" || name == "top-k") return DecoderKind::TopK;
    if (name == "top_p" || name == "top-p") return DecoderKind::TopP;
    if (name == "min_p" || name == "min-p") return DecoderKind::MinP;
    if (name == "best_of_n" || name == "best-of-n") return DecoderKind::BestOfN;
    if (name == "oracle") return DecoderKind::Oracle;
    throw InputError("unknown decoder '" + name + "'");
}

inline std::string decoder_name(DecoderKind kind) {
    switch (kind) {
        case DecoderKind::Eden: return "eden";
        case DecoderKind::Greedy: return "greedy";
        case DecoderKind::Beam: return "beam";
        case DecoderKind::TopK: return "top_k";
        case DecoderKind::TopP: return "top_p";
        case DecoderKind::MinP: return "min_p";
        case DecoderKind::BestOfN: return "best_of_n";
        case DecoderKind::Oracle: return "oracle";
    }
    return "unknown";
}

inline DecodeResult decode(const Provider& provider, std::span<const TokenId> prompt, const ScoreConfig& config,
                           const DecoderSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case DecoderKind::Eden:
            return eden_decode(provider, prompt, config, spec.eden);
        case DecoderKind::Greedy:
            return greedy_decode(provider, prompt, config);
        case DecoderKind::Beam:
            return beam_decode(provider, prompt, config, spec.width);
        case DecoderKind::TopK:
            return sample_decode(provider, prompt, config, {SamplingKind::TopK, spec.k, 1.0}, spec.seed);
        case DecoderKind::TopP:
            return sample_decode(provider, prompt, config, {SamplingKind::TopP, 1, spec.p}, spec.seed);
        case DecoderKind::MinP:
            return sample_decode(provider, prompt, config, {SamplingKind::MinP, 1, spec.min_p}, spec.seed);
        case DecoderKind::BestOfN:
            return best_of_n(provider, prompt, config, spec.n, spec.seed, {SamplingKind::TopP, 1, spec.p});
        case DecoderKind::Oracle:
            return exhaustive_oracle(provider, prompt, config);
    }
    throw InputError("unknown decoder");
}

namespace detail {

inline nlohmann::ordered_json finite_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const StepTrace& st) {
    nlohmann::ordered_json j;
    j["step"] = st.step;
    j["active"] = st.active;
    j["entropy"] = st.entropy;
    j["normalized_entropy"] = st.normalized_entropy;
    j["mean_branch"] = st.mean_branch;
    j["max_branch"] = st.max_branch;
    j["children"] = st.children;
    j["prunes"] = st.prunes;
    j["beam"] = st.beam;
    j["s_star"] = detail::finite_or_null(st.s_star);
    return j;
}

/// One JSON Lines record: tokens as strings, text without EOS, score,
/// expansions and the per-step trace.
inline nlohmann::ordered_json to_json(const DecodeResult& r, const Vocabulary& vocab) {
    std::vector<std::string> tokens;
    tokens.reserve(r.tokens.size());
    for (TokenId t : r.tokens) tokens.push_back(vocab.token(t));
    nlohmann::ordered_json j;
    j["tokens"] = tokens;
    j["text"] = vocab.decode(r.tokens, false);
    j["score"] = detail::finite_or_null(r.score);
    j["expansions"] = r.expansions;
    j["trace"] = nlohmann::ordered_json::array();
    for (const auto& st : r.trace) j["trace"].push_back(to_json(st));
    return j;
}

}  // namespace eden
