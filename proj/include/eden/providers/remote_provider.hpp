#pragma once

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "eden/distribution.hpp"
#include "eden/providers/provider.hpp"

namespace eden {

inline constexpr const char* kApiKeyEnv = "EDEN_API_KEY";

struct RemoteConfig {
    std::string endpoint;  // scheme://host[:port][/prefix]
    std::string model;
    std::size_t top_logprobs = 5;
    std::optional<std::string> api_key;  // bearer token
    std::optional<double> temperature;   // forwarded in the request body when set
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{100};
    std::chrono::seconds timeout{30};
    /// Normalize truncated entropy by log|V| instead of log k.
    bool vocab_size_known = false;

    void validate() const {
        if (top_logprobs < 1 || top_logprobs > 20) throw InputError("top_logprobs must be in [1, 20]");
        if (endpoint.empty()) throw InputError("remote endpoint is required");
        if (max_attempts < 1) throw InputError("max_attempts must be at least 1");
        if (temperature && !(*temperature > 0.0)) throw InputError("temperature must be positive");
    }
};

/// Reads the bearer token from EDEN_API_KEY, if set and non-empty.
inline std::optional<std::string> api_key_from_env() {
    const char* v = std::getenv(kApiKeyEnv);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

struct CompletionRequest {
    std::string model;
    std::string prompt;
    std::size_t logprobs = 5;
    std::optional<double> temperature;

    nlohmann::json to_json() const {
        nlohmann::json body = {{"model", model}, {"prompt", prompt}, {"max_tokens", 1}, {"logprobs", logprobs}};
        if (temperature) body["temperature"] = *temperature;
        return body;
    }
};

/// token -> logprob map at choices[0].logprobs.top_logprobs[0].
inline std::vector<std::pair<std::string, double>> parse_top_logprobs(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("response is not valid JSON: ") + e.what());
    }
    try {
        const auto& top = doc.at("choices").at(0).at("logprobs").at("top_logprobs").at(0);
        if (!top.is_object()) throw ProviderError("top_logprobs[0] is not an object");
        std::vector<std::pair<std::string, double>> out;
        for (const auto& [tok, lp] : top.items()) {
            if (!lp.is_number()) throw ProviderError("logprob for '" + tok + "' is not a number");
            out.emplace_back(tok, lp.get<double>());
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("response missing choices[0].logprobs.top_logprobs[0]: ") + e.what());
    }
}

namespace detail {

struct ParsedEndpoint {
    std::string origin;  // scheme://host:port
    std::string prefix;  // path without trailing slash
};

inline ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw InputError("endpoint must include a scheme: '" + endpoint + "'");
    const auto path_start = endpoint.find('/', scheme_end + 3);
    ParsedEndpoint p;
    p.origin = endpoint.substr(0, path_start);
    p.prefix = path_start == std::string::npos ? "" : endpoint.substr(path_start);
    while (!p.prefix.empty() && p.prefix.back() == '/') p.prefix.pop_back();
    return p;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Closed-API provider: POSTs {endpoint}/v1/completions and turns the top-k
/// logprobs into a truncated distribution. Returned tokens that are not in
/// the vocabulary (after whitespace trimming) are left in the tail mass.
///
/// A fresh client is created per request, so concurrent calls are safe.
class RemoteProvider final : public Provider {
public:
    RemoteProvider(Vocabulary vocab, RemoteConfig config)
        : vocab_(std::move(vocab)), config_(std::move(config)), endpoint_(detail::parse_endpoint(config_.endpoint)) {
        config_.validate();
    }

    const Vocabulary& vocabulary() const override { return vocab_; }
    const RemoteConfig& config() const noexcept { return config_; }

    CompletionRequest request_for(std::span<const TokenId> context) const {
        return {config_.model, vocab_.decode(context), config_.top_logprobs, config_.temperature};
    }

    TokenDistribution next_distribution(std::span<const TokenId> context) const override {
        vocab_.check(context);
        const std::string body = post(request_for(context).to_json().dump());
        return to_distribution(parse_top_logprobs(body));
    }

    TokenDistribution to_distribution(const std::vector<std::pair<std::string, double>>& top) const {
        std::vector<std::pair<TokenId, double>> entries;
        for (const auto& [tok, lp] : top) {
            std::optional<TokenId> id;
            if (vocab_.contains(tok)) {
                id = vocab_.id(tok);
            } else if (auto t = detail::trim(tok); !t.empty() && vocab_.contains(t)) {
                id = vocab_.id(t);
            }
            if (!id) continue;
            bool seen = false;
            for (const auto& e : entries) seen = seen || e.first == *id;
            if (!seen) entries.emplace_back(*id, lp);
        }
        if (entries.empty()) throw ProviderError("remote response has no usable top-k support");
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (entries.size() > config_.top_logprobs) entries.resize(config_.top_logprobs);
        try {
            return TokenDistribution::truncated(std::move(entries), config_.top_logprobs,
                                                config_.vocab_size_known ? std::optional(vocab_.size()) : std::nullopt);
        } catch (const InputError& e) {
            throw ProviderError(std::string("invalid remote distribution: ") + e.what());
        }
    }

private:
    std::string post(const std::string& payload) const {
        std::string last_error;
        auto backoff = config_.initial_backoff;
        for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
            httplib::Client client(endpoint_.origin);
            client.set_connection_timeout(config_.timeout);
            client.set_read_timeout(config_.timeout);
            client.set_write_timeout(config_.timeout);
            httplib::Headers headers;
            if (config_.api_key) headers.emplace("Authorization", "Bearer " + *config_.api_key);
            auto res = client.Post(endpoint_.prefix + "/v1/completions", headers, payload, "application/json");
            if (res) {
                if (res->status >= 200 && res->status < 300) return res->body;
                last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
                if (res->status >= 400 && res->status < 500) break;
            } else {
                last_error = "transport error: " + httplib::to_string(res.error());
            }
            if (attempt < config_.max_attempts) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
        }
        throw ProviderError("completion request to " + config_.endpoint + " failed: " + last_error);
    }

    Vocabulary vocab_;
    RemoteConfig config_;
    detail::ParsedEndpoint endpoint_;
};

}  // namespace eden
