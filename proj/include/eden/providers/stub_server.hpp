#pragma once

#include <atomic>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "eden/providers/provider.hpp"

namespace eden {

/// Serves a full-support provider over the completions wire protocol,
/// exposing only its top-k log-probabilities. Used to exercise the closed-API
/// path against known ground-truth rows.
class StubCompletionServer {
public:
    explicit StubCompletionServer(const Provider& model, std::optional<std::string> required_key = std::nullopt)
        : model_(model), required_key_(std::move(required_key)) {
        server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res);
        });
    }

    ~StubCompletionServer() { stop(); }

    StubCompletionServer(const StubCompletionServer&) = delete;
    StubCompletionServer& operator=(const StubCompletionServer&) = delete;

    /// Binds (port 0 picks a free port) and serves on a background thread.
    int start(const std::string& host = "127.0.0.1", int port = 0) {
        port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
        if (port_ < 0) throw ProviderError("stub server could not bind " + host + ":" + std::to_string(port));
        host_ = host;
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port_;
    }

    /// Blocks serving requests on the calling thread.
    void serve(const std::string& host, int port) {
        if (!server_.listen(host, port)) throw ProviderError("stub server could not listen on " + host + ":" + std::to_string(port));
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string endpoint() const { return "http://" + host_ + ":" + std::to_string(port_); }
    std::size_t requests() const noexcept { return requests_.load(); }

    /// Failure injection: the next `n` requests get HTTP `status`.
    void fail_next(int n, int status = 503) {
        fail_status_ = status;
        fail_remaining_ = n;
    }

private:
    void handle(const httplib::Request& req, httplib::Response& res) {
        ++requests_;
        if (fail_remaining_.load() > 0) {
            --fail_remaining_;
            res.status = fail_status_.load();
            res.set_content(R"({"error":{"message":"injected failure"}})", "application/json");
            return;
        }
        if (required_key_ && req.get_header_value("Authorization") != "Bearer " + *required_key_) {
            error(res, 401, "invalid api key");
            return;
        }
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            error(res, 400, "request body is not JSON");
            return;
        }
        if (!body.contains("prompt") || !body["prompt"].is_string()) {
            error(res, 400, "prompt must be a string");
            return;
        }
        const std::size_t k = body.value("logprobs", 5);
        const auto& vocab = model_.vocabulary();
        TokenSequence context;
        try {
            context = vocab.encode(body["prompt"].get<std::string>());
        } catch (const InputError& e) {
            error(res, 400, e.what());
            return;
        }
        const double temperature = body.value("temperature", 1.0);
        if (!(temperature > 0.0)) {
            error(res, 400, "temperature must be positive");
            return;
        }
        auto dist = model_.next_distribution(context);
        if (temperature != 1.0 && dist.is_full()) dist = apply_temperature(dist, temperature);
        nlohmann::json top = nlohmann::json::object();
        std::size_t listed = 0;
        for (const auto& e : dist.support()) {
            if (listed == k || e.prob <= 0.0) break;
            top[vocab.token(e.token)] = e.log_prob;
            ++listed;
        }
        const auto& head = dist.head();
        nlohmann::json choice = {
            {"index", 0},
            {"text", vocab.token(head.token)},
            {"finish_reason", "length"},
            {"logprobs",
             {{"tokens", {vocab.token(head.token)}},
              {"token_logprobs", {head.log_prob}},
              {"top_logprobs", nlohmann::json::array({top})},
              {"text_offset", {0}}}}};
        nlohmann::json out = {{"id", "cmpl-stub-" + std::to_string(requests_.load())},
                              {"object", "text_completion"},
                              {"model", body.value("model", std::string("stub"))},
                              {"choices", nlohmann::json::array({choice})}};
        res.set_content(out.dump(), "application/json");
    }

    static void error(httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", {{"message", message}}}}.dump(), "application/json");
    }

    const Provider& model_;
    std::optional<std::string> required_key_;
    httplib::Server server_;
    std::thread thread_;
    std::string host_ = "127.0.0.1";
    int port_ = -1;
    std::atomic<std::size_t> requests_{0};
    std::atomic<int> fail_remaining_{0};
    std::atomic<int> fail_status_{503};
};

}  // namespace eden
