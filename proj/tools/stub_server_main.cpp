// Serves a table or n-gram model over the completions protocol for manual
// closed-API runs: eden_stub_server --model-file m.json --port 8080

#include <iostream>

#include <CLI11.hpp>

#include "eden/providers/ngram_model.hpp"
#include "eden/providers/stub_server.hpp"
#include "eden/providers/table_model.hpp"

int main(int argc, char** argv) {
    CLI::App app{"completions stub server", "eden_stub_server"};
    std::string model_file, kind = "table", host = "127.0.0.1", api_key;
    int port = 8080;
    app.add_option("--model-file", model_file, "table or n-gram model JSON")->required();
    app.add_option("--provider", kind, "table | ngram")->check(CLI::IsMember({"table", "ngram"}))->capture_default_str();
    app.add_option("--host", host)->capture_default_str();
    app.add_option("--port", port)->capture_default_str();
    app.add_option("--api-key", api_key, "require this bearer token");
    CLI11_PARSE(app, argc, argv);
    try {
        std::unique_ptr<eden::Provider> model;
        if (kind == "table") model = std::make_unique<eden::TableModel>(eden::TableModel::load(model_file));
        else model = std::make_unique<eden::NgramModel>(eden::NgramModel::load(model_file));
        std::optional<std::string> key;
        if (!api_key.empty()) key = api_key;
        eden::StubCompletionServer server(*model, key);
        std::cerr << "serving " << model_file << " on http://" << host << ":" << port << "\n";
        server.serve(host, port);
    } catch (const std::exception& e) {
        std::cerr << "eden_stub_server: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
