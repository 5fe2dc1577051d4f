#pragma once

// Command-line front end. Kept in a header so tests can run commands
// in-process: run_cli(args, out, err) returns the process exit code.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eden/bench.hpp"
#include "eden/lab/experiments.hpp"
#include "eden/providers/ngram_model.hpp"
#include "eden/providers/remote_provider.hpp"
#include "eden/providers/table_model.hpp"
#include "eden/suite.hpp"
#include "eden/verify.hpp"

namespace eden::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProvider = 3;

struct ProviderFlags {
    std::string kind = "table";
    std::string model_file;
    std::string endpoint;
    std::string remote_model = "eden-stub";
    std::size_t top_logprobs = 5;
    bool vocab_known = false;
    double temperature = 0.6;
};

struct DecodeFlags {
    std::string decoder = "eden";
    std::size_t b_max = 5;
    double a = 1.0;
    double b = 0.0;
    std::size_t width = 3;
    std::size_t top_k = 10;
    double top_p = 0.9;
    double min_p = 0.1;
    std::size_t n = 5;
    double alpha = 1.0;
    std::size_t max_tokens = 400;
    std::uint64_t seed = 0;
    bool conservative = false;
    bool no_pruning = false;
};

inline void add_provider_flags(CLI::App* app, ProviderFlags& f) {
    app->add_option("--provider", f.kind, "table | ngram | remote")
        ->check(CLI::IsMember({"table", "ngram", "remote"}))
        ->capture_default_str();
    app->add_option("--model-file", f.model_file, "model JSON (for remote: supplies the vocabulary)");
    app->add_option("--endpoint", f.endpoint, "base URL of an OpenAI-compatible server");
    app->add_option("--remote-model", f.remote_model, "model name sent to the remote server")->capture_default_str();
    app->add_option("--top-logprobs", f.top_logprobs, "k for closed-API access (1..20)")->capture_default_str();
    app->add_flag("--vocab-known", f.vocab_known, "normalize truncated entropy by log|V| instead of log k");
    app->add_option("--temperature", f.temperature, "sampling temperature applied to the provider")
        ->capture_default_str();
}

inline void add_decode_flags(CLI::App* app, DecodeFlags& f, bool with_decoder = true) {
    if (with_decoder)
        app->add_option("--decoder", f.decoder, "eden | greedy | beam | top_k | top_p | min_p | best_of_n | oracle")
            ->capture_default_str();
    app->add_option("--b-max", f.b_max, "maximum branching factor")->capture_default_str();
    app->add_option("--a", f.a, "branching scale")->capture_default_str();
    app->add_option("--b", f.b, "branching offset")->capture_default_str();
    app->add_option("--width", f.width, "beam width")->capture_default_str();
    app->add_option("--top-k", f.top_k, "top-k cutoff")->capture_default_str();
    app->add_option("--top-p", f.top_p, "nucleus mass")->capture_default_str();
    app->add_option("--min-p", f.min_p, "min-p ratio")->capture_default_str();
    app->add_option("--n", f.n, "best-of-n runs")->capture_default_str();
    app->add_option("--alpha", f.alpha, "length-penalty exponent")->capture_default_str();
    app->add_option("--max-tokens", f.max_tokens, "maximum generated length T")->capture_default_str();
    app->add_option("--seed", f.seed, "seed for stochastic decoders")->capture_default_str();
    app->add_flag("--conservative-pruning", f.conservative, "raise S* only from completed sequences");
    app->add_flag("--no-pruning", f.no_pruning, "track bounds but never prune (reference mode)");
}

inline DecoderSpec decoder_spec(const DecodeFlags& f) {
    DecoderSpec s;
    s.kind = parse_decoder_kind(f.decoder);
    s.width = f.width;
    s.k = f.top_k;
    s.p = f.top_p;
    s.min_p = f.min_p;
    s.n = f.n;
    s.seed = f.seed;
    s.eden.policy.b_max = f.b_max;
    s.eden.policy.a = f.a;
    s.eden.policy.b = f.b;
    s.eden.pruning = !f.no_pruning;
    s.eden.conservative = f.conservative;
    s.validate();
    return s;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

/// Owns the configured provider chain (base model plus temperature).
class LoadedProvider {
public:
    explicit LoadedProvider(const ProviderFlags& f) {
        if (!(f.temperature > 0.0)) throw InputError("temperature must be positive");
        if (f.model_file.empty()) throw InputError("--model-file is required");
        if (f.kind == "table") {
            base_ = std::make_unique<TableModel>(TableModel::load(f.model_file));
        } else if (f.kind == "ngram") {
            base_ = std::make_unique<NgramModel>(NgramModel::load(f.model_file));
        } else {
            const auto doc = read_json_file(f.model_file);
            Vocabulary vocab;
            try {
                vocab = Vocabulary(doc.at("vocab").get<std::vector<std::string>>(), doc.at("eos").get<std::string>());
            } catch (const nlohmann::json::exception& e) {
                throw InputError("vocabulary file needs \"vocab\" and \"eos\": " + std::string(e.what()));
            }
            RemoteConfig rc;
            rc.endpoint = f.endpoint;
            rc.model = f.remote_model;
            rc.top_logprobs = f.top_logprobs;
            rc.api_key = api_key_from_env();
            rc.vocab_size_known = f.vocab_known;
            // The server applies temperature; its top-k view cannot be re-tempered here.
            if (f.temperature != 1.0) rc.temperature = f.temperature;
            base_ = std::make_unique<RemoteProvider>(std::move(vocab), rc);
            return;
        }
        if (f.temperature != 1.0) tempered_ = std::make_unique<TemperedProvider>(*base_, f.temperature);
    }

    const Provider& get() const { return tempered_ ? *tempered_ : *base_; }

private:
    std::unique_ptr<Provider> base_;
    std::unique_ptr<Provider> tempered_;
};

inline ScoreConfig score_config(const DecodeFlags& f, const Vocabulary& vocab) {
    ScoreConfig c;
    c.alpha = f.alpha;
    c.max_length = f.max_tokens;
    c.vocab_size = vocab.size();
    c.validate();
    return c;
}

inline std::vector<TokenSequence> read_prompts(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open prompts file '" + path + "'");
    std::vector<TokenSequence> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(vocab.encode(line));
    }
    if (out.empty()) throw InputError("prompts file '" + path + "' has no prompts");
    return out;
}

/// Writes `content` to `path` (or `out` when the path is empty or "-"). The
/// file appears only once complete, via a sibling temporary and a rename.
inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        out.flush();
        return;
    }
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw InputError("cannot write '" + path + "'");
        f << content;
        if (!f.flush()) throw InputError("cannot write '" + path + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw InputError("cannot write '" + path + "': " + ec.message());
    }
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        is.imbue(std::locale::classic());
        T v{};
        if (!(is >> v) || !(is >> std::ws).eof()) throw InputError(std::string("invalid ") + what + " list '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InputError(std::string("empty ") + what + " list");
    return out;
}

/// "shared:c" is a zero-variance level (one Dirichlet(c) row reused at every
/// step); "lo:hi" draws each step's concentration log-uniformly in [lo, hi].
inline std::vector<lab::EntropySpec> parse_levels(const std::string& text, std::size_t vocab) {
    std::vector<lab::EntropySpec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InputError("level '" + item + "' must be lo:hi or shared:c");
        const std::string left = item.substr(0, colon), right = item.substr(colon + 1);
        lab::EntropySpec spec;
        spec.vocab_size = vocab;
        try {
            if (left == "shared") {
                spec.shared = true;
                spec.min_concentration = spec.max_concentration = std::stod(right);
            } else {
                spec.min_concentration = std::stod(left);
                spec.max_concentration = std::stod(right);
            }
        } catch (const std::logic_error&) {
            throw InputError("level '" + item + "' is not numeric");
        }
        spec.validate();
        out.push_back(spec);
    }
    if (out.empty()) throw InputError("no variance levels given");
    return out;
}

inline std::string default_levels_text() { return "shared:1,0.5:2,0.2:5,0.1:10,0.05:20"; }

struct App {
    CLI::App app{"Entropy-adaptive branch-and-bound decoding and allocation lab", "eden"};
    std::ostream& out;

    ProviderFlags provider;
    DecodeFlags decode;
    std::string prompts, out_path;

    // train-ngram
    std::string corpus;
    std::size_t order = 2;
    double smoothing = 1.0;

    // bench
    std::string decoders = "eden,beam";
    std::string sweep = "3,5,7,9";
    std::size_t suite_models = 0, suite_vocab = 12;
    double suite_min_c = 0.05, suite_max_c = 20.0;
    std::uint64_t suite_seed = 0;
    unsigned threads = 1;

    // simulate-regret
    std::size_t steps = 50, seeds = 200, trials = 200, vocab = 10;
    double budget = 500.0, delta_sq = 0.01;
    std::string levels = default_levels_text();
    std::string policies = "fixed,entropy_proportional,kkt_optimal";

    // estimate-entropy
    double concentration = 1.0;
    bool point_mass = false;
    std::size_t estimate_vocab = 100;
    std::string grid = "10,100,1000,10000";
    std::string method = "plug-in";

    // verify
    std::size_t max_vocab = 5, max_length = 6, count = 100;

    CLI::App* cmd_decode = nullptr;
    CLI::App* cmd_train = nullptr;
    CLI::App* cmd_bench = nullptr;
    CLI::App* cmd_regret = nullptr;
    CLI::App* cmd_estimate = nullptr;
    CLI::App* cmd_verify = nullptr;

    explicit App(std::ostream& o) : out(o) {
        app.require_subcommand(1);

        cmd_decode = app.add_subcommand("decode", "decode each prompt; one JSON object per line");
        add_provider_flags(cmd_decode, provider);
        add_decode_flags(cmd_decode, decode);
        cmd_decode->add_option("--prompts", prompts, "UTF-8 prompts, one per line")->required();
        cmd_decode->add_option("--out", out_path, "output path (default stdout)");

        cmd_train = app.add_subcommand("train-ngram", "train an add-k n-gram model");
        cmd_train->add_option("--corpus", corpus, "UTF-8 text, one document per line")->required();
        cmd_train->add_option("--order", order, "n")->capture_default_str();
        cmd_train->add_option("--smoothing", smoothing, "add-k constant")->capture_default_str();
        cmd_train->add_option("--out", out_path, "model JSON path (default stdout)");

        cmd_bench = app.add_subcommand("bench", "score/expansion table over decoders and a parameter sweep");
        add_provider_flags(cmd_bench, provider);
        add_decode_flags(cmd_bench, decode, false);
        cmd_bench->add_option("--prompts", prompts, "prompts file (model-file mode)");
        cmd_bench->add_option("--decoders", decoders, "comma-separated decoder names")->capture_default_str();
        cmd_bench->add_option("--sweep", sweep, "values for B_max / width / k / n")->capture_default_str();
        cmd_bench->add_option("--suite-models", suite_models, "use N generated random models instead of a file");
        cmd_bench->add_option("--suite-vocab", suite_vocab, "vocabulary size of generated models")
            ->capture_default_str();
        cmd_bench->add_option("--suite-min-concentration", suite_min_c)->capture_default_str();
        cmd_bench->add_option("--suite-max-concentration", suite_max_c)->capture_default_str();
        cmd_bench->add_option("--suite-seed", suite_seed)->capture_default_str();
        cmd_bench->add_option("--threads", threads, "worker threads")->capture_default_str();
        cmd_bench->add_option("--out", out_path, "CSV path (default stdout)");

        cmd_regret = app.add_subcommand("simulate-regret", "fixed vs adaptive budget regret (CSV)");
        cmd_regret->add_option("--T", steps, "decision steps")->capture_default_str();
        cmd_regret->add_option("--M", budget, "total budget")->capture_default_str();
        cmd_regret->add_option("--seeds", seeds, "step lists per level")->capture_default_str();
        cmd_regret->add_option("--trials", trials, "noise draws per step list")->capture_default_str();
        cmd_regret->add_option("--delta-sq", delta_sq, "noise variance proxy")->capture_default_str();
        cmd_regret->add_option("--vocab", vocab, "candidates per step")->capture_default_str();
        cmd_regret->add_option("--levels", levels, "variance levels: shared:c or lo:hi, comma-separated")
            ->capture_default_str();
        cmd_regret->add_option("--policies", policies, "fixed, entropy_proportional, kkt_optimal")
            ->capture_default_str();
        cmd_regret->add_option("--seed", decode.seed, "base seed")->capture_default_str();
        cmd_regret->add_option("--out", out_path, "CSV path (default stdout)");

        cmd_estimate = app.add_subcommand("estimate-entropy", "entropy-estimation RMSE over a sample grid (CSV)");
        cmd_estimate->add_option("--vocab", estimate_vocab, "vocabulary size")->capture_default_str();
        cmd_estimate->add_option("--concentration", concentration, "symmetric Dirichlet concentration")
            ->capture_default_str();
        cmd_estimate->add_flag("--point-mass", point_mass, "use point-mass distributions");
        cmd_estimate->add_option("--grid", grid, "sample counts m")->capture_default_str();
        cmd_estimate->add_option("--seeds", seeds, "distributions (one per seed)")->capture_default_str();
        cmd_estimate->add_option("--method", method, "plug-in | miller-madow")->capture_default_str();
        cmd_estimate->add_option("--seed", decode.seed, "base seed")->capture_default_str();
        cmd_estimate->add_option("--out", out_path, "CSV path (default stdout)");

        cmd_verify = app.add_subcommand("verify", "eden vs exhaustive oracle and pruning soundness");
        add_provider_flags(cmd_verify, provider);
        add_decode_flags(cmd_verify, decode, false);
        cmd_verify->add_option("--prompts", prompts, "prompts file (model-file mode)");
        cmd_verify->add_option("--max-vocab", max_vocab, "random mode: largest |V|")->capture_default_str();
        cmd_verify->add_option("--max-length", max_length, "random mode: largest T")->capture_default_str();
        cmd_verify->add_option("--count", count, "random mode: number of models")->capture_default_str();
    }

    int run() {
        if (cmd_decode->parsed()) return run_decode();
        if (cmd_train->parsed()) return run_train();
        if (cmd_bench->parsed()) return run_bench_cmd();
        if (cmd_regret->parsed()) return run_regret();
        if (cmd_estimate->parsed()) return run_estimate();
        return run_verify();
    }

    int run_decode() {
        const LoadedProvider lp(provider);
        const Provider& p = lp.get();
        const auto spec = decoder_spec(decode);
        const auto config = score_config(decode, p.vocabulary());
        const auto items = read_prompts(prompts, p.vocabulary());
        std::string buf;
        for (const auto& prompt : items) {
            buf += to_json(eden::decode(p, prompt, config, spec), p.vocabulary()).dump();
            buf += '\n';
        }
        emit(out_path, buf, out);
        return kExitOk;
    }

    int run_train() {
        std::ifstream in(corpus);
        if (!in) throw InputError("cannot open corpus '" + corpus + "'");
        const auto model = NgramModel::train(in, order, smoothing);
        emit(out_path, model.to_json().dump(2) + "\n", out);
        return kExitOk;
    }

    std::vector<DecoderSpec> bench_specs() const {
        const auto values = parse_list<std::size_t>(sweep, "sweep");
        std::vector<DecoderSpec> specs;
        for (const auto& name : parse_list<std::string>(decoders, "decoder")) {
            DecodeFlags f = decode;
            f.decoder = name;
            const auto kind = parse_decoder_kind(name);
            const bool swept = kind == DecoderKind::Eden || kind == DecoderKind::Beam || kind == DecoderKind::TopK ||
                               kind == DecoderKind::BestOfN;
            if (!swept) {
                specs.push_back(decoder_spec(f));
                continue;
            }
            for (std::size_t v : values) {
                f.b_max = f.width = f.top_k = f.n = v;
                specs.push_back(decoder_spec(f));
            }
        }
        return specs;
    }

    int run_bench_cmd() {
        const auto specs = bench_specs();
        std::vector<BenchRow> rows;
        if (suite_models > 0) {
            const auto suite = make_suite({suite_models, suite_vocab, suite_min_c, suite_max_c, suite_seed});
            std::vector<BenchItem> items;
            for (const auto& m : suite) items.push_back({&m, {}});
            rows = run_bench(items, specs, score_config(decode, suite.front().vocabulary()), threads);
        } else {
            if (prompts.empty()) throw InputError("bench needs --prompts (or --suite-models)");
            const LoadedProvider lp(provider);
            const Provider& p = lp.get();
            std::vector<BenchItem> items;
            for (auto& prompt : read_prompts(prompts, p.vocabulary())) items.push_back({&p, std::move(prompt)});
            rows = run_bench(items, specs, score_config(decode, p.vocabulary()), threads);
        }
        std::ostringstream os;
        write_bench_csv(os, rows);
        emit(out_path, os.str(), out);
        return kExitOk;
    }

    int run_regret() {
        lab::RegretExperiment ex;
        ex.steps = steps;
        ex.total = budget;
        ex.seeds = seeds;
        ex.trials = trials;
        ex.seed = decode.seed;
        ex.noise.delta_sq = delta_sq;
        ex.levels = parse_levels(levels, vocab);
        ex.policies.clear();
        for (const auto& name : parse_list<std::string>(policies, "policy")) {
            if (name == "fixed") ex.policies.push_back(lab::BudgetKind::Fixed);
            else if (name == "entropy_proportional") ex.policies.push_back(lab::BudgetKind::EntropyProportional);
            else if (name == "kkt_optimal") ex.policies.push_back(lab::BudgetKind::KktOptimal);
            else throw InputError("unknown budget policy '" + name + "'");
        }
        const auto results = lab::run_regret_experiment(ex);
        std::ostringstream os;
        lab::write_regret_csv(os, ex, results);
        emit(out_path, os.str(), out);
        return kExitOk;
    }

    int run_estimate() {
        lab::EstimationExperiment ex;
        ex.vocab_size = estimate_vocab;
        ex.concentration = concentration;
        ex.point_mass = point_mass;
        ex.grid = parse_list<std::size_t>(grid, "grid");
        ex.seeds = seeds;
        ex.seed = decode.seed;
        if (method == "plug-in") ex.method = EstimatorMethod::PlugIn;
        else if (method == "miller-madow") ex.method = EstimatorMethod::MillerMadow;
        else throw InputError("unknown estimator '" + method + "'");
        std::ostringstream os;
        lab::write_estimation_csv(os, lab::run_estimation_experiment(ex));
        emit(out_path, os.str(), out);
        return kExitOk;
    }

    int run_verify() {
        bool ok = true;
        if (!provider.model_file.empty()) {
            // Model-file mode: eden under the given flags against the oracle.
            const LoadedProvider lp(provider);
            const Provider& p = lp.get();
            const auto config = score_config(decode, p.vocabulary());
            DecodeFlags f = decode;
            f.decoder = "eden";
            const auto spec = decoder_spec(f);
            if (prompts.empty()) throw InputError("verify with --model-file needs --prompts");
            std::size_t i = 0;
            for (const auto& prompt : read_prompts(prompts, p.vocabulary())) {
                const auto oracle = exhaustive_oracle(p, prompt, config);
                const auto eden = eden::decode(p, prompt, config, spec);
                const bool pass = std::abs(eden.score - oracle.score) <= 1e-9;
                ok = ok && pass;
                out << (pass ? "PASS" : "FAIL") << " prompt " << i++ << " oracle_score "
                    << lab::format_number(oracle.score) << " eden_score " << lab::format_number(eden.score)
                    << " oracle_text \"" << p.vocabulary().decode(oracle.tokens, false) << "\"\n";
            }
            return ok ? kExitOk : kExitFailure;
        }
        RandomModelSpec spec;
        spec.max_vocab = max_vocab;
        spec.max_length = max_length;
        spec.min_vocab = std::min(spec.min_vocab, max_vocab);
        spec.min_length = std::min(spec.min_length, max_length);
        spec.validate();
        std::size_t passed = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const auto r = verify_case(random_case(decode.seed, i, spec));
            passed += r.passed() ? 1 : 0;
            out << (r.passed() ? "PASS" : "FAIL") << " model " << i << " V=" << r.vocab_size << " T=" << r.max_length
                << " alpha=" << r.alpha << " oracle=" << lab::format_number(r.oracle_score)
                << " eden=" << lab::format_number(r.eden_score) << " unpruned=" << lab::format_number(r.unpruned_score)
                << " oracle_match=" << r.oracle_match << " pruning_sound=" << r.pruning_sound
                << " conservative_identical=" << r.conservative_identical << "\n";
        }
        out << passed << "/" << count << " passed\n";
        return passed == count ? kExitOk : kExitFailure;
    }
};

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    App a(out);
    try {
        std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
        a.app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return a.app.exit(e, out, err);  // --help
        err << "eden: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        return a.run();
    } catch (const ProviderError& e) {
        err << "eden: provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const NumericError& e) {
        err << "eden: numeric error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "eden: " << e.what() << "\n";
        return kExitConfig;
    }
}

inline int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(std::move(args));
}

}  // namespace eden::cli
