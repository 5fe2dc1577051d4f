#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eden/distribution.hpp"
#include "eden/providers/provider.hpp"

namespace eden {

/// Order-n count model with add-k smoothing and back-off to the longest
/// observed context suffix. Counts are kept for every context length
/// 0..n-1, so short histories at the start of a line resolve directly.
class NgramModel final : public Provider {
public:
    using Counts = std::map<TokenSequence, std::vector<std::uint64_t>>;

    NgramModel(Vocabulary vocab, std::size_t order, Counts counts, double smoothing = 1.0)
        : vocab_(std::move(vocab)), order_(order), counts_(std::move(counts)), smoothing_(smoothing) {
        if (order_ < 1) throw InputError("n-gram order must be at least 1");
        if (!(smoothing_ > 0.0)) throw InputError("smoothing constant must be positive");
        for (auto& [ctx, row] : counts_) {
            if (ctx.size() >= order_) throw InputError("context longer than order - 1");
            vocab_.check(ctx);
            if (row.size() != vocab_.size()) throw InputError("count row width does not match the vocabulary");
        }
    }

    /// Whitespace tokens, one document per non-blank line, EOS appended to
    /// each document. Vocabulary is the sorted token set followed by EOS.
    static NgramModel train(std::istream& corpus, std::size_t order, double smoothing = 1.0,
                            std::string_view eos = kDefaultEos) {
        if (order < 1) throw InputError("n-gram order must be at least 1");
        std::vector<std::vector<std::string>> docs;
        std::set<std::string> types;
        std::string line;
        while (std::getline(corpus, line)) {
            auto toks = split_whitespace(line);
            if (toks.empty()) continue;
            for (const auto& t : toks)
                if (t != eos) types.insert(t);
            docs.push_back(std::move(toks));
        }
        if (docs.empty()) throw InputError("corpus is empty after tokenization");
        std::vector<std::string> tokens(types.begin(), types.end());
        tokens.emplace_back(eos);
        Vocabulary vocab(tokens, eos);

        Counts counts;
        for (const auto& doc : docs) {
            TokenSequence ids;
            for (const auto& t : doc) ids.push_back(vocab.id(t));
            if (ids.back() != vocab.eos()) ids.push_back(vocab.eos());
            for (std::size_t pos = 0; pos < ids.size(); ++pos) {
                const std::size_t max_ctx = std::min(order - 1, pos);
                for (std::size_t len = 0; len <= max_ctx; ++len) {
                    TokenSequence ctx(ids.begin() + static_cast<std::ptrdiff_t>(pos - len),
                                      ids.begin() + static_cast<std::ptrdiff_t>(pos));
                    auto& row = counts[ctx];
                    if (row.empty()) row.assign(vocab.size(), 0);
                    ++row[ids[pos]];
                }
            }
        }
        return NgramModel(std::move(vocab), order, std::move(counts), smoothing);
    }

    static NgramModel train(const std::string& text, std::size_t order, double smoothing = 1.0) {
        std::istringstream in(text);
        return train(in, order, smoothing);
    }

    const Vocabulary& vocabulary() const override { return vocab_; }
    std::size_t order() const noexcept { return order_; }
    double smoothing() const noexcept { return smoothing_; }
    const Counts& counts() const noexcept { return counts_; }

    TokenDistribution next_distribution(std::span<const TokenId> context) const override {
        vocab_.check(context);
        const std::size_t keep = std::min(order_ - 1, context.size());
        const auto* row = lookup(context.subspan(context.size() - keep));
        const double v = static_cast<double>(vocab_.size());
        std::vector<double> logs(vocab_.size());
        double total = 0.0;
        if (row)
            for (auto c : *row) total += static_cast<double>(c);
        const double log_denominator = std::log(total + smoothing_ * v);
        for (std::size_t i = 0; i < logs.size(); ++i) {
            const double c = row ? static_cast<double>((*row)[i]) : 0.0;
            logs[i] = std::log(c + smoothing_) - log_denominator;
        }
        return TokenDistribution::from_log_weights(logs);
    }

    nlohmann::json to_json() const {
        nlohmann::json counts = nlohmann::json::object();
        for (const auto& [ctx, row] : counts_) {
            nlohmann::json r = nlohmann::json::object();
            for (std::size_t i = 0; i < row.size(); ++i)
                if (row[i] > 0) r[vocab_.token(static_cast<TokenId>(i))] = row[i];
            counts[vocab_.decode(ctx)] = std::move(r);
        }
        return {{"order", order_},
                {"vocab", vocab_.tokens()},
                {"eos", vocab_.token(vocab_.eos())},
                {"smoothing", smoothing_},
                {"counts", std::move(counts)}};
    }

    static NgramModel from_json(const nlohmann::json& doc) {
        try {
            const auto order = doc.at("order").get<std::size_t>();
            auto tokens = doc.at("vocab").get<std::vector<std::string>>();
            const auto eos = doc.value("eos", std::string(kDefaultEos));
            const double smoothing = doc.value("smoothing", 1.0);
            Vocabulary vocab(tokens, eos);
            Counts counts;
            for (const auto& [key, row] : doc.at("counts").items()) {
                std::vector<std::uint64_t> dense(vocab.size(), 0);
                for (const auto& [tok, c] : row.items()) {
                    if (!c.is_number_integer() || c.get<std::int64_t>() < 0)
                        throw InputError("count for '" + tok + "' must be a nonnegative integer");
                    dense[vocab.id(tok)] = c.get<std::uint64_t>();
                }
                counts.emplace(vocab.encode(key), std::move(dense));
            }
            return NgramModel(std::move(vocab), order, std::move(counts), smoothing);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("malformed n-gram model: ") + e.what());
        }
    }

    static NgramModel load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open model file '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw InputError("model file '" + path + "' is not valid JSON: " + e.what());
        }
        return from_json(doc);
    }

private:
    const std::vector<std::uint64_t>* lookup(std::span<const TokenId> context) const {
        for (std::size_t drop = 0; drop <= context.size(); ++drop) {
            TokenSequence suffix(context.begin() + static_cast<std::ptrdiff_t>(drop), context.end());
            auto it = counts_.find(suffix);
            if (it == counts_.end()) continue;
            std::uint64_t total = 0;
            for (auto c : it->second) total += c;
            if (total > 0) return &it->second;
        }
        return nullptr;
    }

    Vocabulary vocab_;
    std::size_t order_;
    Counts counts_;
    double smoothing_;
};

}  // namespace eden
