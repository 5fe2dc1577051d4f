#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eden/distribution.hpp"
#include "eden/providers/provider.hpp"

namespace eden {

/// Explicit conditional table. Rows are keyed by context; a lookup uses the
/// longest suffix of the context that has a row, ending at the empty context
/// (the default row).
class TableModel final : public Provider {
public:
    using Rows = std::map<TokenSequence, TokenDistribution>;

    TableModel(Vocabulary vocab, Rows rows) : vocab_(std::move(vocab)), rows_(std::move(rows)) {
        for (const auto& [ctx, dist] : rows_) {
            vocab_.check(ctx);
            if (!dist.is_full() || dist.support().size() != vocab_.size())
                throw InputError("table row must be a full distribution over the vocabulary");
        }
    }

    /// Rows given as dense probability vectors indexed by token id.
    static TableModel from_dense(Vocabulary vocab, const std::map<TokenSequence, std::vector<double>>& rows) {
        Rows out;
        for (const auto& [ctx, probs] : rows) {
            if (probs.size() != vocab.size()) throw InputError("row width does not match the vocabulary");
            out.emplace(ctx, TokenDistribution::from_probabilities(probs, false, 1e-6));
        }
        return TableModel(std::move(vocab), std::move(out));
    }

    const Vocabulary& vocabulary() const override { return vocab_; }

    TokenDistribution next_distribution(std::span<const TokenId> context) const override {
        vocab_.check(context);
        return row_for(context);
    }

    /// Row selected for `context`, without copying.
    const TokenDistribution& row_for(std::span<const TokenId> context) const {
        for (std::size_t drop = 0; drop <= context.size(); ++drop) {
            TokenSequence suffix(context.begin() + static_cast<std::ptrdiff_t>(drop), context.end());
            auto it = rows_.find(suffix);
            if (it != rows_.end()) return it->second;
        }
        throw ProviderError("table model has no row for context '" + vocab_.decode(context) + "' and no default row");
    }

    const Rows& rows() const noexcept { return rows_; }

    static TableModel from_json(const nlohmann::json& doc) {
        try {
            auto tokens = doc.at("vocab").get<std::vector<std::string>>();
            auto eos = doc.at("eos").get<std::string>();
            Vocabulary vocab(tokens, eos);
            std::map<TokenSequence, std::vector<double>> dense;
            for (const auto& [key, row] : doc.at("rows").items()) {
                std::vector<double> probs(vocab.size(), 0.0);
                for (const auto& [tok, p] : row.items()) {
                    if (!p.is_number()) throw InputError("probability for '" + tok + "' is not a number");
                    probs[vocab.id(tok)] = p.get<double>();
                }
                dense.emplace(vocab.encode(key), std::move(probs));
            }
            return from_dense(std::move(vocab), dense);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("malformed table model: ") + e.what());
        }
    }

    static TableModel load(const std::string& path) {
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

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::object();
        for (const auto& [ctx, dist] : rows_) {
            nlohmann::json row = nlohmann::json::object();
            for (const auto& e : dist.support())
                if (e.prob > 0.0) row[vocab_.token(e.token)] = e.prob;
            rows[vocab_.decode(ctx)] = std::move(row);
        }
        return {{"vocab", vocab_.tokens()}, {"eos", vocab_.token(vocab_.eos())}, {"rows", std::move(rows)}};
    }

private:
    Vocabulary vocab_;
    Rows rows_;
};

}  // namespace eden
