#pragma once

#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eden/error.hpp"

namespace eden {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

inline constexpr std::string_view kDefaultEos = "<eos>";

/// Split on ASCII whitespace. One document per line is the caller's concern.
inline std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

class Vocabulary {
public:
    Vocabulary() = default;

    Vocabulary(std::vector<std::string> tokens, std::string_view eos) : tokens_(std::move(tokens)) {
        if (tokens_.size() < 2) throw InputError("vocabulary needs at least two tokens");
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            if (tokens_[i].empty()) throw InputError("vocabulary token may not be empty");
            auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
            if (!inserted) throw InputError("duplicate vocabulary token '" + tokens_[i] + "'");
        }
        auto it = index_.find(std::string(eos));
        if (it == index_.end()) throw InputError("eos token '" + std::string(eos) + "' not in vocabulary");
        eos_ = it->second;
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    TokenId eos() const noexcept { return eos_; }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    const std::string& token(TokenId id) const {
        check(id);
        return tokens_[id];
    }

    bool contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

    TokenId id(std::string_view token) const {
        auto it = index_.find(std::string(token));
        if (it == index_.end()) throw InputError("unknown token '" + std::string(token) + "'");
        return it->second;
    }

    void check(TokenId id) const {
        if (id >= tokens_.size()) throw InputError("token index " + std::to_string(id) + " out of range");
    }

    void check(std::span<const TokenId> ids) const {
        for (TokenId id : ids) check(id);
    }

    TokenSequence encode(std::string_view text) const {
        TokenSequence out;
        for (const auto& piece : split_whitespace(text)) out.push_back(id(piece));
        return out;
    }

    std::string decode(std::span<const TokenId> ids, bool include_eos = true) const {
        std::ostringstream os;
        bool first = true;
        for (TokenId id : ids) {
            if (!include_eos && id == eos_) continue;
            if (!first) os << ' ';
            os << token(id);
            first = false;
        }
        return os.str();
    }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
    TokenId eos_ = 0;
};

}  // namespace eden
