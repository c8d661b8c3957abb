// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/vocab.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vlg {

namespace {

constexpr std::array<std::string_view, kNumControlTokens> kControlLiterals = {kBos, kEos, kPad, kBb, kLoc};

bool is_control_literal(std::string_view word) {
    return std::find(kControlLiterals.begin(), kControlLiterals.end(), word) != kControlLiterals.end();
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> text_tokens) {
    tokens_.reserve(text_tokens.size() + kNumControlTokens);
    for (auto& word : text_tokens) {
        if (word.empty() || word.find_first_of(" \t\r\n") != std::string::npos) {
            throw std::invalid_argument("vocabulary: token must be a non-empty word without whitespace: '" + word +
                                        "'");
        }
        if (is_control_literal(word)) {
            throw std::invalid_argument("vocabulary: text token collides with control token " + word);
        }
        auto [_, inserted] = index_.emplace(word, static_cast<TokenId>(tokens_.size()));
        if (!inserted) {
            throw std::invalid_argument("vocabulary: duplicate token \"" + word + "\"");
        }
        tokens_.push_back(std::move(word));
    }
    first_control_ = static_cast<TokenId>(tokens_.size());
    for (auto literal : kControlLiterals) {
        index_.emplace(std::string(literal), static_cast<TokenId>(tokens_.size()));
        tokens_.emplace_back(literal);
    }
}

bool Vocabulary::contains(std::string_view word) const {
    return index_.find(std::string(word)) != index_.end();
}

TokenId Vocabulary::id(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) {
        throw std::invalid_argument("unknown token \"" + std::string(word) + "\"");
    }
    return it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
        throw std::out_of_range("token id " + std::to_string(id) + " out of range");
    }
    return tokens_[static_cast<std::size_t>(id)];
}

std::string Vocabulary::serialize() const {
    std::string out;
    for (const auto& t : tokens_) {
        out += t;
        out += '\n';
    }
    return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    if (lines.size() < kNumControlTokens) {
        throw std::invalid_argument("vocabulary file: fewer than five lines");
    }
    for (std::size_t i = 0; i < kNumControlTokens; ++i) {
        if (lines[lines.size() - kNumControlTokens + i] != kControlLiterals[i]) {
            throw std::invalid_argument("vocabulary file: control tokens missing or out of order");
        }
    }
    lines.resize(lines.size() - kNumControlTokens);
    return Vocabulary(std::move(lines));
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vocabulary to " + path.string());
    out << serialize();
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read vocabulary from " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Vocabulary::content_hash() const {
    return to_hex(fnv1a64(serialize()));
}

Vocabulary build_vocab(const std::vector<std::string>& text_tokens) {
    return Vocabulary(text_tokens);
}

TokenSeq encode(const Vocabulary& v, const std::vector<std::string>& words) {
    TokenSeq s;
    s.ids.reserve(words.size());
    for (const auto& w : words) s.ids.push_back(v.id(w));
    return s;
}

std::vector<std::string> decode(const Vocabulary& v, const TokenSeq& s) {
    std::vector<std::string> words;
    words.reserve(s.size());
    for (auto id : s.ids) words.push_back(v.token(id));
    return words;
}

ProtocolCheck validate_protocol(const Vocabulary& v, const TokenSeq& s, bool truncated) {
    ProtocolCheck check;
    const auto n = s.size();
    for (std::size_t t = 0; t < n; ++t) {
        if (s[t] == v.bb()) {
            const bool last = t + 1 == n;
            if (last ? !truncated : s[t + 1] != v.loc()) check.violations.push_back(t);
        } else if (s[t] == v.loc()) {
            if (t == 0 || s[t - 1] != v.bb()) check.violations.push_back(t);
        }
    }
    check.ok = check.violations.empty();
    return check;
}

ProtocolCheck validate_single_token_protocol(const Vocabulary& v, const TokenSeq& s) {
    ProtocolCheck check;
    for (std::size_t t = 0; t < s.size(); ++t) {
        if (s[t] == v.bb()) check.violations.push_back(t);
    }
    check.ok = check.violations.empty();
    return check;
}

std::vector<bool> loss_mask(const Vocabulary& v, const TokenSeq& targets) {
    std::vector<bool> flags(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        flags[t] = targets[t] != v.loc() && targets[t] != v.pad();
    }
    return flags;
}

std::vector<bool> single_token_loss_mask(const Vocabulary& v, const TokenSeq& targets) {
    std::vector<bool> flags(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) flags[t] = targets[t] != v.pad();
    return flags;
}

std::size_t count_boxes(const Vocabulary& v, const TokenSeq& s) {
    auto check = validate_protocol(v, s);
    if (!check.ok) {
        throw std::invalid_argument("count_boxes: protocol violation at position " +
                                    std::to_string(check.violations.front()));
    }
    return static_cast<std::size_t>(std::count(s.ids.begin(), s.ids.end(), v.loc()));
}

TokenSeq remove_bb_tokens(const Vocabulary& v, const TokenSeq& s) {
    TokenSeq out;
    out.ids.reserve(s.size());
    std::copy_if(s.ids.begin(), s.ids.end(), std::back_inserter(out.ids), [&](TokenId id) { return id != v.bb(); });
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace vlg
