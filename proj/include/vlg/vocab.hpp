// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vlg {

using TokenId = std::int32_t;

/// Literal spellings of the five control tokens. They occupy the last five
/// ids of every vocabulary, in this order.
inline constexpr std::string_view kBos = "⟨bos⟩";
inline constexpr std::string_view kEos = "⟨eos⟩";
inline constexpr std::string_view kPad = "⟨pad⟩";
inline constexpr std::string_view kBb = "⟨bb⟩";
inline constexpr std::string_view kLoc = "⟨loc⟩";
inline constexpr std::size_t kNumControlTokens = 5;

struct TokenSeq {
    std::vector<TokenId> ids;

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }
    TokenId operator[](std::size_t i) const { return ids[i]; }
    bool operator==(const TokenSeq&) const = default;
};

/// Text tokens followed by the control tokens; ids are dense in [0, size()).
class Vocabulary {
public:
    Vocabulary() = default;

    /// Throws std::invalid_argument on a duplicate or a control-literal collision.
    explicit Vocabulary(std::vector<std::string> text_tokens);

    std::size_t size() const { return tokens_.size(); }
    std::size_t num_text_tokens() const { return tokens_.size() - kNumControlTokens; }

    TokenId bos() const { return first_control_ + 0; }
    TokenId eos() const { return first_control_ + 1; }
    TokenId pad() const { return first_control_ + 2; }
    TokenId bb() const { return first_control_ + 3; }
    TokenId loc() const { return first_control_ + 4; }
    bool is_control(TokenId id) const { return id >= first_control_ && id < static_cast<TokenId>(size()); }

    bool contains(std::string_view word) const;
    TokenId id(std::string_view word) const;
    const std::string& token(TokenId id) const;
    const std::vector<std::string>& tokens() const { return tokens_; }

    /// One token literal per line, line number = id.
    std::string serialize() const;
    static Vocabulary parse(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

    /// 16 hex digits; FNV-1a 64 over serialize().
    std::string content_hash() const;

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
    TokenId first_control_ = 0;
};

Vocabulary build_vocab(const std::vector<std::string>& text_tokens);

/// Throws std::invalid_argument naming the first unknown word.
TokenSeq encode(const Vocabulary& v, const std::vector<std::string>& words);
std::vector<std::string> decode(const Vocabulary& v, const TokenSeq& s);

struct ProtocolCheck {
    bool ok = true;
    std::vector<std::size_t> violations;
};

/// Checks that every ⟨bb⟩ is followed by ⟨loc⟩ and every ⟨loc⟩ is preceded
/// by ⟨bb⟩. With `truncated`, a trailing ⟨bb⟩ is tolerated.
ProtocolCheck validate_protocol(const Vocabulary& v, const TokenSeq& s, bool truncated = false);

/// Single-token variant: ⟨bb⟩ must not occur, ⟨loc⟩ may appear anywhere.
ProtocolCheck validate_single_token_protocol(const Vocabulary& v, const TokenSeq& s);

/// true where the target contributes to the token cross-entropy:
/// false for ⟨loc⟩ and ⟨pad⟩ targets.
std::vector<bool> loss_mask(const Vocabulary& v, const TokenSeq& targets);

/// Single-token mode keeps ⟨loc⟩ predictable; only ⟨pad⟩ is masked.
std::vector<bool> single_token_loss_mask(const Vocabulary& v, const TokenSeq& targets);

/// Number of boxes announced by the sequence. Throws std::invalid_argument on
/// a protocol violation.
std::size_t count_boxes(const Vocabulary& v, const TokenSeq& s);

/// Drops every ⟨bb⟩, leaving ⟨loc⟩ to both announce and locate a box.
TokenSeq remove_bb_tokens(const Vocabulary& v, const TokenSeq& s);

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t value);

}  // namespace vlg
