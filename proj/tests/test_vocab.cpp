// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <stdexcept>

#include "vlg/vocab.hpp"

using namespace vlg;

namespace {

const std::string bb(kBb), loc(kLoc), eos(kEos), pad(kPad), bos(kBos);

}  // namespace

TEST_CASE("build_vocab sizes and control ids") {
    CHECK(build_vocab({"a"}).size() == 6);
    CHECK(build_vocab({}).size() == 5);
    const auto v = build_vocab({"plane", "ship"});
    CHECK(v.bos() == 2);
    CHECK(v.eos() == 3);
    CHECK(v.pad() == 4);
    CHECK(v.bb() == 5);
    CHECK(v.loc() == 6);
    CHECK(v.bb() != v.loc());
    CHECK(v.token(v.loc()) == loc);
    for (TokenId i = 0; i < static_cast<TokenId>(v.size()); ++i) CHECK(v.id(v.token(i)) == i);
}

TEST_CASE("build_vocab rejects duplicates and control literals") {
    try {
        build_vocab({"plane", "plane"});
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("\"plane\"") != std::string::npos);
    }
    CHECK_THROWS_AS(build_vocab({bb}), std::invalid_argument);
    CHECK_THROWS_AS(build_vocab({""}), std::invalid_argument);
}

TEST_CASE("encode and decode") {
    const auto v = build_vocab({"a", "plane"});
    const auto s = encode(v, {bos, "a", eos});
    CHECK(s.ids == std::vector<TokenId>{v.bos(), v.id("a"), v.eos()});
    CHECK(encode(v, {}).empty());
    const auto p = encode(v, {"plane", bb, loc});
    CHECK(p.size() == 3);
    CHECK(p[1] == v.bb());
    CHECK(p[2] == v.loc());
    const std::vector<std::string> words{"plane", bb, loc, "a", eos};
    CHECK(decode(v, encode(v, words)) == words);
    try {
        encode(v, {"tank"});
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("tank") != std::string::npos);
    }
}

TEST_CASE("validate_protocol") {
    const auto v = build_vocab({"plane"});
    CHECK(validate_protocol(v, encode(v, {bb, loc})).ok);
    auto c = validate_protocol(v, encode(v, {loc}));
    CHECK_FALSE(c.ok);
    CHECK(c.violations == std::vector<std::size_t>{0});
    c = validate_protocol(v, encode(v, {bb, "plane"}));
    CHECK(c.violations == std::vector<std::size_t>{0});
    c = validate_protocol(v, encode(v, {"plane", bb}));
    CHECK(c.violations == std::vector<std::size_t>{1});
    CHECK(validate_protocol(v, encode(v, {"plane", bb}), true).ok);
    c = validate_protocol(v, encode(v, {loc, bb, bb, loc, "plane", loc}));
    CHECK(c.violations == std::vector<std::size_t>{0, 1, 5});
}

TEST_CASE("loss_mask") {
    const auto v = build_vocab({"plane", "a", "b"});
    CHECK(loss_mask(v, encode(v, {"plane", bb, loc, eos})) == std::vector<bool>{true, true, false, true});
    CHECK(loss_mask(v, encode(v, {pad, pad})) == std::vector<bool>{false, false});
    CHECK(loss_mask(v, encode(v, {"a", "b"})) == std::vector<bool>{true, true});
    CHECK(single_token_loss_mask(v, encode(v, {"plane", loc, pad})) == std::vector<bool>{true, true, false});
}

TEST_CASE("count_boxes") {
    const auto v = build_vocab({"and", "no", "objects"});
    CHECK(count_boxes(v, encode(v, {bb, loc, "and", bb, loc})) == 2);
    CHECK(count_boxes(v, encode(v, {"no", "objects", eos})) == 0);
    CHECK(count_boxes(v, encode(v, {bb, loc})) == 1);
    CHECK_THROWS_AS(count_boxes(v, encode(v, {loc})), std::invalid_argument);
}

TEST_CASE("remove_bb_tokens") {
    const auto v = build_vocab({"plane"});
    CHECK(remove_bb_tokens(v, encode(v, {"plane", bb, loc, eos})) == encode(v, {"plane", loc, eos}));
}

TEST_CASE("vocabulary file round trip and hash") {
    const auto v = build_vocab({"x", "y"});
    const auto text = v.serialize();
    CHECK(text == "x\ny\n" + bos + "\n" + eos + "\n" + pad + "\n" + bb + "\n" + loc + "\n");
    CHECK(Vocabulary::parse(text) == v);
    CHECK(v.content_hash().size() == 16);
    CHECK(v.content_hash() == Vocabulary::parse(text).content_hash());
    CHECK(v.content_hash() != build_vocab({"y", "x"}).content_hash());
    CHECK(to_hex(fnv1a64("")) == "cbf29ce484222325");
    CHECK(to_hex(fnv1a64("a")) == "af63dc4c8601ec8c");
}
