// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

// Small fixtures shared by the unit tests and the acceptance runner.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlg/net.hpp"
#include "vlg/random.hpp"
#include "vlg/sample.hpp"
#include "vlg/vocab.hpp"

namespace vlg::testing {

inline Vocabulary micro_vocab() { return build_vocab({"a", "b", "c"}); }

/// D=8, one layer: the configuration of the gradient checks.
inline ModelConfig micro_config(const Vocabulary& v) {
    ModelConfig mc;
    mc.embed_dim = 8;
    mc.num_layers = 1;
    mc.num_heads = 2;
    mc.patch_size = 4;
    mc.max_seq_len = 64;
    mc.vocab_size = static_cast<int>(v.size());
    mc.grounding_hidden_dim = 6;
    mc.ffn_multiplier = 2;
    return mc;
}

inline ImageRaster random_image(int h, int w, Rng& rng) {
    ImageRaster img(h, w);
    for (auto& p : img.pixels) p = static_cast<float>(rng.uniform());
    return img;
}

inline OrientedBox random_box(Rng& rng) {
    const double x1 = rng.uniform(0, 60), y1 = rng.uniform(0, 60);
    return {x1, y1, x1 + rng.uniform(5, 40), y1 + rng.uniform(5, 40), rng.uniform(0, 100)};
}

/// One sample over micro_vocab with `boxes` ⟨bb⟩⟨loc⟩ pairs, text tokens
/// drawn at random around them.
inline GroundedSample micro_sample(const Vocabulary& v, int boxes, Rng& rng, int image_side = 8) {
    GroundedSample s;
    s.image = random_image(image_side, image_side, rng);
    const std::vector<std::string> words{"a", "b", "c"};
    auto word = [&] { return v.id(words[rng.below(words.size())]); };
    s.query.ids = {v.bos(), word(), word()};
    s.answer.ids.push_back(word());
    for (int i = 0; i < boxes; ++i) {
        s.answer.ids.push_back(v.bb());
        s.answer.ids.push_back(v.loc());
        s.boxes.push_back(random_box(rng));
        if (rng.below(2) == 0) s.answer.ids.push_back(word());
    }
    s.answer.ids.push_back(v.eos());
    return s;
}

}  // namespace vlg::testing
