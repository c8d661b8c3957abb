// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "vlg/geometry.hpp"
#include "vlg/net.hpp"
#include "vlg/sample.hpp"
#include "vlg/vocab.hpp"

namespace vlg {

struct Generation {
    TokenSeq answer;
    std::vector<OrientedBox> boxes;
    std::vector<std::size_t> loc_positions;  // indices into answer
    bool truncated = false;
};

/// Instrumentation counters for one or more generations.
struct DecodeStats {
    std::size_t lm_head_calls = 0;
    /// Calls made at a position whose previous token is ⟨bb⟩. Always 0.
    std::size_t lm_head_calls_after_bb = 0;
    std::size_t deterministic_locs = 0;
};

/// Greedy decoding with a KV cache. In dual-token mode ⟨loc⟩ follows every
/// ⟨bb⟩ without consulting the language head and its logit is masked
/// otherwise; in single-token mode ⟨bb⟩ is masked and ⟨loc⟩ is sampled.
/// Boxes come from one grounding-head call over the collected states. Stops
/// after ⟨eos⟩, at max_len answer tokens, or at the model's sequence budget.
template <typename T>
Generation greedy_generate(const Model<T>& model, const Vocabulary& v, const ImageRaster& img, const TokenSeq& query,
                           std::size_t max_len, DecodeStats* stats = nullptr);

/// Element-wise greedy_generate. Errors are rethrown as std::runtime_error
/// naming the sample index.
template <typename T>
std::vector<Generation> batch_generate(const Model<T>& model, const Vocabulary& v,
                                       const std::vector<GroundedSample>& samples, std::size_t max_len,
                                       DecodeStats* stats = nullptr);

}  // namespace vlg
