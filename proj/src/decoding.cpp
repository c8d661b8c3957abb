// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vlg {

template <typename T>
Generation greedy_generate(const Model<T>& model, const Vocabulary& v, const ImageRaster& img, const TokenSeq& query,
                           std::size_t max_len, DecodeStats* stats) {
    if (query.empty()) throw std::invalid_argument("greedy_generate: empty query");
    const bool dual = model.config.dual_token;
    const auto budget = static_cast<std::size_t>(model.config.max_seq_len);

    const Mat<T> visual = encode_image(model, img);
    const auto P = static_cast<std::size_t>(visual.rows());
    KvCache<T> cache;
    Mat<T> prefix(static_cast<Eigen::Index>(P + query.size()), model.config.embed_dim);
    prefix.topRows(static_cast<Eigen::Index>(P)) = visual + positions(model, 0, P);
    prefix.bottomRows(static_cast<Eigen::Index>(query.size())) = embed_tokens(model, query, P);
    const Mat<T> prefix_hidden = decoder_extend(model, cache, prefix);
    Mat<T> hidden = prefix_hidden.bottomRows(1);

    Generation gen;
    std::vector<Mat<T>> loc_states;
    TokenId prev = query.ids.back();
    const TokenId masked = dual ? v.loc() : v.bb();
    while (true) {
        if (prev == v.eos()) break;
        if (gen.answer.size() >= max_len) {
            gen.truncated = true;
            break;
        }
        TokenId next;
        if (dual && prev == v.bb()) {
            next = v.loc();
            if (stats) ++stats->deterministic_locs;
        } else {
            if (stats) {
                ++stats->lm_head_calls;
                if (prev == v.bb()) ++stats->lm_head_calls_after_bb;
            }
            const Mat<T> logits = lm_head(model, hidden);
            next = -1;
            T best = -std::numeric_limits<T>::infinity();
            for (Eigen::Index k = 0; k < logits.cols(); ++k) {
                if (static_cast<TokenId>(k) == masked) continue;
                if (next < 0 || logits(0, k) > best) {
                    best = logits(0, k);
                    next = static_cast<TokenId>(k);
                }
            }
        }
        if (next == v.loc()) {
            gen.loc_positions.push_back(gen.answer.size());
            loc_states.push_back(hidden);
        }
        gen.answer.ids.push_back(next);
        prev = next;
        if (next == v.eos()) break;
        if (gen.answer.size() >= max_len || cache.length + 1 > budget) {
            gen.truncated = true;
            break;
        }
        TokenSeq one;
        one.ids.push_back(next);
        hidden = decoder_extend(model, cache, embed_tokens(model, one, cache.length));
    }

    Mat<T> locs(static_cast<Eigen::Index>(loc_states.size()), model.config.embed_dim);
    for (std::size_t i = 0; i < loc_states.size(); ++i) locs.row(static_cast<Eigen::Index>(i)) = loc_states[i];
    const Mat<T> out = grounding_head(model, locs);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        OrientedBox b{static_cast<double>(out(i, 0)), static_cast<double>(out(i, 1)), static_cast<double>(out(i, 2)),
                      static_cast<double>(out(i, 3)), static_cast<double>(out(i, 4))};
        if (b.x1 > b.x2) std::swap(b.x1, b.x2);
        if (b.y1 > b.y2) std::swap(b.y1, b.y2);
        for (double* c : {&b.x1, &b.y1, &b.x2, &b.y2}) *c = std::clamp(*c, 0.0, kNormalizedExtent);
        b.theta -= kNormalizedExtent * std::floor(b.theta / kNormalizedExtent);
        if (b.theta >= kNormalizedExtent) b.theta = 0.0;
        gen.boxes.push_back(b);
    }
    return gen;
}

template <typename T>
std::vector<Generation> batch_generate(const Model<T>& model, const Vocabulary& v,
                                       const std::vector<GroundedSample>& samples, std::size_t max_len,
                                       DecodeStats* stats) {
    std::vector<Generation> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        try {
            out.push_back(greedy_generate(model, v, samples[i].image, samples[i].query, max_len, stats));
        } catch (const std::exception& e) {
            throw std::runtime_error("sample " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

template Generation greedy_generate<float>(const Model<float>&, const Vocabulary&, const ImageRaster&,
                                           const TokenSeq&, std::size_t, DecodeStats*);
template Generation greedy_generate<double>(const Model<double>&, const Vocabulary&, const ImageRaster&,
                                            const TokenSeq&, std::size_t, DecodeStats*);
template std::vector<Generation> batch_generate<float>(const Model<float>&, const Vocabulary&,
                                                       const std::vector<GroundedSample>&, std::size_t,
                                                       DecodeStats*);
template std::vector<Generation> batch_generate<double>(const Model<double>&, const Vocabulary&,
                                                        const std::vector<GroundedSample>&, std::size_t,
                                                        DecodeStats*);

}  // namespace vlg
