// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vlg/image.hpp"
#include "vlg/vocab.hpp"

namespace vlg {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kBoxParams = 5;

struct ModelConfig {
    int embed_dim = 64;
    int num_layers = 2;
    int num_heads = 4;
    int patch_size = 8;
    int max_seq_len = 256;
    int vocab_size = 0;
    int grounding_hidden_dim = 64;
    int ffn_multiplier = 4;
    /// Output of the grounding head is 100 * sigmoid(z) when set, raw z otherwise.
    bool squash_boxes = true;
    /// ⟨bb⟩⟨loc⟩ pairs when set; a single ⟨loc⟩ per box otherwise.
    bool dual_token = true;

    int patch_dim() const { return patch_size * patch_size * 3; }
    int head_dim() const { return embed_dim / num_heads; }
    int ffn_dim() const { return embed_dim * ffn_multiplier; }

    /// Throws std::invalid_argument when a dimension is non-positive or
    /// embed_dim is not divisible by num_heads.
    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct LayerParams {
    Mat<T> ln1_g, ln1_b;
    Mat<T> wq, bq, wk, bk, wv, bv, wo, bo;
    Mat<T> ln2_g, ln2_b;
    Mat<T> ff1_w, ff1_b, ff2_w, ff2_b;
};

/// Every learnable array. Row vectors are stored as 1 x n matrices.
template <typename T>
struct Params {
    Mat<T> patch_w, patch_b;      // visual encoder: patch_dim -> D
    Mat<T> proj1_w, proj1_b;      // projector, two affine layers
    Mat<T> proj2_w, proj2_b;
    Mat<T> tok_emb;               // |V| x D
    Mat<T> pos_emb;               // max_seq_len x D
    std::vector<LayerParams<T>> layers;
    Mat<T> lnf_g, lnf_b;
    Mat<T> head_w, head_b;        // language head: D -> |V|
    Mat<T> ground1_w, ground1_b;  // grounding head: D -> G -> 5
    Mat<T> ground2_w, ground2_b;

    /// Declaration order; this is the checkpoint order.
    std::vector<std::pair<std::string, Mat<T>*>> named();
    std::vector<std::pair<std::string, const Mat<T>*>> named() const;

    static Params zeros(const ModelConfig& config);
    void set_zero();
    std::size_t num_values() const;

    template <typename U>
    Params<U> cast() const;
};

template <typename T>
template <typename U>
Params<U> Params<T>::cast() const {
    Params<U> out;
    out.layers.resize(layers.size());
    const auto src = named();
    auto dst = out.named();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i].second = src[i].second->template cast<U>();
    return out;
}

template <typename T>
struct Model {
    ModelConfig config;
    Params<T> params;

    template <typename U>
    Model<U> cast() const {
        return {config, params.template cast<U>()};
    }
};

/// Weights uniform in +-1/sqrt(fan_in), biases zero, norm gains one,
/// embedding tables uniform in +-0.5.
template <typename T>
Model<T> init_model(const ModelConfig& config, std::uint64_t seed);

/// (H/p * W/p) x (p*p*3) patch matrix in raster order. Throws when H or W
/// is not a positive multiple of the patch size.
template <typename T>
Mat<T> image_patches(const ImageRaster& img, int patch_size);

/// Projector output for every patch, P x D. No positional term.
template <typename T>
Mat<T> encode_image(const Model<T>& model, const ImageRaster& img);

/// Patch-embedding output before the projector.
template <typename T>
Mat<T> visual_features(const Model<T>& model, const ImageRaster& img);

/// Token-table rows plus positional rows starting at `offset`.
template <typename T>
Mat<T> embed_tokens(const Model<T>& model, const TokenSeq& s, std::size_t offset = 0);

template <typename T>
struct StepOutput {
    Mat<T> hidden;  // one row per input position, after the final norm
    Mat<T> logits;  // one row per input position
};

/// Causal decoder over [visual + positions ; token embeddings]. Throws
/// std::length_error when the total exceeds max_seq_len.
template <typename T>
StepOutput<T> decoder_forward(const Model<T>& model, const Mat<T>& visual, const TokenSeq& tokens);

template <typename T>
Mat<T> lm_head(const Model<T>& model, const Mat<T>& hidden);

template <typename T>
Mat<T> grounding_head(const Model<T>& model, const Mat<T>& loc_hidden);

/// Per-layer keys and values of everything processed so far.
template <typename T>
struct KvCache {
    std::vector<Mat<T>> keys;
    std::vector<Mat<T>> values;
    std::size_t length = 0;
};

/// Appends `rows` (embeddings with positions already added) to the cache and
/// returns their final hidden states.
template <typename T>
Mat<T> decoder_extend(const Model<T>& model, KvCache<T>& cache, const Mat<T>& rows);

/// Positional rows [offset, offset + n).
template <typename T>
Mat<T> positions(const Model<T>& model, std::size_t offset, std::size_t n);

// ---- training path ------------------------------------------------------

template <typename T>
struct LayerTape {
    Mat<T> x_in;
    Mat<T> ln1_xhat, ln1_rstd, xn1;
    Mat<T> q, k, v;
    std::vector<Mat<T>> probs;  // per head, S x S
    Mat<T> attn;                // concatenated head outputs
    Mat<T> x_mid;
    Mat<T> ln2_xhat, ln2_rstd, xn2;
    Mat<T> ff_pre, ff_act;
};

template <typename T>
struct ForwardTape {
    Mat<T> patches, vis0;
    Mat<T> proj_pre, proj_act;
    std::vector<TokenId> tokens;
    std::size_t num_visual = 0;
    std::vector<LayerTape<T>> layers;
    Mat<T> final_in, lnf_xhat, lnf_rstd;
    Mat<T> hidden;
};

template <typename T>
ForwardTape<T> forward_train(const Model<T>& model, const ImageRaster& img, const TokenSeq& tokens);

/// Accumulates parameter gradients of a scalar loss given d loss / d hidden
/// for every position. With `freeze_visual`, the patch embedding gets none.
template <typename T>
void backward(const Model<T>& model, const ForwardTape<T>& tape, const Mat<T>& d_hidden, Params<T>& grads,
              bool freeze_visual = false);

/// Language head backward for the given hidden rows; returns d hidden.
template <typename T>
Mat<T> lm_head_backward(const Model<T>& model, const Mat<T>& hidden, const Mat<T>& d_logits, Params<T>& grads);

template <typename T>
struct GroundingTape {
    Mat<T> input, pre1, act1, pre2, out;
};

template <typename T>
GroundingTape<T> grounding_forward(const Model<T>& model, const Mat<T>& loc_hidden);

template <typename T>
Mat<T> grounding_backward(const Model<T>& model, const GroundingTape<T>& tape, const Mat<T>& d_out,
                          Params<T>& grads);

}  // namespace vlg
