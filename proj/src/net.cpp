// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/net.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vlg/random.hpp"

namespace vlg {

void ModelConfig::validate() const {
    if (embed_dim <= 0 || num_layers <= 0 || num_heads <= 0 || patch_size <= 0 || max_seq_len <= 0 ||
        vocab_size <= 0 || grounding_hidden_dim <= 0 || ffn_multiplier <= 0) {
        throw std::invalid_argument("model config: all dimensions must be positive");
    }
    if (embed_dim % num_heads != 0) {
        throw std::invalid_argument("model config: embed_dim must be divisible by num_heads");
    }
}

// ---- parameter bookkeeping ----------------------------------------------

template <typename T>
std::vector<std::pair<std::string, Mat<T>*>> Params<T>::named() {
    std::vector<std::pair<std::string, Mat<T>*>> out = {
        {"patch_w", &patch_w}, {"patch_b", &patch_b}, {"proj1_w", &proj1_w}, {"proj1_b", &proj1_b},
        {"proj2_w", &proj2_w}, {"proj2_b", &proj2_b}, {"tok_emb", &tok_emb}, {"pos_emb", &pos_emb},
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& L = layers[l];
        const std::string p = "layer" + std::to_string(l) + ".";
        for (auto [name, m] : std::initializer_list<std::pair<const char*, Mat<T>*>>{
                 {"ln1_g", &L.ln1_g}, {"ln1_b", &L.ln1_b}, {"wq", &L.wq},       {"bq", &L.bq},
                 {"wk", &L.wk},       {"bk", &L.bk},       {"wv", &L.wv},       {"bv", &L.bv},
                 {"wo", &L.wo},       {"bo", &L.bo},       {"ln2_g", &L.ln2_g}, {"ln2_b", &L.ln2_b},
                 {"ff1_w", &L.ff1_w}, {"ff1_b", &L.ff1_b}, {"ff2_w", &L.ff2_w}, {"ff2_b", &L.ff2_b}}) {
            out.emplace_back(p + name, m);
        }
    }
    for (auto [name, m] : std::initializer_list<std::pair<const char*, Mat<T>*>>{{"lnf_g", &lnf_g},
                                                                                 {"lnf_b", &lnf_b},
                                                                                 {"head_w", &head_w},
                                                                                 {"head_b", &head_b},
                                                                                 {"ground1_w", &ground1_w},
                                                                                 {"ground1_b", &ground1_b},
                                                                                 {"ground2_w", &ground2_w},
                                                                                 {"ground2_b", &ground2_b}}) {
        out.emplace_back(name, m);
    }
    return out;
}

template <typename T>
std::vector<std::pair<std::string, const Mat<T>*>> Params<T>::named() const {
    auto mut = const_cast<Params<T>*>(this)->named();
    std::vector<std::pair<std::string, const Mat<T>*>> out;
    out.reserve(mut.size());
    for (auto& [name, m] : mut) out.emplace_back(std::move(name), m);
    return out;
}

template <typename T>
Params<T> Params<T>::zeros(const ModelConfig& c) {
    c.validate();
    const int D = c.embed_dim;
    const int F = c.ffn_dim();
    const int V = c.vocab_size;
    const int G = c.grounding_hidden_dim;
    Params<T> p;
    auto z = [](int r, int k) { return Mat<T>::Zero(r, k); };
    p.patch_w = z(c.patch_dim(), D);
    p.patch_b = z(1, D);
    p.proj1_w = z(D, D);
    p.proj1_b = z(1, D);
    p.proj2_w = z(D, D);
    p.proj2_b = z(1, D);
    p.tok_emb = z(V, D);
    p.pos_emb = z(c.max_seq_len, D);
    p.layers.resize(static_cast<std::size_t>(c.num_layers));
    for (auto& L : p.layers) {
        L.ln1_g = z(1, D);
        L.ln1_b = z(1, D);
        L.wq = z(D, D);
        L.bq = z(1, D);
        L.wk = z(D, D);
        L.bk = z(1, D);
        L.wv = z(D, D);
        L.bv = z(1, D);
        L.wo = z(D, D);
        L.bo = z(1, D);
        L.ln2_g = z(1, D);
        L.ln2_b = z(1, D);
        L.ff1_w = z(D, F);
        L.ff1_b = z(1, F);
        L.ff2_w = z(F, D);
        L.ff2_b = z(1, D);
    }
    p.lnf_g = z(1, D);
    p.lnf_b = z(1, D);
    p.head_w = z(D, V);
    p.head_b = z(1, V);
    p.ground1_w = z(D, G);
    p.ground1_b = z(1, G);
    p.ground2_w = z(G, kBoxParams);
    p.ground2_b = z(1, kBoxParams);
    return p;
}

template <typename T>
void Params<T>::set_zero() {
    for (auto& [_, m] : named()) m->setZero();
}

template <typename T>
std::size_t Params<T>::num_values() const {
    std::size_t n = 0;
    for (const auto& [_, m] : named()) n += static_cast<std::size_t>(m->size());
    return n;
}

template <typename T>
Model<T> init_model(const ModelConfig& config, std::uint64_t seed) {
    Model<T> model{config, Params<T>::zeros(config)};
    Rng rng(seed);
    auto fill_uniform = [&rng](Mat<T>& m, double bound) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
    };
    for (auto& [name, m] : model.params.named()) {
        const bool is_gain = name.ends_with("_g");
        const bool is_bias = name.ends_with("_b") || name.ends_with(".bq") || name.ends_with(".bk") ||
                             name.ends_with(".bv") || name.ends_with(".bo");
        if (is_gain) {
            m->setOnes();
        } else if (is_bias) {
            m->setZero();
        } else if (name == "tok_emb" || name == "pos_emb") {
            fill_uniform(*m, 0.5);
        } else {
            fill_uniform(*m, 1.0 / std::sqrt(static_cast<double>(m->rows())));
        }
    }
    return model;
}

// ---- primitives ---------------------------------------------------------

namespace {

template <typename T>
constexpr T kLnEps = T(1e-5);

template <typename T>
T gelu(T x) {
    const T k = T(0.7978845608028654);
    const T u = k * (x + T(0.044715) * x * x * x);
    return T(0.5) * x * (T(1) + std::tanh(u));
}

template <typename T>
T gelu_grad(T x) {
    const T k = T(0.7978845608028654);
    const T u = k * (x + T(0.044715) * x * x * x);
    const T t = std::tanh(u);
    return T(0.5) * (T(1) + t) + T(0.5) * x * (T(1) - t * t) * k * (T(1) + T(3 * 0.044715) * x * x);
}

template <typename T>
T sigmoid(T z) {
    if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
    const T e = std::exp(z);
    return e / (T(1) + e);
}

template <typename T>
void layer_norm(const Mat<T>& x, const Mat<T>& g, const Mat<T>& b, Mat<T>& xhat, Mat<T>& rstd, Mat<T>& y) {
    const auto n = x.rows();
    const auto d = x.cols();
    xhat.resize(n, d);
    rstd.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const T mean = x.row(i).mean();
        auto centered = (x.row(i).array() - mean).matrix();
        const T var = centered.squaredNorm() / static_cast<T>(d);
        const T r = T(1) / std::sqrt(var + kLnEps<T>);
        xhat.row(i) = centered * r;
        rstd(i, 0) = r;
    }
    y = (xhat.array().rowwise() * g.row(0).array()).rowwise() + b.row(0).array();
}

template <typename T>
Mat<T> layer_norm_backward(const Mat<T>& dy, const Mat<T>& xhat, const Mat<T>& rstd, const Mat<T>& g, Mat<T>& dg,
                           Mat<T>& db) {
    dg += (dy.array() * xhat.array()).colwise().sum().matrix();
    db += dy.colwise().sum();
    Mat<T> dxhat = (dy.array().rowwise() * g.row(0).array()).matrix();
    Mat<T> dx(dy.rows(), dy.cols());
    const T inv_d = T(1) / static_cast<T>(dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const T mean_d = dxhat.row(i).sum() * inv_d;
        const T mean_dx = dxhat.row(i).dot(xhat.row(i)) * inv_d;
        dx.row(i) = rstd(i, 0) * (dxhat.row(i).array() - mean_d - xhat.row(i).array() * mean_dx).matrix();
    }
    return dx;
}

template <typename T>
Mat<T> affine(const Mat<T>& x, const Mat<T>& w, const Mat<T>& b) {
    Mat<T> y(x.rows(), w.cols());
    y.noalias() = x * w;
    y.rowwise() += b.row(0);
    return y;
}

template <typename T>
Mat<T> affine_backward(const Mat<T>& x, const Mat<T>& w, const Mat<T>& dy, Mat<T>& dw, Mat<T>& db) {
    dw.noalias() += x.transpose() * dy;
    db += dy.colwise().sum();
    Mat<T> dx(dy.rows(), w.rows());
    dx.noalias() = dy * w.transpose();
    return dx;
}

template <typename T>
Mat<T> apply_gelu(const Mat<T>& x) {
    return x.unaryExpr([](T v) { return gelu(v); });
}

template <typename T>
Mat<T> gelu_backward(const Mat<T>& x, const Mat<T>& dy) {
    return (dy.array() * x.unaryExpr([](T v) { return gelu_grad(v); }).array()).matrix();
}

// Causal attention of `n` new rows at absolute offset `p0` against every key
// in `keys` / `values` (which already include the new rows).
template <typename T>
Mat<T> attention(const ModelConfig& c, const Mat<T>& q, const Mat<T>& keys, const Mat<T>& values, std::size_t p0,
                 std::vector<Mat<T>>* probs_out) {
    const auto n = q.rows();
    const auto total = keys.rows();
    const int dh = c.head_dim();
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));
    Mat<T> out(n, c.embed_dim);
    if (probs_out) probs_out->resize(static_cast<std::size_t>(c.num_heads));
    Mat<T> scores(n, total);
    for (int h = 0; h < c.num_heads; ++h) {
        const auto col = static_cast<Eigen::Index>(h) * dh;
        scores.noalias() = q.middleCols(col, dh) * keys.middleCols(col, dh).transpose();
        scores *= scale;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto valid = static_cast<Eigen::Index>(p0) + i + 1;
            auto row = scores.row(i);
            const T mx = row.head(valid).maxCoeff();
            T sum = T(0);
            for (Eigen::Index j = 0; j < valid; ++j) {
                row(j) = std::exp(row(j) - mx);
                sum += row(j);
            }
            row.head(valid) /= sum;
            if (valid < total) row.tail(total - valid).setZero();
        }
        out.middleCols(col, dh).noalias() = scores * values.middleCols(col, dh);
        if (probs_out) (*probs_out)[static_cast<std::size_t>(h)] = scores;
    }
    return out;
}

template <typename T>
Mat<T> stack_rows(const Mat<T>& top, const Mat<T>& bottom) {
    Mat<T> out(top.rows() + bottom.rows(), bottom.cols());
    if (top.rows() > 0) out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

template <typename T>
Mat<T> layer_forward(const ModelConfig& c, const LayerParams<T>& L, const Mat<T>& x, std::size_t p0, Mat<T>* cache_k,
                     Mat<T>* cache_v, LayerTape<T>* tape) {
    Mat<T> xhat1, rstd1, xn1;
    layer_norm(x, L.ln1_g, L.ln1_b, xhat1, rstd1, xn1);
    Mat<T> q = affine(xn1, L.wq, L.bq);
    Mat<T> k = affine(xn1, L.wk, L.bk);
    Mat<T> v = affine(xn1, L.wv, L.bv);
    Mat<T> keys, values;
    if (cache_k) {
        *cache_k = stack_rows(*cache_k, k);
        *cache_v = stack_rows(*cache_v, v);
    }
    const Mat<T>& kk = cache_k ? *cache_k : k;
    const Mat<T>& vv = cache_v ? *cache_v : v;
    std::vector<Mat<T>> probs;
    Mat<T> attn = attention(c, q, kk, vv, p0, tape ? &probs : nullptr);
    Mat<T> x_mid = x + affine(attn, L.wo, L.bo);
    Mat<T> xhat2, rstd2, xn2;
    layer_norm(x_mid, L.ln2_g, L.ln2_b, xhat2, rstd2, xn2);
    Mat<T> ff_pre = affine(xn2, L.ff1_w, L.ff1_b);
    Mat<T> ff_act = apply_gelu(ff_pre);
    Mat<T> out = x_mid + affine(ff_act, L.ff2_w, L.ff2_b);
    if (tape) {
        tape->x_in = x;
        tape->ln1_xhat = std::move(xhat1);
        tape->ln1_rstd = std::move(rstd1);
        tape->xn1 = std::move(xn1);
        tape->q = std::move(q);
        tape->k = std::move(k);
        tape->v = std::move(v);
        tape->probs = std::move(probs);
        tape->attn = std::move(attn);
        tape->x_mid = std::move(x_mid);
        tape->ln2_xhat = std::move(xhat2);
        tape->ln2_rstd = std::move(rstd2);
        tape->xn2 = std::move(xn2);
        tape->ff_pre = std::move(ff_pre);
        tape->ff_act = std::move(ff_act);
    }
    return out;
}

template <typename T>
Mat<T> layer_backward(const ModelConfig& c, const LayerParams<T>& L, const LayerTape<T>& t, const Mat<T>& d_out,
                      LayerParams<T>& g) {
    // feed-forward residual
    Mat<T> d_act = affine_backward(t.ff_act, L.ff2_w, d_out, g.ff2_w, g.ff2_b);
    Mat<T> d_pre = gelu_backward(t.ff_pre, d_act);
    Mat<T> d_xn2 = affine_backward(t.xn2, L.ff1_w, d_pre, g.ff1_w, g.ff1_b);
    Mat<T> d_mid = d_out + layer_norm_backward(d_xn2, t.ln2_xhat, t.ln2_rstd, L.ln2_g, g.ln2_g, g.ln2_b);

    // attention residual
    Mat<T> d_attn = affine_backward(t.attn, L.wo, d_mid, g.wo, g.bo);
    const auto S = t.q.rows();
    const int dh = c.head_dim();
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));
    Mat<T> dq(S, c.embed_dim), dk(S, c.embed_dim), dv(S, c.embed_dim);
    Mat<T> d_probs(S, S);
    for (int h = 0; h < c.num_heads; ++h) {
        const auto col = static_cast<Eigen::Index>(h) * dh;
        const Mat<T>& P = t.probs[static_cast<std::size_t>(h)];
        const auto dO = d_attn.middleCols(col, dh);
        d_probs.noalias() = dO * t.v.middleCols(col, dh).transpose();
        dv.middleCols(col, dh).noalias() = P.transpose() * dO;
        // softmax backward; masked entries have P == 0 and drop out
        for (Eigen::Index i = 0; i < S; ++i) {
            const T inner = P.row(i).dot(d_probs.row(i));
            d_probs.row(i) = (P.row(i).array() * (d_probs.row(i).array() - inner)).matrix();
        }
        d_probs *= scale;
        dq.middleCols(col, dh).noalias() = d_probs * t.k.middleCols(col, dh);
        dk.middleCols(col, dh).noalias() = d_probs.transpose() * t.q.middleCols(col, dh);
    }
    Mat<T> d_xn1 = affine_backward(t.xn1, L.wq, dq, g.wq, g.bq);
    d_xn1 += affine_backward(t.xn1, L.wk, dk, g.wk, g.bk);
    d_xn1 += affine_backward(t.xn1, L.wv, dv, g.wv, g.bv);
    return d_mid + layer_norm_backward(d_xn1, t.ln1_xhat, t.ln1_rstd, L.ln1_g, g.ln1_g, g.ln1_b);
}

template <typename T>
void check_length(const ModelConfig& c, std::size_t total) {
    if (total > static_cast<std::size_t>(c.max_seq_len)) {
        throw std::length_error("sequence of length " + std::to_string(total) + " exceeds max_seq_len " +
                                std::to_string(c.max_seq_len));
    }
}

template <typename T>
Mat<T> input_rows(const Model<T>& model, const Mat<T>& visual, const TokenSeq& tokens) {
    const auto P = static_cast<std::size_t>(visual.rows());
    check_length<T>(model.config, P + tokens.size());
    Mat<T> x(static_cast<Eigen::Index>(P + tokens.size()), model.config.embed_dim);
    if (P > 0) x.topRows(visual.rows()) = visual + positions(model, 0, P);
    if (!tokens.empty()) x.bottomRows(static_cast<Eigen::Index>(tokens.size())) = embed_tokens(model, tokens, P);
    return x;
}

}  // namespace

// ---- forward ------------------------------------------------------------

template <typename T>
Mat<T> image_patches(const ImageRaster& img, int patch_size) {
    if (patch_size <= 0 || img.height <= 0 || img.width <= 0 || img.height % patch_size != 0 ||
        img.width % patch_size != 0) {
        throw std::invalid_argument("image of " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                                    " is not a positive multiple of patch size " + std::to_string(patch_size));
    }
    const int ph = img.height / patch_size;
    const int pw = img.width / patch_size;
    Mat<T> out(ph * pw, patch_size * patch_size * 3);
    for (int py = 0; py < ph; ++py) {
        for (int px = 0; px < pw; ++px) {
            const int row = py * pw + px;
            int k = 0;
            for (int dy = 0; dy < patch_size; ++dy) {
                for (int dx = 0; dx < patch_size; ++dx) {
                    for (int ch = 0; ch < 3; ++ch) {
                        out(row, k++) = static_cast<T>(img.at(py * patch_size + dy, px * patch_size + dx, ch));
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
Mat<T> visual_features(const Model<T>& model, const ImageRaster& img) {
    return affine(image_patches<T>(img, model.config.patch_size), model.params.patch_w, model.params.patch_b);
}

template <typename T>
Mat<T> encode_image(const Model<T>& model, const ImageRaster& img) {
    const auto& p = model.params;
    Mat<T> act = apply_gelu(affine(visual_features(model, img), p.proj1_w, p.proj1_b));
    return affine(act, p.proj2_w, p.proj2_b);
}

template <typename T>
Mat<T> positions(const Model<T>& model, std::size_t offset, std::size_t n) {
    check_length<T>(model.config, offset + n);
    return model.params.pos_emb.middleRows(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(n));
}

template <typename T>
Mat<T> embed_tokens(const Model<T>& model, const TokenSeq& s, std::size_t offset) {
    check_length<T>(model.config, offset + s.size());
    Mat<T> out(static_cast<Eigen::Index>(s.size()), model.config.embed_dim);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto id = s[i];
        if (id < 0 || id >= model.config.vocab_size) {
            throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of size " +
                                    std::to_string(model.config.vocab_size));
        }
        out.row(static_cast<Eigen::Index>(i)) =
            model.params.tok_emb.row(id) + model.params.pos_emb.row(static_cast<Eigen::Index>(offset + i));
    }
    return out;
}

template <typename T>
Mat<T> decoder_extend(const Model<T>& model, KvCache<T>& cache, const Mat<T>& rows) {
    const auto& c = model.config;
    check_length<T>(c, cache.length + static_cast<std::size_t>(rows.rows()));
    const auto L = static_cast<std::size_t>(c.num_layers);
    if (cache.keys.size() != L) {
        cache.keys.assign(L, Mat<T>(0, c.embed_dim));
        cache.values.assign(L, Mat<T>(0, c.embed_dim));
    }
    Mat<T> x = rows;
    for (std::size_t l = 0; l < L; ++l) {
        x = layer_forward<T>(c, model.params.layers[l], x, cache.length, &cache.keys[l], &cache.values[l], nullptr);
    }
    cache.length += static_cast<std::size_t>(rows.rows());
    Mat<T> xhat, rstd, y;
    layer_norm(x, model.params.lnf_g, model.params.lnf_b, xhat, rstd, y);
    return y;
}

template <typename T>
StepOutput<T> decoder_forward(const Model<T>& model, const Mat<T>& visual, const TokenSeq& tokens) {
    Mat<T> x = input_rows(model, visual, tokens);
    for (const auto& L : model.params.layers) x = layer_forward<T>(model.config, L, x, 0, nullptr, nullptr, nullptr);
    StepOutput<T> out;
    Mat<T> xhat, rstd;
    layer_norm(x, model.params.lnf_g, model.params.lnf_b, xhat, rstd, out.hidden);
    out.logits = lm_head(model, out.hidden);
    return out;
}

template <typename T>
Mat<T> lm_head(const Model<T>& model, const Mat<T>& hidden) {
    return affine(hidden, model.params.head_w, model.params.head_b);
}

template <typename T>
GroundingTape<T> grounding_forward(const Model<T>& model, const Mat<T>& loc_hidden) {
    const auto& p = model.params;
    GroundingTape<T> t;
    t.input = loc_hidden;
    if (loc_hidden.rows() == 0) {
        t.out.resize(0, kBoxParams);
        return t;
    }
    t.pre1 = affine(loc_hidden, p.ground1_w, p.ground1_b);
    t.act1 = t.pre1.array().tanh().matrix();
    t.pre2 = affine(t.act1, p.ground2_w, p.ground2_b);
    if (model.config.squash_boxes) {
        t.out = t.pre2.unaryExpr([](T z) { return T(100) * sigmoid(z); });
    } else {
        t.out = t.pre2;
    }
    return t;
}

template <typename T>
Mat<T> grounding_head(const Model<T>& model, const Mat<T>& loc_hidden) {
    return grounding_forward(model, loc_hidden).out;
}

// ---- backward -----------------------------------------------------------

template <typename T>
ForwardTape<T> forward_train(const Model<T>& model, const ImageRaster& img, const TokenSeq& tokens) {
    const auto& p = model.params;
    ForwardTape<T> t;
    t.patches = image_patches<T>(img, model.config.patch_size);
    t.vis0 = affine(t.patches, p.patch_w, p.patch_b);
    t.proj_pre = affine(t.vis0, p.proj1_w, p.proj1_b);
    t.proj_act = apply_gelu(t.proj_pre);
    Mat<T> visual = affine(t.proj_act, p.proj2_w, p.proj2_b);
    t.num_visual = static_cast<std::size_t>(visual.rows());
    t.tokens = tokens.ids;
    Mat<T> x = input_rows(model, visual, tokens);
    t.layers.resize(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        x = layer_forward<T>(model.config, p.layers[l], x, 0, nullptr, nullptr, &t.layers[l]);
    }
    t.final_in = std::move(x);
    layer_norm(t.final_in, p.lnf_g, p.lnf_b, t.lnf_xhat, t.lnf_rstd, t.hidden);
    return t;
}

template <typename T>
void backward(const Model<T>& model, const ForwardTape<T>& t, const Mat<T>& d_hidden, Params<T>& g,
              bool freeze_visual) {
    const auto& p = model.params;
    Mat<T> d = layer_norm_backward(d_hidden, t.lnf_xhat, t.lnf_rstd, p.lnf_g, g.lnf_g, g.lnf_b);
    for (std::size_t l = p.layers.size(); l-- > 0;) {
        d = layer_backward(model.config, p.layers[l], t.layers[l], d, g.layers[l]);
    }
    const auto P = static_cast<Eigen::Index>(t.num_visual);
    const auto S = d.rows();
    g.pos_emb.topRows(S) += d;
    for (Eigen::Index i = P; i < S; ++i) g.tok_emb.row(t.tokens[static_cast<std::size_t>(i - P)]) += d.row(i);

    Mat<T> d_visual = d.topRows(P);
    Mat<T> d_act = affine_backward(t.proj_act, p.proj2_w, d_visual, g.proj2_w, g.proj2_b);
    Mat<T> d_pre = gelu_backward(t.proj_pre, d_act);
    Mat<T> d_vis0 = affine_backward(t.vis0, p.proj1_w, d_pre, g.proj1_w, g.proj1_b);
    if (!freeze_visual) {
        g.patch_w.noalias() += t.patches.transpose() * d_vis0;
        g.patch_b += d_vis0.colwise().sum();
    }
}

template <typename T>
Mat<T> lm_head_backward(const Model<T>& model, const Mat<T>& hidden, const Mat<T>& d_logits, Params<T>& g) {
    return affine_backward(hidden, model.params.head_w, d_logits, g.head_w, g.head_b);
}

template <typename T>
Mat<T> grounding_backward(const Model<T>& model, const GroundingTape<T>& t, const Mat<T>& d_out, Params<T>& g) {
    const auto& p = model.params;
    if (t.input.rows() == 0) return Mat<T>(0, model.config.embed_dim);
    Mat<T> d_pre2 = d_out;
    if (model.config.squash_boxes) {
        for (Eigen::Index i = 0; i < d_pre2.size(); ++i) {
            const T s = sigmoid(t.pre2.data()[i]);
            d_pre2.data()[i] *= T(100) * s * (T(1) - s);
        }
    }
    Mat<T> d_act1 = affine_backward(t.act1, p.ground2_w, d_pre2, g.ground2_w, g.ground2_b);
    Mat<T> d_pre1 = (d_act1.array() * (T(1) - t.act1.array().square())).matrix();
    return affine_backward(t.input, p.ground1_w, d_pre1, g.ground1_w, g.ground1_b);
}

#define VLG_INSTANTIATE(T)                                                                                        \
    template struct Params<T>;                                                                                    \
    template Model<T> init_model<T>(const ModelConfig&, std::uint64_t);                                           \
    template Mat<T> image_patches<T>(const ImageRaster&, int);                                                    \
    template Mat<T> encode_image<T>(const Model<T>&, const ImageRaster&);                                         \
    template Mat<T> visual_features<T>(const Model<T>&, const ImageRaster&);                                      \
    template Mat<T> embed_tokens<T>(const Model<T>&, const TokenSeq&, std::size_t);                               \
    template Mat<T> positions<T>(const Model<T>&, std::size_t, std::size_t);                                      \
    template StepOutput<T> decoder_forward<T>(const Model<T>&, const Mat<T>&, const TokenSeq&);                   \
    template Mat<T> decoder_extend<T>(const Model<T>&, KvCache<T>&, const Mat<T>&);                               \
    template Mat<T> lm_head<T>(const Model<T>&, const Mat<T>&);                                                   \
    template Mat<T> grounding_head<T>(const Model<T>&, const Mat<T>&);                                            \
    template GroundingTape<T> grounding_forward<T>(const Model<T>&, const Mat<T>&);                               \
    template Mat<T> grounding_backward<T>(const Model<T>&, const GroundingTape<T>&, const Mat<T>&, Params<T>&);   \
    template ForwardTape<T> forward_train<T>(const Model<T>&, const ImageRaster&, const TokenSeq&);               \
    template void backward<T>(const Model<T>&, const ForwardTape<T>&, const Mat<T>&, Params<T>&, bool);           \
    template Mat<T> lm_head_backward<T>(const Model<T>&, const Mat<T>&, const Mat<T>&, Params<T>&);

VLG_INSTANTIATE(float)
VLG_INSTANTIATE(double)

#undef VLG_INSTANTIATE

}  // namespace vlg
