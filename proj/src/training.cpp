// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "vlg/assignment.hpp"
#include "vlg/random.hpp"

namespace vlg {

std::string to_string(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "sgd_momentum";
}

OptimizerKind parse_optimizer(const std::string& text) {
    if (text == "adam") return OptimizerKind::Adam;
    if (text == "sgd_momentum" || text == "sgd") return OptimizerKind::SgdMomentum;
    throw std::invalid_argument("unknown optimizer \"" + text + "\"");
}

std::string to_string(LrSchedule schedule) { return schedule == LrSchedule::Cosine ? "cosine" : "constant"; }

LrSchedule parse_schedule(const std::string& text) {
    if (text == "cosine") return LrSchedule::Cosine;
    if (text == "constant") return LrSchedule::Constant;
    throw std::invalid_argument("unknown learning-rate schedule \"" + text + "\"");
}

double learning_rate_at(const TrainConfig& cfg, int step) {
    double lr = cfg.learning_rate;
    if (cfg.warmup_steps > 0 && step < cfg.warmup_steps) lr *= static_cast<double>(step + 1) / cfg.warmup_steps;
    if (cfg.schedule == LrSchedule::Cosine) {
        const double span = std::max(1, cfg.steps - cfg.warmup_steps);
        const double t = std::clamp(static_cast<double>(step - cfg.warmup_steps) / span, 0.0, 1.0);
        lr *= 0.5 * (1.0 + std::cos(3.14159265358979323846 * t));
    }
    return lr;
}

void TrainConfig::validate() const {
    if (lambda_text < 0.0 || lambda_bb < 0.0) throw std::invalid_argument("train config: lambdas must be >= 0");
    if (steps < 1) throw std::invalid_argument("train config: steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning_rate must be > 0");
    if (grad_clip < 0.0) throw std::invalid_argument("train config: grad_clip must be >= 0");
    if (warmup_steps < 0) throw std::invalid_argument("train config: warmup_steps must be >= 0");
}

TrainConfig ablation_single_token(TrainConfig cfg) {
    cfg.use_bb_token = false;
    return cfg;
}

TrainingDiverged::TrainingDiverged(int step, double loss)
    : std::runtime_error("training diverged at step " + std::to_string(step) + " (loss " + std::to_string(loss) +
                         ")"),
      step_(step) {}

TeacherForcedExample make_example(const Vocabulary& v, const GroundedSample& sample, bool use_bb_token,
                                  std::size_t num_visual) {
    if (sample.query.empty()) throw std::invalid_argument("sample " + std::to_string(sample.id) + ": empty query");
    if (sample.answer.empty()) throw std::invalid_argument("sample " + std::to_string(sample.id) + ": empty answer");
    const auto check = validate_protocol(v, sample.answer);
    if (!check.ok) {
        throw std::invalid_argument("sample " + std::to_string(sample.id) + ": protocol violation at answer position " +
                                    std::to_string(check.violations.front()));
    }
    TeacherForcedExample ex;
    ex.targets = use_bb_token ? sample.answer : remove_bb_tokens(v, sample.answer);
    ex.mask = use_bb_token ? loss_mask(v, ex.targets) : single_token_loss_mask(v, ex.targets);
    for (std::size_t t = 0; t < ex.targets.size(); ++t) {
        if (ex.targets[t] == v.loc()) ex.loc_targets.push_back(t);
    }
    if (ex.loc_targets.size() != sample.boxes.size()) {
        throw std::invalid_argument("sample " + std::to_string(sample.id) + ": " +
                                    std::to_string(ex.loc_targets.size()) + " location tokens but " +
                                    std::to_string(sample.boxes.size()) + " reference boxes");
    }
    ex.inputs = sample.query;
    ex.inputs.ids.insert(ex.inputs.ids.end(), ex.targets.ids.begin(), ex.targets.ids.end() - 1);
    ex.first_prediction = num_visual + sample.query.size() - 1;
    return ex;
}

template <typename T>
BatchLoss joint_loss(const Model<T>& model, const ImageRaster& image, const TeacherForcedExample& ex,
                     const std::vector<OrientedBox>& boxes, const TrainConfig& cfg, Params<T>* grads,
                     double grad_scale) {
    const auto tape = forward_train(model, image, ex.inputs);
    const auto n_targets = static_cast<Eigen::Index>(ex.targets.size());
    const auto first = static_cast<Eigen::Index>(ex.first_prediction);
    if (first + n_targets != tape.hidden.rows()) {
        throw std::logic_error("teacher-forced example does not line up with the decoder sequence");
    }
    const Mat<T> pred_hidden = tape.hidden.middleRows(first, n_targets);
    const Mat<T> logits = lm_head(model, pred_hidden);

    BatchLoss out;
    // token cross-entropy over unmasked targets
    const auto unmasked = static_cast<std::size_t>(std::count(ex.mask.begin(), ex.mask.end(), true));
    Mat<T> d_logits = Mat<T>::Zero(n_targets, logits.cols());
    double ce_sum = 0.0;
    for (Eigen::Index t = 0; t < n_targets; ++t) {
        if (!ex.mask[static_cast<std::size_t>(t)]) continue;
        const auto row = logits.row(t).template cast<double>();
        const double mx = row.maxCoeff();
        const Eigen::RowVectorXd e = (row.array() - mx).exp().matrix();
        const double z = e.sum();
        const auto target = ex.targets[static_cast<std::size_t>(t)];
        ce_sum += std::log(z) + mx - row(target);
        if (grads) {
            const double w = cfg.lambda_text * grad_scale / static_cast<double>(unmasked);
            Eigen::RowVectorXd g = e / z;
            g(target) -= 1.0;
            d_logits.row(t) = (g * w).template cast<T>();
        }
    }
    out.ce = unmasked > 0 ? ce_sum / static_cast<double>(unmasked) : 0.0;

    // grounding loss over ⟨loc⟩ hidden states
    const auto L = static_cast<Eigen::Index>(ex.loc_targets.size());
    Mat<T> loc_hidden(L, model.config.embed_dim);
    for (Eigen::Index i = 0; i < L; ++i) {
        loc_hidden.row(i) = pred_hidden.row(static_cast<Eigen::Index>(ex.loc_targets[static_cast<std::size_t>(i)]));
    }
    const auto gtape = grounding_forward(model, loc_hidden);
    std::vector<OrientedBox> pred(static_cast<std::size_t>(L));
    for (Eigen::Index i = 0; i < L; ++i) {
        std::array<double, 5> p{};
        for (int k = 0; k < kBoxParams; ++k) p[static_cast<std::size_t>(k)] = static_cast<double>(gtape.out(i, k));
        pred[static_cast<std::size_t>(i)] = OrientedBox::from_params(p);
    }
    const auto matched = cfg.use_hungarian ? grounding_loss(pred, boxes) : in_order_grounding_loss(pred, boxes);
    out.boxes_matched = matched.assignment.pairs.size();
    const double norm = out.boxes_matched > 0 ? 1.0 / static_cast<double>(out.boxes_matched) : 0.0;
    out.ground = matched.loss * norm;
    out.total = cfg.lambda_text * out.ce + cfg.lambda_bb * out.ground;

    if (grads) {
        Mat<T> d_hidden = Mat<T>::Zero(tape.hidden.rows(), tape.hidden.cols());
        Mat<T> d_pred_hidden = lm_head_backward(model, pred_hidden, d_logits, *grads);
        if (L > 0 && out.boxes_matched > 0 && cfg.lambda_bb != 0.0) {
            const auto box_grad = matched_distance_grad(pred, boxes, matched.assignment);
            Mat<T> d_out(L, kBoxParams);
            const double w = cfg.lambda_bb * norm * grad_scale;
            for (Eigen::Index i = 0; i < L; ++i) {
                for (int k = 0; k < kBoxParams; ++k) {
                    d_out(i, k) = static_cast<T>(w * box_grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
                }
            }
            const Mat<T> d_loc = grounding_backward(model, gtape, d_out, *grads);
            for (Eigen::Index i = 0; i < L; ++i) {
                d_pred_hidden.row(static_cast<Eigen::Index>(ex.loc_targets[static_cast<std::size_t>(i)])) += d_loc.row(i);
            }
        }
        d_hidden.middleRows(first, n_targets) = d_pred_hidden;
        backward(model, tape, d_hidden, *grads, cfg.freeze_visual);
    }
    return out;
}

template <typename T>
BatchLoss joint_loss(const Model<T>& model, const Vocabulary& v, const GroundedSample& sample,
                     const TrainConfig& cfg, Params<T>* grads, double grad_scale) {
    const int p = model.config.patch_size;
    const auto num_visual = static_cast<std::size_t>((sample.image.height / p) * (sample.image.width / p));
    const auto ex = make_example(v, sample, cfg.use_bb_token, num_visual);
    return joint_loss(model, sample.image, ex, sample.boxes, cfg, grads, grad_scale);
}

template <typename T>
BatchLoss batch_loss(const Model<T>& model, const Vocabulary& v, const std::vector<const GroundedSample*>& batch,
                     const TrainConfig& cfg, Params<T>* grads) {
    BatchLoss sum;
    if (batch.empty()) return sum;
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (const auto* sample : batch) {
        const auto l = joint_loss(model, v, *sample, cfg, grads, scale);
        sum.ce += l.ce;
        sum.ground += l.ground;
        sum.boxes_matched += l.boxes_matched;
    }
    sum.ce *= scale;
    sum.ground *= scale;
    sum.total = cfg.lambda_text * sum.ce + cfg.lambda_bb * sum.ground;
    return sum;
}

std::vector<std::size_t> batch_indices(std::size_t dataset_size, int batch_size, std::uint64_t seed, int step) {
    if (dataset_size == 0) throw std::invalid_argument("batch_indices: empty dataset");
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(batch_size));
    const auto begin = static_cast<std::uint64_t>(step) * static_cast<std::uint64_t>(batch_size);
    std::uint64_t cached_epoch = ~std::uint64_t{0};
    std::vector<std::size_t> order(dataset_size);
    for (std::uint64_t k = begin; k < begin + static_cast<std::uint64_t>(batch_size); ++k) {
        const std::uint64_t epoch = k / dataset_size;
        if (epoch != cached_epoch) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            Rng rng(derive_seed(seed, 1 + epoch));
            rng.shuffle(order.begin(), order.end());
            cached_epoch = epoch;
        }
        out.push_back(order[k % dataset_size]);
    }
    return out;
}

template <typename T>
TrainState<T> start_training(const ModelConfig& model_config, const TrainConfig& cfg) {
    cfg.validate();
    ModelConfig mc = model_config;
    mc.dual_token = cfg.use_bb_token;
    TrainState<T> state{init_model<T>(mc, derive_seed(cfg.seed, 0)), {}, 0};
    const std::size_t n_slots = cfg.optimizer == OptimizerKind::Adam ? 2 : 1;
    state.optimizer.slots.assign(n_slots, Params<T>::zeros(mc));
    return state;
}

namespace {

bool is_visual(const std::string& name) {
    return name == "patch_w" || name == "patch_b";
}

template <typename T>
void apply_update(TrainState<T>& state, Params<T>& grads, const TrainConfig& cfg) {
    auto params = state.model.params.named();
    auto g = grads.named();
    if (cfg.grad_clip > 0.0) {
        double sq = 0.0;
        for (auto& [_, m] : g) sq += m->template cast<double>().squaredNorm();
        const double norm = std::sqrt(sq);
        if (norm > cfg.grad_clip) {
            const T s = static_cast<T>(cfg.grad_clip / norm);
            for (auto& [_, m] : g) *m *= s;
        }
    }
    const T lr = static_cast<T>(learning_rate_at(cfg, state.step));
    if (cfg.optimizer == OptimizerKind::SgdMomentum) {
        auto vel = state.optimizer.slots.at(0).named();
        const T mu = static_cast<T>(cfg.momentum);
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (cfg.freeze_visual && is_visual(params[i].first)) continue;
            *vel[i].second = mu * *vel[i].second + *g[i].second;
            *params[i].second -= lr * *vel[i].second;
        }
    } else {
        auto m1 = state.optimizer.slots.at(0).named();
        auto m2 = state.optimizer.slots.at(1).named();
        const double t = static_cast<double>(state.step + 1);
        const T b1 = static_cast<T>(cfg.adam_beta1);
        const T b2 = static_cast<T>(cfg.adam_beta2);
        const T c1 = static_cast<T>(1.0 - std::pow(cfg.adam_beta1, t));
        const T c2 = static_cast<T>(1.0 - std::pow(cfg.adam_beta2, t));
        const T eps = static_cast<T>(cfg.adam_eps);
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (cfg.freeze_visual && is_visual(params[i].first)) continue;
            auto& m = *m1[i].second;
            auto& v = *m2[i].second;
            const auto& gi = *g[i].second;
            m = b1 * m + (T(1) - b1) * gi;
            v = (b2 * v.array() + (T(1) - b2) * gi.array().square()).matrix();
            params[i].second->array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
        }
    }
}

}  // namespace

template <typename T>
std::vector<StepRecord> train(TrainState<T>& state, const Vocabulary& v, const std::vector<GroundedSample>& data,
                              const TrainConfig& cfg, const StepCallback& on_step) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    const std::size_t n_slots = cfg.optimizer == OptimizerKind::Adam ? 2 : 1;
    if (state.optimizer.slots.size() != n_slots) {
        throw std::invalid_argument("train: optimizer state does not match the configured optimizer");
    }
    std::vector<StepRecord> history;
    Params<T> grads = Params<T>::zeros(state.model.config);
    std::vector<const GroundedSample*> batch;
    while (state.step < cfg.steps) {
        const auto idx = batch_indices(data.size(), cfg.batch_size, cfg.seed, state.step);
        batch.clear();
        for (auto i : idx) batch.push_back(&data[i]);
        grads.set_zero();
        const auto loss = batch_loss(state.model, v, batch, cfg, &grads);
        if (!std::isfinite(loss.total)) throw TrainingDiverged(state.step + 1, loss.total);
        apply_update(state, grads, cfg);
        ++state.step;
        StepRecord rec{state.step, loss.total, loss.ce, loss.ground};
        history.push_back(rec);
        if (on_step) on_step(rec);
    }
    return history;
}

std::string loss_history_csv(const std::vector<StepRecord>& history) {
    std::string out = "step,total,ce,ground\n";
    char buf[128];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", r.step, r.total, r.ce, r.ground);
        out += buf;
    }
    return out;
}

#define VLG_INSTANTIATE(T)                                                                                        \
    template BatchLoss joint_loss<T>(const Model<T>&, const Vocabulary&, const GroundedSample&, const TrainConfig&, \
                                     Params<T>*, double);                                                         \
    template BatchLoss joint_loss<T>(const Model<T>&, const ImageRaster&, const TeacherForcedExample&,            \
                                     const std::vector<OrientedBox>&, const TrainConfig&, Params<T>*, double);    \
    template BatchLoss batch_loss<T>(const Model<T>&, const Vocabulary&,                                          \
                                     const std::vector<const GroundedSample*>&, const TrainConfig&, Params<T>*);  \
    template TrainState<T> start_training<T>(const ModelConfig&, const TrainConfig&);                             \
    template std::vector<StepRecord> train<T>(TrainState<T>&, const Vocabulary&,                                  \
                                              const std::vector<GroundedSample>&, const TrainConfig&,             \
                                              const StepCallback&);

VLG_INSTANTIATE(float)
VLG_INSTANTIATE(double)

#undef VLG_INSTANTIATE

}  // namespace vlg
