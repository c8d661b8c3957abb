// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlg/net.hpp"
#include "vlg/sample.hpp"
#include "vlg/vocab.hpp"

namespace vlg {

enum class OptimizerKind { SgdMomentum, Adam };
enum class LrSchedule { Constant, Cosine };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& text);
std::string to_string(LrSchedule schedule);
LrSchedule parse_schedule(const std::string& text);

struct TrainConfig {
    double lambda_text = 1.0;
    double lambda_bb = 10.0;
    double learning_rate = 1e-3;
    int steps = 100;
    int batch_size = 8;
    std::uint64_t seed = 0;
    bool use_hungarian = true;
    bool use_bb_token = true;
    OptimizerKind optimizer = OptimizerKind::SgdMomentum;
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Global gradient-norm clip; 0 disables it.
    double grad_clip = 0.0;
    /// Linear warmup over warmup_steps, then constant or cosine decay to 0.
    LrSchedule schedule = LrSchedule::Constant;
    int warmup_steps = 0;
    bool freeze_visual = false;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

/// Same configuration with ⟨bb⟩ dropped: ⟨loc⟩ is both predicted by the
/// language head and read by the grounding head.
TrainConfig ablation_single_token(TrainConfig cfg);

struct BatchLoss {
    double total = 0.0;
    double ce = 0.0;
    double ground = 0.0;
    std::size_t boxes_matched = 0;
};

/// Teacher-forced view of a sample. The hidden state at sequence index
/// `first_prediction + t` predicts targets[t].
struct TeacherForcedExample {
    TokenSeq inputs;   // query followed by all but the last answer token
    TokenSeq targets;  // the answer
    std::vector<bool> mask;
    std::vector<std::size_t> loc_targets;  // t with targets[t] == ⟨loc⟩, in order
    std::size_t first_prediction = 0;
};

/// Throws std::invalid_argument on a protocol violation or when the number
/// of ⟨loc⟩ tokens differs from the number of reference boxes.
TeacherForcedExample make_example(const Vocabulary& v, const GroundedSample& sample, bool use_bb_token,
                                  std::size_t num_visual);

/// lambda_text * CE + lambda_bb * L_ground for one sample. CE is the mean over
/// unmasked targets; L_ground is the matched squared distance averaged over
/// matched boxes. When `grads` is non-null, adds grad_scale * dL/dparams.
template <typename T>
BatchLoss joint_loss(const Model<T>& model, const Vocabulary& v, const GroundedSample& sample,
                     const TrainConfig& cfg, Params<T>* grads = nullptr, double grad_scale = 1.0);

/// Same, on an explicit teacher-forced example (targets may be edited).
template <typename T>
BatchLoss joint_loss(const Model<T>& model, const ImageRaster& image, const TeacherForcedExample& example,
                     const std::vector<OrientedBox>& boxes, const TrainConfig& cfg, Params<T>* grads = nullptr,
                     double grad_scale = 1.0);

/// Mean of per-sample joint losses and gradients over a batch.
template <typename T>
BatchLoss batch_loss(const Model<T>& model, const Vocabulary& v, const std::vector<const GroundedSample*>& batch,
                     const TrainConfig& cfg, Params<T>* grads = nullptr);

/// Learning rate of the optimizer step taken at `step` (0-based).
double learning_rate_at(const TrainConfig& cfg, int step);

/// First-moment (momentum or Adam m) and second-moment (Adam v) slots.
template <typename T>
struct OptimizerState {
    std::vector<Params<T>> slots;
};

template <typename T>
struct TrainState {
    Model<T> model;
    OptimizerState<T> optimizer;
    int step = 0;  // completed optimizer steps
};

struct StepRecord {
    int step = 0;  // 1-based
    double total = 0.0;
    double ce = 0.0;
    double ground = 0.0;
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(int step, double loss);
    int step() const { return step_; }

private:
    int step_;
};

/// Sample indices of the mini-batch taken at `step` (0-based). A pure
/// function of (seed, step): each epoch is a fresh seeded shuffle.
std::vector<std::size_t> batch_indices(std::size_t dataset_size, int batch_size, std::uint64_t seed, int step);

template <typename T>
TrainState<T> start_training(const ModelConfig& model_config, const TrainConfig& cfg);

using StepCallback = std::function<void(const StepRecord&)>;

/// Runs optimizer steps until state.step == cfg.steps and returns the records
/// of the steps it ran. Throws TrainingDiverged on a non-finite loss.
template <typename T>
std::vector<StepRecord> train(TrainState<T>& state, const Vocabulary& v, const std::vector<GroundedSample>& data,
                              const TrainConfig& cfg, const StepCallback& on_step = {});

std::string loss_history_csv(const std::vector<StepRecord>& history);

}  // namespace vlg
