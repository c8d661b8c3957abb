// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vlg/decoding.hpp"
#include "vlg/evalkit.hpp"
#include "vlg/training.hpp"

namespace vlg {

/// Greedy generations for every sample and their scoring records.
struct Evaluation {
    std::vector<Generation> generations;
    std::vector<EvalRecord> records;
    std::size_t truncated = 0;
};

template <typename T>
Evaluation evaluate_model(const Model<T>& model, const Vocabulary& v, const std::vector<GroundedSample>& data,
                          std::size_t max_len);

/// Pairs predictions with references by id. Throws listing missing or
/// duplicated ids.
std::vector<EvalRecord> align_records(const std::vector<PredictionRecord>& pred,
                                      const std::vector<GroundedSample>& ref, const Vocabulary& v);

struct AblationVariant {
    std::string name;
    bool use_hungarian = true;
    bool use_bb_token = true;
    double lambda_bb = 10.0;
};

/// The 2x2 {Hungarian, dual token} grid followed by the lambda_bb sweep.
std::vector<AblationVariant> ablation_grid(const std::vector<double>& lambdas = {5.0, 10.0, 20.0});

struct AblationRow {
    AblationVariant variant;
    std::vector<double> acc50;  // one per seed
    std::vector<double> acc25;
    std::vector<double> sample_acc50;
    double mean_acc50 = 0.0;
    double std_acc50 = 0.0;
    double mean_acc25 = 0.0;
    double mean_sample_acc50 = 0.0;
};

struct AblationSetup {
    ModelConfig model;
    TrainConfig train;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::size_t max_len = 32;
};

using AblationProgress = std::function<void(const std::string& message)>;

/// Trains every distinct variant once per seed on `train_set` and scores
/// held-out accuracy on `test_set`. Variants with identical settings share
/// their runs.
std::vector<AblationRow> run_ablation(const std::vector<AblationVariant>& variants, const AblationSetup& setup,
                                      const Vocabulary& v, const std::vector<GroundedSample>& train_set,
                                      const std::vector<GroundedSample>& test_set,
                                      const AblationProgress& progress = {});

/// Markdown table: one row per variant, columns per seed and the mean.
std::string ablation_table(const std::vector<AblationRow>& rows);
json ablation_to_json(const std::vector<AblationRow>& rows);

}  // namespace vlg
