// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vlg/decoding.hpp"
#include "vlg/geometry.hpp"
#include "vlg/net.hpp"
#include "vlg/sample.hpp"
#include "vlg/scenegen.hpp"
#include "vlg/training.hpp"
#include "vlg/vocab.hpp"

namespace vlg {

using json = nlohmann::ordered_json;

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
/// Throws std::invalid_argument on characters outside the alphabet or bad padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

json box_to_json(const OrientedBox& b);
OrientedBox box_from_json(const json& j);

json tokens_to_json(const Vocabulary& v, const TokenSeq& s);
TokenSeq tokens_from_json(const Vocabulary& v, const json& j);

json sample_to_json(const Vocabulary& v, const GroundedSample& s);
GroundedSample sample_from_json(const Vocabulary& v, const json& j);

json generation_to_json(const Vocabulary& v, const Generation& g, int id);

/// A prediction line read back for evaluation.
struct PredictionRecord {
    int id = 0;
    std::vector<std::string> answer;
    std::vector<OrientedBox> boxes;
    bool truncated = false;
};
PredictionRecord prediction_from_json(const json& j);

json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const json& j);
json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const json& j);
json to_json(const DataKnobs& k);
DataKnobs knobs_from_json(const json& j);

/// One compact JSON document per line, '\n' terminated.
std::string to_jsonl(const std::vector<json>& lines);

/// Parses every non-empty line; errors name the file and the 1-based line.
std::vector<json> read_jsonl(const std::filesystem::path& path);

std::vector<GroundedSample> read_dataset(const std::filesystem::path& path, const Vocabulary& v);
void write_dataset(const std::filesystem::path& path, const Vocabulary& v, const std::vector<GroundedSample>& data);

json read_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
/// Writes atomically via a temporary sibling file.
void write_text(const std::filesystem::path& path, std::string_view text);

/// Strict key check: throws when `j` has a key outside `allowed`.
void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& what);

}  // namespace vlg
