// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "vlg/training.hpp"
#include "vlg/vocab.hpp"

namespace vlg {

/// Container layout, all integers little-endian:
///   8 bytes  magic "VLGCKPT1"
///   u32      format version
///   u32      header length n
///   n bytes  UTF-8 JSON header: model and train configs, vocabulary tokens
///            and hash, completed steps, and the name and shape of every array
///   float32 arrays in header order: parameters in declaration order, then
///   each optimizer slot in the same order
struct Checkpoint {
    TrainState<float> state;
    TrainConfig train;
    Vocabulary vocab;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws std::runtime_error on a bad magic, version, truncated payload, or
/// shape mismatch with the embedded config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vlg
