// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "vlg/geometry.hpp"
#include "vlg/image.hpp"
#include "vlg/vocab.hpp"

namespace vlg {

enum class TaskTag { Grounding, ReferringSingle, ReferringMulti };

std::string to_string(TaskTag tag);
/// Accepts "grounding", "referring-single", "referring-multi".
TaskTag parse_task_tag(const std::string& text);

/// Image, query, answer with embedded ⟨bb⟩⟨loc⟩ pairs, and the reference
/// boxes in the order their ⟨loc⟩ tokens appear.
struct GroundedSample {
    int id = 0;
    ImageRaster image;
    TokenSeq query;
    TokenSeq answer;
    std::vector<OrientedBox> boxes;
    TaskTag task = TaskTag::Grounding;
};

}  // namespace vlg
