// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/sample.hpp"

#include <stdexcept>

namespace vlg {

std::string to_string(TaskTag tag) {
    switch (tag) {
        case TaskTag::Grounding: return "grounding";
        case TaskTag::ReferringSingle: return "referring-single";
        case TaskTag::ReferringMulti: return "referring-multi";
    }
    return "grounding";
}

TaskTag parse_task_tag(const std::string& text) {
    if (text == "grounding") return TaskTag::Grounding;
    if (text == "referring-single") return TaskTag::ReferringSingle;
    if (text == "referring-multi") return TaskTag::ReferringMulti;
    throw std::invalid_argument("unknown task tag \"" + text + "\"");
}

}  // namespace vlg
