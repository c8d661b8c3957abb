// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vlg {

std::vector<std::uint8_t> ImageRaster::to_bytes() const {
    std::vector<std::uint8_t> out(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const float v = std::clamp(pixels[i], 0.0f, 1.0f);
        out[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
    return out;
}

ImageRaster ImageRaster::from_bytes(int h, int w, const std::vector<std::uint8_t>& bytes) {
    if (h <= 0 || w <= 0 || bytes.size() != static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * 3) {
        throw std::invalid_argument("image bytes do not match " + std::to_string(h) + "x" + std::to_string(w) + "x3");
    }
    ImageRaster img(h, w);
    for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels[i] = static_cast<float>(bytes[i]) / 255.0f;
    return img;
}

}  // namespace vlg
