// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace vlg {

/// H x W x 3 raster, channel-interleaved, values in [0, 1].
struct ImageRaster {
    int height = 0;
    int width = 0;
    std::vector<float> pixels;

    ImageRaster() = default;
    ImageRaster(int h, int w, float fill = 0.0f)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * 3, fill) {}

    float& at(int y, int x, int c) { return pixels[index(y, x, c)]; }
    float at(int y, int x, int c) const { return pixels[index(y, x, c)]; }

    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
               static_cast<std::size_t>(c);
    }

    /// Quantizes to 8 bits per channel.
    std::vector<std::uint8_t> to_bytes() const;
    static ImageRaster from_bytes(int h, int w, const std::vector<std::uint8_t>& bytes);

    bool operator==(const ImageRaster&) const = default;
};

}  // namespace vlg
