// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

namespace vlg {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kNormalizedExtent = 100.0;

/// Box in normalized units: corners of the unrotated rectangle in [0, 100],
/// rotation about the center with theta in [0, 100) mapping to [0, 2*pi).
/// Positive theta rotates counter-clockwise in the (x, y) plane.
struct OrientedBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0, theta = 0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x1 + x2); }
    double center_y() const { return 0.5 * (y1 + y2); }
    double angle_radians() const { return theta * 2.0 * kPi / kNormalizedExtent; }

    std::array<double, 5> params() const { return {x1, y1, x2, y2, theta}; }
    static OrientedBox from_params(const std::array<double, 5>& p) { return {p[0], p[1], p[2], p[3], p[4]}; }

    bool operator==(const OrientedBox&) const = default;
};

/// Same layout in pixels, angle in radians.
struct PixelBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0, angle = 0;
};

struct Point {
    double x = 0, y = 0;
};

enum class SizeBucket { Small, Medium, Large };

/// Area cutoffs in normalized units (full image = 10'000). Defaults are the
/// 32 and 96 pixel side lengths of a 512 pixel image.
struct SizeThresholds {
    double small = 32.0 * 32.0 * (100.0 / 512.0) * (100.0 / 512.0);
    double large = 96.0 * 96.0 * (100.0 / 512.0) * (100.0 / 512.0);
};

OrientedBox normalize(const PixelBox& b, double width, double height);
PixelBox denormalize(const OrientedBox& b, double width, double height);

/// Wraps an angle into [0, 2*pi).
double wrap_angle(double radians);

/// Vertices of the rotated rectangle in counter-clockwise order, starting
/// from the rotated (x1, y1) corner.
std::array<Point, 4> corners(const OrientedBox& b);

/// Signed shoelace area; positive for counter-clockwise polygons.
double polygon_area(const std::vector<Point>& poly);

/// Clips `subject` against the convex counter-clockwise polygon `clip`.
std::vector<Point> clip_convex(const std::vector<Point>& subject, const std::vector<Point>& clip);

/// Exact intersection-over-union of two rotated rectangles. Zero-area
/// operands and zero-area unions give 0.
double rotated_iou(const OrientedBox& a, const OrientedBox& b);

SizeBucket size_bucket(const OrientedBox& b, const SizeThresholds& thresholds = {});
std::string to_string(SizeBucket bucket);

bool is_canonical(const OrientedBox& b);

}  // namespace vlg
