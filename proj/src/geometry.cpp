// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vlg {

namespace {

void check_dimensions(double width, double height) {
    if (!(width > 0.0) || !(height > 0.0)) {
        throw std::invalid_argument("image dimensions must be positive");
    }
}

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Point segment_line_intersection(const Point& p, const Point& q, const Point& a, const Point& b) {
    const double dp = cross(a, b, p);
    const double dq = cross(a, b, q);
    const double t = dp / (dp - dq);
    return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

}  // namespace

double wrap_angle(double radians) {
    double r = std::fmod(radians, 2.0 * kPi);
    if (r < 0.0) r += 2.0 * kPi;
    if (r >= 2.0 * kPi) r = 0.0;
    return r;
}

OrientedBox normalize(const PixelBox& b, double width, double height) {
    check_dimensions(width, height);
    const double sx = kNormalizedExtent / width;
    const double sy = kNormalizedExtent / height;
    double theta = wrap_angle(b.angle) * kNormalizedExtent / (2.0 * kPi);
    if (theta >= kNormalizedExtent) theta = 0.0;
    return {b.x1 * sx, b.y1 * sy, b.x2 * sx, b.y2 * sy, theta};
}

PixelBox denormalize(const OrientedBox& b, double width, double height) {
    check_dimensions(width, height);
    const double sx = width / kNormalizedExtent;
    const double sy = height / kNormalizedExtent;
    return {b.x1 * sx, b.y1 * sy, b.x2 * sx, b.y2 * sy, b.theta * 2.0 * kPi / kNormalizedExtent};
}

std::array<Point, 4> corners(const OrientedBox& b) {
    const double cx = b.center_x();
    const double cy = b.center_y();
    const double hw = 0.5 * b.width();
    const double hh = 0.5 * b.height();
    const double c = std::cos(b.angle_radians());
    const double s = std::sin(b.angle_radians());
    const std::array<Point, 4> offsets = {{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}};
    std::array<Point, 4> out;
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = {cx + c * offsets[i].x - s * offsets[i].y, cy + s * offsets[i].x + c * offsets[i].y};
    }
    return out;
}

double polygon_area(const std::vector<Point>& poly) {
    double twice = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * twice;
}

// Sutherland-Hodgman.
std::vector<Point> clip_convex(const std::vector<Point>& subject, const std::vector<Point>& clip) {
    std::vector<Point> output = subject;
    for (std::size_t e = 0, m = clip.size(); e < m && !output.empty(); ++e) {
        const Point& a = clip[e];
        const Point& b = clip[(e + 1) % m];
        std::vector<Point> input;
        input.swap(output);
        for (std::size_t i = 0, n = input.size(); i < n; ++i) {
            const Point& cur = input[i];
            const Point& prev = input[(i + n - 1) % n];
            const bool cur_in = cross(a, b, cur) >= 0.0;
            const bool prev_in = cross(a, b, prev) >= 0.0;
            if (cur_in) {
                if (!prev_in) output.push_back(segment_line_intersection(prev, cur, a, b));
                output.push_back(cur);
            } else if (prev_in) {
                output.push_back(segment_line_intersection(prev, cur, a, b));
            }
        }
    }
    return output;
}

double rotated_iou(const OrientedBox& a, const OrientedBox& b) {
    const double area_a = a.area();
    const double area_b = b.area();
    if (!(area_a > 0.0) || !(area_b > 0.0)) return 0.0;
    const auto ca = corners(a);
    const auto cb = corners(b);
    const std::vector<Point> pa(ca.begin(), ca.end());
    const std::vector<Point> pb(cb.begin(), cb.end());
    const auto inter_poly = clip_convex(pa, pb);
    const double inter = inter_poly.size() < 3 ? 0.0 : std::max(0.0, polygon_area(inter_poly));
    const double uni = area_a + area_b - inter;
    if (!(uni > 0.0)) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

SizeBucket size_bucket(const OrientedBox& b, const SizeThresholds& thresholds) {
    if (!(thresholds.small > 0.0) || !(thresholds.small < thresholds.large)) {
        throw std::invalid_argument("size thresholds must satisfy 0 < small < large");
    }
    const double area = b.area();
    if (area < thresholds.small) return SizeBucket::Small;
    if (area >= thresholds.large) return SizeBucket::Large;
    return SizeBucket::Medium;
}

std::string to_string(SizeBucket bucket) {
    switch (bucket) {
    case SizeBucket::Small:
        return "small";
    case SizeBucket::Medium:
        return "medium";
    case SizeBucket::Large:
        return "large";
    }
    return "unknown";
}

bool is_canonical(const OrientedBox& b) {
    return 0.0 <= b.x1 && b.x1 <= b.x2 && b.x2 <= kNormalizedExtent && 0.0 <= b.y1 && b.y1 <= b.y2 &&
           b.y2 <= kNormalizedExtent && 0.0 <= b.theta && b.theta < kNormalizedExtent;
}

}  // namespace vlg
