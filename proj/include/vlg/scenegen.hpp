// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlg/geometry.hpp"
#include "vlg/image.hpp"
#include "vlg/sample.hpp"
#include "vlg/vocab.hpp"

namespace vlg {

enum class Shape { Square, Rectangle, Disk, Triangle };
enum class Color { Red, Green, Blue, Yellow, Magenta, Cyan };
enum class Quadrant { TopLeft, TopRight, BottomLeft, BottomRight };

inline constexpr int kNumShapes = 4;
inline constexpr int kNumColors = 6;

std::string to_string(Shape shape);
std::string plural(Shape shape);
std::string to_string(Color color);
std::array<float, 3> palette(Color color);
inline constexpr float kBackground = 128.0f / 255.0f;

/// Pixel-space object. (w, h) are the extents of the shape in its own frame
/// before rotation about (cx, cy). Triangles are isosceles with the apex at
/// local (0, -h/2) and the base along local y = +h/2.
struct SceneObject {
    Shape shape = Shape::Square;
    Color color = Color::Red;
    double cx = 0, cy = 0;
    double w = 0, h = 0;
    double angle = 0;  // radians
};

struct SceneSpec {
    int width = 64;
    int height = 64;
    std::vector<SceneObject> objects;
    std::uint64_t seed = 0;
};

/// Closed word list of the synthetic task, in id order.
const std::vector<std::string>& scene_words();
Vocabulary scene_vocabulary();

/// Half-diagonal of the object's extents; the object fits in a disk of this
/// radius around its center.
double bounding_radius(const SceneObject& o);

/// Throws std::invalid_argument when some object leaves the canvas.
void check_bounds(const SceneSpec& spec);

/// 4x4 supersampled rasterization over the background, quantized to 8 bits
/// per channel. Later objects overdraw earlier ones.
ImageRaster render(const SceneSpec& spec);

/// Coverage test in pixel coordinates.
bool contains(const SceneObject& o, double x, double y);

PixelBox tight_box(const SceneObject& o);
OrientedBox normalized_box(const SceneObject& o, int width, int height);

Quadrant quadrant_of(const OrientedBox& b);
std::vector<std::string> quadrant_words(Quadrant q);

struct TaskTemplate {
    TaskTag task = TaskTag::Grounding;
    Shape shape = Shape::Square;
    Color color = Color::Red;
    Quadrant quadrant = Quadrant::TopLeft;  // referring-single only
};

/// Referents of a template, in answer order (left to right by center x).
std::vector<std::size_t> referents(const SceneSpec& spec, const TaskTemplate& tmpl);

/// Throws std::invalid_argument when a single-referent template does not
/// name exactly one object or a multi template names fewer than two.
GroundedSample make_sample(const SceneSpec& spec, const TaskTemplate& tmpl, const Vocabulary& v, int id = 0);

struct DataKnobs {
    int canvas = 64;
    int min_objects = 1;
    int max_objects = 6;
    /// Relative weights of grounding, referring-single, referring-multi.
    std::array<double, 3> task_mix{0.5, 0.3, 0.2};
    /// Relative weights of small, medium, large referents.
    std::array<double, 3> size_mix{1.0, 1.0, 1.0};
    /// Chance that a referring-single scene holds a same-looking object in
    /// another quadrant.
    double twin_prob = 0.7;
    int max_multi = 3;
    bool rotate = true;

    void validate() const;
    bool operator==(const DataKnobs&) const = default;
};

struct SceneDraw {
    SceneSpec spec;
    TaskTemplate tmpl;
};

/// Scene and template for one sample; a pure function of (seed, knobs).
SceneDraw draw_scene(std::uint64_t seed, const DataKnobs& knobs);

/// Sample i is built from draw_scene(derive_seed(seed, i)).
std::vector<GroundedSample> generate_dataset(std::size_t n, std::uint64_t seed, const DataKnobs& knobs = {});

}  // namespace vlg
