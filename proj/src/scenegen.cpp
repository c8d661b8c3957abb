// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vlg/random.hpp"

namespace vlg {

namespace {

constexpr int kSuper = 4;
constexpr int kPlaceAttempts = 200;

// Referent box area ranges per size bucket, normalized units.
constexpr std::array<std::array<double, 2>, 3> kAreaRange{{{15.0, 37.0}, {45.0, 330.0}, {370.0, 950.0}}};

const std::array<std::string, kNumShapes> kShapeWords{"square", "rectangle", "disk", "triangle"};
const std::array<std::string, kNumShapes> kShapePlural{"squares", "rectangles", "disks", "triangles"};
const std::array<std::string, kNumColors> kColorWords{"red", "green", "blue", "yellow", "magenta", "cyan"};

std::size_t pick_weighted(Rng& rng, const std::array<double, 3>& w) {
    const double total = w[0] + w[1] + w[2];
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < 2; ++i) {
        if (u < w[i]) return i;
        u -= w[i];
    }
    return 2;
}

SceneObject sized_object(Rng& rng, Shape shape, Color color, std::size_t bucket, const DataKnobs& k) {
    SceneObject o;
    o.shape = shape;
    o.color = color;
    const double px_per_unit = k.canvas / kNormalizedExtent;
    const auto& range = kAreaRange[bucket];
    const double area = rng.uniform(range[0], range[1]) * px_per_unit * px_per_unit;
    double aspect = 1.0;
    if (shape == Shape::Rectangle) aspect = rng.uniform(1.5, 2.5);
    if (shape == Shape::Triangle) aspect = rng.uniform(0.8, 1.25);
    o.w = std::sqrt(area * aspect);
    o.h = std::sqrt(area / aspect);
    if (k.rotate) {
        if (shape == Shape::Rectangle) o.angle = static_cast<double>(rng.below(16)) * kPi / 16.0;
        if (shape == Shape::Triangle) o.angle = static_cast<double>(rng.below(16)) * 2.0 * kPi / 16.0;
    }
    return o;
}

bool in_quadrant(double cx, double cy, int canvas, Quadrant q) {
    const double half = canvas / 2.0;
    const bool left = cx < half;
    const bool top = cy < half;
    switch (q) {
        case Quadrant::TopLeft: return top && left;
        case Quadrant::TopRight: return top && !left;
        case Quadrant::BottomLeft: return !top && left;
        case Quadrant::BottomRight: return !top && !left;
    }
    return false;
}

bool place(Rng& rng, SceneObject& o, const std::vector<SceneObject>& placed, int canvas,
           std::optional<Quadrant> quadrant, std::optional<Quadrant> avoid) {
    const double r = bounding_radius(o);
    if (2.0 * r >= canvas) return false;
    for (int attempt = 0; attempt < kPlaceAttempts; ++attempt) {
        o.cx = rng.uniform(r, canvas - r);
        o.cy = rng.uniform(r, canvas - r);
        if (quadrant && !in_quadrant(o.cx, o.cy, canvas, *quadrant)) continue;
        if (avoid && in_quadrant(o.cx, o.cy, canvas, *avoid)) continue;
        bool clear = true;
        for (const auto& p : placed) {
            if (std::hypot(o.cx - p.cx, o.cy - p.cy) < r + bounding_radius(p) + 1.0) {
                clear = false;
                break;
            }
        }
        if (clear) return true;
    }
    return false;
}

bool try_draw(Rng& rng, const DataKnobs& k, SceneDraw& out) {
    SceneDraw d;
    d.spec.width = k.canvas;
    d.spec.height = k.canvas;
    auto& objs = d.spec.objects;
    auto& t = d.tmpl;
    t.task = static_cast<TaskTag>(pick_weighted(rng, k.task_mix));
    t.shape = static_cast<Shape>(rng.below(kNumShapes));
    t.color = static_cast<Color>(rng.below(kNumColors));

    auto add_referent = [&](std::optional<Quadrant> q, std::optional<Quadrant> avoid) {
        auto o = sized_object(rng, t.shape, t.color, pick_weighted(rng, k.size_mix), k);
        if (!place(rng, o, objs, k.canvas, q, avoid)) return false;
        objs.push_back(o);
        return true;
    };

    switch (t.task) {
        case TaskTag::Grounding:
            if (!add_referent(std::nullopt, std::nullopt)) return false;
            break;
        case TaskTag::ReferringSingle:
            t.quadrant = static_cast<Quadrant>(rng.below(4));
            if (!add_referent(t.quadrant, std::nullopt)) return false;
            if (rng.uniform() < k.twin_prob && !add_referent(std::nullopt, t.quadrant)) return false;
            break;
        case TaskTag::ReferringMulti: {
            const int count = rng.uniform_int(2, k.max_multi);
            for (int i = 0; i < count; ++i) {
                if (!add_referent(std::nullopt, std::nullopt)) return false;
            }
            break;
        }
    }

    const int total = rng.uniform_int(std::max(k.min_objects, static_cast<int>(objs.size())),
                                      std::max(k.max_objects, static_cast<int>(objs.size())));
    while (static_cast<int>(objs.size()) < total) {
        Shape s;
        Color c;
        do {
            s = static_cast<Shape>(rng.below(kNumShapes));
            c = static_cast<Color>(rng.below(kNumColors));
        } while (s == t.shape && c == t.color);
        auto o = sized_object(rng, s, c, rng.below(3), k);
        if (place(rng, o, objs, k.canvas, std::nullopt, std::nullopt)) objs.push_back(o);
        else break;
    }
    out = std::move(d);
    return true;
}

}  // namespace

std::string to_string(Shape shape) { return kShapeWords[static_cast<std::size_t>(shape)]; }
std::string plural(Shape shape) { return kShapePlural[static_cast<std::size_t>(shape)]; }
std::string to_string(Color color) { return kColorWords[static_cast<std::size_t>(color)]; }

std::array<float, 3> palette(Color color) {
    switch (color) {
        case Color::Red: return {0.90f, 0.15f, 0.15f};
        case Color::Green: return {0.15f, 0.75f, 0.20f};
        case Color::Blue: return {0.20f, 0.30f, 0.90f};
        case Color::Yellow: return {0.95f, 0.85f, 0.10f};
        case Color::Magenta: return {0.85f, 0.20f, 0.80f};
        case Color::Cyan: return {0.10f, 0.80f, 0.85f};
    }
    return {0.0f, 0.0f, 0.0f};
}

const std::vector<std::string>& scene_words() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> w{"give", "me",  "the", "location", "of",   "<p>",   "</p>", "all",
                                   "at",   "top", "bottom", "left",  "right", "1",    "2",    "3",    "4"};
        for (const auto& c : kColorWords) w.push_back(c);
        for (std::size_t i = 0; i < kShapeWords.size(); ++i) {
            w.push_back(kShapeWords[i]);
            w.push_back(kShapePlural[i]);
        }
        return w;
    }();
    return words;
}

Vocabulary scene_vocabulary() { return build_vocab(scene_words()); }

double bounding_radius(const SceneObject& o) { return 0.5 * std::hypot(o.w, o.h); }

void check_bounds(const SceneSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("scene: canvas must be positive");
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const auto& o = spec.objects[i];
        const double r = bounding_radius(o);
        if (o.w < 0 || o.h < 0 || o.cx - r < 0 || o.cy - r < 0 || o.cx + r > spec.width || o.cy + r > spec.height) {
            throw std::invalid_argument("scene: object " + std::to_string(i) + " leaves the canvas");
        }
    }
}

bool contains(const SceneObject& o, double x, double y) {
    const double dx = x - o.cx;
    const double dy = y - o.cy;
    const double c = std::cos(o.angle);
    const double s = std::sin(o.angle);
    const double lx = c * dx + s * dy;
    const double ly = -s * dx + c * dy;
    switch (o.shape) {
        case Shape::Square:
        case Shape::Rectangle: return std::abs(lx) <= 0.5 * o.w && std::abs(ly) <= 0.5 * o.h;
        case Shape::Disk: return lx * lx + ly * ly <= 0.25 * o.w * o.w;
        case Shape::Triangle:
            if (ly < -0.5 * o.h || ly > 0.5 * o.h || o.h <= 0) return false;
            return std::abs(lx) <= 0.5 * o.w * (ly + 0.5 * o.h) / o.h;
    }
    return false;
}

ImageRaster render(const SceneSpec& spec) {
    check_bounds(spec);
    ImageRaster img(spec.height, spec.width, kBackground);
    for (const auto& o : spec.objects) {
        const auto col = palette(o.color);
        const double r = bounding_radius(o);
        const int y0 = std::max(0, static_cast<int>(std::floor(o.cy - r)));
        const int y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(o.cy + r)));
        const int x0 = std::max(0, static_cast<int>(std::floor(o.cx - r)));
        const int x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(o.cx + r)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                int hits = 0;
                for (int j = 0; j < kSuper; ++j) {
                    for (int i = 0; i < kSuper; ++i) {
                        hits += contains(o, x + (i + 0.5) / kSuper, y + (j + 0.5) / kSuper) ? 1 : 0;
                    }
                }
                if (hits == 0) continue;
                const float cov = static_cast<float>(hits) / (kSuper * kSuper);
                for (int c = 0; c < 3; ++c) {
                    float& p = img.at(y, x, c);
                    p = p * (1.0f - cov) + col[static_cast<std::size_t>(c)] * cov;
                }
            }
        }
    }
    return ImageRaster::from_bytes(img.height, img.width, img.to_bytes());
}

PixelBox tight_box(const SceneObject& o) {
    const double angle = o.shape == Shape::Disk ? 0.0 : o.angle;
    return {o.cx - 0.5 * o.w, o.cy - 0.5 * o.h, o.cx + 0.5 * o.w, o.cy + 0.5 * o.h, angle};
}

OrientedBox normalized_box(const SceneObject& o, int width, int height) {
    return normalize(tight_box(o), width, height);
}

Quadrant quadrant_of(const OrientedBox& b) {
    const bool left = b.center_x() < 50.0;
    const bool top = b.center_y() < 50.0;
    if (top) return left ? Quadrant::TopLeft : Quadrant::TopRight;
    return left ? Quadrant::BottomLeft : Quadrant::BottomRight;
}

std::vector<std::string> quadrant_words(Quadrant q) {
    switch (q) {
        case Quadrant::TopLeft: return {"at", "the", "top", "left"};
        case Quadrant::TopRight: return {"at", "the", "top", "right"};
        case Quadrant::BottomLeft: return {"at", "the", "bottom", "left"};
        case Quadrant::BottomRight: return {"at", "the", "bottom", "right"};
    }
    return {};
}

std::vector<std::size_t> referents(const SceneSpec& spec, const TaskTemplate& tmpl) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const auto& o = spec.objects[i];
        if (o.shape != tmpl.shape || o.color != tmpl.color) continue;
        if (tmpl.task == TaskTag::ReferringSingle &&
            quadrant_of(normalized_box(o, spec.width, spec.height)) != tmpl.quadrant) {
            continue;
        }
        out.push_back(i);
    }
    std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
        const auto& oa = spec.objects[a];
        const auto& ob = spec.objects[b];
        if (oa.cx != ob.cx) return oa.cx < ob.cx;
        return oa.cy < ob.cy;
    });
    return out;
}

GroundedSample make_sample(const SceneSpec& spec, const TaskTemplate& tmpl, const Vocabulary& v, int id) {
    const auto refs = referents(spec, tmpl);
    const bool multi = tmpl.task == TaskTag::ReferringMulti;
    const std::string phrase = to_string(tmpl.color) + " " + (multi ? plural(tmpl.shape) : to_string(tmpl.shape));
    if (!multi && refs.size() != 1) {
        throw std::invalid_argument("scene: \"" + phrase + "\" names " + std::to_string(refs.size()) +
                                    " objects, expected exactly one");
    }
    if (multi && (refs.size() < 2 || refs.size() > 4)) {
        throw std::invalid_argument("scene: \"" + phrase + "\" names " + std::to_string(refs.size()) +
                                    " objects, expected 2 to 4");
    }

    std::vector<std::string> q{std::string(kBos), "give", "me", "the", "location", "of", "<p>"};
    if (multi) q.push_back("all");
    q.push_back(to_string(tmpl.color));
    q.push_back(multi ? plural(tmpl.shape) : to_string(tmpl.shape));
    if (tmpl.task == TaskTag::ReferringSingle) {
        for (auto& w : quadrant_words(tmpl.quadrant)) q.push_back(w);
    }
    q.push_back("</p>");

    std::vector<std::string> a{std::to_string(refs.size()), to_string(tmpl.color),
                               multi ? plural(tmpl.shape) : to_string(tmpl.shape)};
    for (std::size_t i = 0; i < refs.size(); ++i) {
        a.push_back(std::string(kBb));
        a.push_back(std::string(kLoc));
    }
    a.push_back(std::string(kEos));

    GroundedSample s;
    s.id = id;
    s.image = render(spec);
    s.query = encode(v, q);
    s.answer = encode(v, a);
    s.task = tmpl.task;
    for (auto i : refs) s.boxes.push_back(normalized_box(spec.objects[i], spec.width, spec.height));
    return s;
}

void DataKnobs::validate() const {
    if (canvas < 16) throw std::invalid_argument("knobs: canvas must be at least 16 pixels");
    if (min_objects < 1 || max_objects < min_objects) {
        throw std::invalid_argument("knobs: need 1 <= min_objects <= max_objects");
    }
    if (max_multi < 2 || max_multi > 4) throw std::invalid_argument("knobs: max_multi must be in [2, 4]");
    for (const auto* mix : {&task_mix, &size_mix}) {
        double sum = 0.0;
        for (double w : *mix) {
            if (!(w >= 0.0)) throw std::invalid_argument("knobs: mix weights must be >= 0");
            sum += w;
        }
        if (!(sum > 0.0)) throw std::invalid_argument("knobs: mix weights must not all be zero");
    }
    if (!(twin_prob >= 0.0 && twin_prob <= 1.0)) throw std::invalid_argument("knobs: twin_prob must be in [0, 1]");
}

SceneDraw draw_scene(std::uint64_t seed, const DataKnobs& knobs) {
    knobs.validate();
    Rng rng(seed);
    SceneDraw d;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        if (try_draw(rng, knobs, d)) {
            d.spec.seed = seed;
            return d;
        }
    }
    throw std::runtime_error("scene: could not place objects; canvas too small for the knobs");
}

std::vector<GroundedSample> generate_dataset(std::size_t n, std::uint64_t seed, const DataKnobs& knobs) {
    if (n == 0) throw std::invalid_argument("generate_dataset: n must be >= 1");
    const auto v = scene_vocabulary();
    std::vector<GroundedSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = draw_scene(derive_seed(seed, i), knobs);
        out.push_back(make_sample(d.spec, d.tmpl, v, static_cast<int>(i)));
    }
    return out;
}

}  // namespace vlg
