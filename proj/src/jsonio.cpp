// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/jsonio.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vlg {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

template <typename F>
auto with_context(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw std::invalid_argument(what + ": " + e.what());
    }
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += kAlphabet[(n >> 6) & 63];
        out += kAlphabet[n & 63];
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t n = bytes[i] << 16;
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += kAlphabet[(n >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw std::invalid_argument("base64: length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        const bool last = i + 4 == text.size();
        std::array<int, 4> v{};
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + static_cast<std::size_t>(k)];
            if (c == '=' && last && k >= 2) {
                ++pad;
                v[static_cast<std::size_t>(k)] = 0;
                continue;
            }
            if (pad > 0) throw std::invalid_argument("base64: bad padding");
            v[static_cast<std::size_t>(k)] = b64_value(c);
            if (v[static_cast<std::size_t>(k)] < 0) throw std::invalid_argument("base64: invalid character");
        }
        const std::uint32_t n = (static_cast<std::uint32_t>(v[0]) << 18) | (static_cast<std::uint32_t>(v[1]) << 12) |
                                (static_cast<std::uint32_t>(v[2]) << 6) | static_cast<std::uint32_t>(v[3]);
        out.push_back(static_cast<std::uint8_t>(n >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((n >> 8) & 255));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(n & 255));
    }
    return out;
}

json box_to_json(const OrientedBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2, b.theta}); }

OrientedBox box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 5) throw std::invalid_argument("box must be an array of 5 numbers");
    std::array<double, 5> p{};
    for (std::size_t i = 0; i < 5; ++i) {
        if (!j[i].is_number()) throw std::invalid_argument("box must be an array of 5 numbers");
        p[i] = j[i].get<double>();
    }
    return OrientedBox::from_params(p);
}

json tokens_to_json(const Vocabulary& v, const TokenSeq& s) {
    json out = json::array();
    for (const auto& w : decode(v, s)) out.push_back(w);
    return out;
}

TokenSeq tokens_from_json(const Vocabulary& v, const json& j) {
    if (!j.is_array()) throw std::invalid_argument("token list must be an array of strings");
    std::vector<std::string> words;
    for (const auto& w : j) {
        if (!w.is_string()) throw std::invalid_argument("token list must be an array of strings");
        words.push_back(w.get<std::string>());
    }
    return encode(v, words);
}

json sample_to_json(const Vocabulary& v, const GroundedSample& s) {
    json j;
    j["id"] = s.id;
    j["width"] = s.image.width;
    j["height"] = s.image.height;
    j["image"] = base64_encode(s.image.to_bytes());
    j["query"] = tokens_to_json(v, s.query);
    j["answer"] = tokens_to_json(v, s.answer);
    json boxes = json::array();
    for (const auto& b : s.boxes) boxes.push_back(box_to_json(b));
    j["boxes"] = boxes;
    j["task"] = to_string(s.task);
    return j;
}

GroundedSample sample_from_json(const Vocabulary& v, const json& j) {
    return with_context("sample", [&] {
        check_keys(j, {"id", "width", "height", "image", "query", "answer", "boxes", "task"}, "sample");
        GroundedSample s;
        s.id = j.at("id").get<int>();
        const int w = j.at("width").get<int>();
        const int h = j.at("height").get<int>();
        if (w <= 0 || h <= 0) throw std::invalid_argument("sample: width and height must be positive");
        s.image = ImageRaster::from_bytes(h, w, base64_decode(j.at("image").get<std::string>()));
        s.query = tokens_from_json(v, j.at("query"));
        s.answer = tokens_from_json(v, j.at("answer"));
        for (const auto& b : j.at("boxes")) s.boxes.push_back(box_from_json(b));
        s.task = parse_task_tag(j.at("task").get<std::string>());
        return s;
    });
}

json generation_to_json(const Vocabulary& v, const Generation& g, int id) {
    json j;
    j["id"] = id;
    j["answer"] = tokens_to_json(v, g.answer);
    json boxes = json::array();
    for (const auto& b : g.boxes) boxes.push_back(box_to_json(b));
    j["boxes"] = boxes;
    j["truncated"] = g.truncated;
    return j;
}

PredictionRecord prediction_from_json(const json& j) {
    return with_context("prediction", [&] {
        check_keys(j, {"id", "answer", "boxes", "truncated"}, "prediction");
        PredictionRecord p;
        p.id = j.at("id").get<int>();
        p.answer = j.at("answer").get<std::vector<std::string>>();
        for (const auto& b : j.at("boxes")) p.boxes.push_back(box_from_json(b));
        p.truncated = j.value("truncated", false);
        return p;
    });
}

json to_json(const ModelConfig& c) {
    return json{{"embed_dim", c.embed_dim},
                {"num_layers", c.num_layers},
                {"num_heads", c.num_heads},
                {"patch_size", c.patch_size},
                {"max_seq_len", c.max_seq_len},
                {"vocab_size", c.vocab_size},
                {"grounding_hidden_dim", c.grounding_hidden_dim},
                {"ffn_multiplier", c.ffn_multiplier},
                {"squash_boxes", c.squash_boxes},
                {"dual_token", c.dual_token}};
}

ModelConfig model_config_from_json(const json& j) {
    return with_context("model config", [&] {
        check_keys(j,
                   {"embed_dim", "num_layers", "num_heads", "patch_size", "max_seq_len", "vocab_size",
                    "grounding_hidden_dim", "ffn_multiplier", "squash_boxes", "dual_token"},
                   "model config");
        ModelConfig c;
        c.embed_dim = j.value("embed_dim", c.embed_dim);
        c.num_layers = j.value("num_layers", c.num_layers);
        c.num_heads = j.value("num_heads", c.num_heads);
        c.patch_size = j.value("patch_size", c.patch_size);
        c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
        c.vocab_size = j.value("vocab_size", c.vocab_size);
        c.grounding_hidden_dim = j.value("grounding_hidden_dim", c.grounding_hidden_dim);
        c.ffn_multiplier = j.value("ffn_multiplier", c.ffn_multiplier);
        c.squash_boxes = j.value("squash_boxes", c.squash_boxes);
        c.dual_token = j.value("dual_token", c.dual_token);
        return c;
    });
}

json to_json(const TrainConfig& c) {
    return json{{"lambda_text", c.lambda_text},
                {"lambda_bb", c.lambda_bb},
                {"learning_rate", c.learning_rate},
                {"steps", c.steps},
                {"batch_size", c.batch_size},
                {"seed", c.seed},
                {"use_hungarian", c.use_hungarian},
                {"use_bb_token", c.use_bb_token},
                {"optimizer", to_string(c.optimizer)},
                {"momentum", c.momentum},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_eps", c.adam_eps},
                {"grad_clip", c.grad_clip},
                {"freeze_visual", c.freeze_visual},
                {"schedule", to_string(c.schedule)},
                {"warmup_steps", c.warmup_steps}};
}

TrainConfig train_config_from_json(const json& j) {
    return with_context("train config", [&] {
        check_keys(j,
                   {"lambda_text", "lambda_bb", "learning_rate", "steps", "batch_size", "seed", "use_hungarian",
                    "use_bb_token", "optimizer", "momentum", "adam_beta1", "adam_beta2", "adam_eps", "grad_clip",
                    "freeze_visual", "schedule", "warmup_steps"},
                   "train config");
        TrainConfig c;
        c.lambda_text = j.value("lambda_text", c.lambda_text);
        c.lambda_bb = j.value("lambda_bb", c.lambda_bb);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.steps = j.value("steps", c.steps);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.seed = j.value("seed", c.seed);
        c.use_hungarian = j.value("use_hungarian", c.use_hungarian);
        c.use_bb_token = j.value("use_bb_token", c.use_bb_token);
        c.optimizer = parse_optimizer(j.value("optimizer", to_string(c.optimizer)));
        c.momentum = j.value("momentum", c.momentum);
        c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
        c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
        c.adam_eps = j.value("adam_eps", c.adam_eps);
        c.grad_clip = j.value("grad_clip", c.grad_clip);
        c.freeze_visual = j.value("freeze_visual", c.freeze_visual);
        c.schedule = parse_schedule(j.value("schedule", to_string(c.schedule)));
        c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
        c.validate();
        return c;
    });
}

json to_json(const DataKnobs& k) {
    return json{{"canvas", k.canvas},       {"min_objects", k.min_objects}, {"max_objects", k.max_objects},
                {"task_mix", k.task_mix},   {"size_mix", k.size_mix},       {"twin_prob", k.twin_prob},
                {"max_multi", k.max_multi}, {"rotate", k.rotate}};
}

DataKnobs knobs_from_json(const json& j) {
    return with_context("data knobs", [&] {
        check_keys(j, {"canvas", "min_objects", "max_objects", "task_mix", "size_mix", "twin_prob", "max_multi", "rotate"},
                   "data knobs");
        DataKnobs k;
        k.canvas = j.value("canvas", k.canvas);
        k.min_objects = j.value("min_objects", k.min_objects);
        k.max_objects = j.value("max_objects", k.max_objects);
        k.task_mix = j.value("task_mix", k.task_mix);
        k.size_mix = j.value("size_mix", k.size_mix);
        k.twin_prob = j.value("twin_prob", k.twin_prob);
        k.max_multi = j.value("max_multi", k.max_multi);
        k.rotate = j.value("rotate", k.rotate);
        k.validate();
        return k;
    });
}

std::string to_jsonl(const std::vector<json>& lines) {
    std::string out;
    for (const auto& j : lines) {
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
    std::vector<json> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(number) + ": malformed JSON: " + e.what());
        }
    }
    return out;
}

std::vector<GroundedSample> read_dataset(const std::filesystem::path& path, const Vocabulary& v) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
    std::vector<GroundedSample> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(sample_from_json(v, json::parse(line)));
        } catch (const std::exception& e) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

void write_dataset(const std::filesystem::path& path, const Vocabulary& v, const std::vector<GroundedSample>& data) {
    std::vector<json> lines;
    lines.reserve(data.size());
    for (const auto& s : data) lines.push_back(sample_to_json(v, s));
    write_text(path, to_jsonl(lines));
}

json read_json(const std::filesystem::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": malformed JSON: " + e.what());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw std::runtime_error(path.string() + ": write failed");
    }
    std::filesystem::rename(tmp, path);
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& what) {
    if (!j.is_object()) throw std::invalid_argument(what + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw std::invalid_argument(what + ": unknown key \"" + key + "\"");
        }
    }
}

}  // namespace vlg
