// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vlg/jsonio.hpp"

namespace vlg {

namespace {

constexpr char kMagic[8] = {'V', 'L', 'G', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t x) {
    char b[4];
    std::memcpy(b, &x, 4);
    out.append(b, 4);
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos, const std::string& where) {
    if (pos + 4 > in.size()) throw std::runtime_error(where + ": truncated checkpoint");
    std::uint32_t x;
    std::memcpy(&x, in.data() + pos, 4);
    pos += 4;
    return x;
}

std::vector<std::pair<std::string, Mat<float>*>> all_arrays(TrainState<float>& s) {
    auto out = s.model.params.named();
    for (std::size_t k = 0; k < s.optimizer.slots.size(); ++k) {
        for (auto& [name, m] : s.optimizer.slots[k].named()) out.emplace_back("slot" + std::to_string(k) + "." + name, m);
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    auto state = ckpt.state;
    const auto arrays = all_arrays(state);
    json shapes = json::array();
    for (const auto& [name, m] : arrays) shapes.push_back(json{{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
    json header{{"model", to_json(state.model.config)},
                {"train", to_json(ckpt.train)},
                {"vocab", ckpt.vocab.tokens()},
                {"vocab_hash", ckpt.vocab.content_hash()},
                {"step", state.step},
                {"optimizer_slots", state.optimizer.slots.size()},
                {"arrays", shapes}};
    const std::string text = header.dump();

    std::string out(kMagic, sizeof(kMagic));
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    for (const auto& [_, m] : arrays) {
        out.append(reinterpret_cast<const char*>(m->data()), static_cast<std::size_t>(m->size()) * sizeof(float));
    }
    write_text(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string where = path.string();
    const std::string in = read_text(path);
    if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error(where + ": not a checkpoint (bad magic)");
    }
    std::size_t pos = sizeof(kMagic);
    const auto version = get_u32(in, pos, where);
    if (version != kCheckpointVersion) {
        throw std::runtime_error(where + ": unsupported checkpoint version " + std::to_string(version));
    }
    const auto n = get_u32(in, pos, where);
    if (pos + n > in.size()) throw std::runtime_error(where + ": truncated checkpoint header");
    json header;
    try {
        header = json::parse(in.substr(pos, n));
    } catch (const json::exception& e) {
        throw std::runtime_error(where + ": malformed checkpoint header: " + e.what());
    }
    pos += n;

    Checkpoint ckpt;
    try {
        const auto tokens = header.at("vocab").get<std::vector<std::string>>();
        ckpt.vocab = Vocabulary::parse([&] {
            std::string t;
            for (const auto& w : tokens) t += w + "\n";
            return t;
        }());
        if (ckpt.vocab.content_hash() != header.at("vocab_hash").get<std::string>()) {
            throw std::runtime_error(where + ": vocabulary hash does not match its tokens");
        }
        ckpt.train = train_config_from_json(header.at("train"));
        const auto mc = model_config_from_json(header.at("model"));
        mc.validate();
        ckpt.state.model.config = mc;
        ckpt.state.model.params = Params<float>::zeros(mc);
        ckpt.state.step = header.at("step").get<int>();
        ckpt.state.optimizer.slots.assign(header.at("optimizer_slots").get<std::size_t>(), Params<float>::zeros(mc));
    } catch (const json::exception& e) {
        throw std::runtime_error(where + ": bad checkpoint header: " + e.what());
    }

    const auto arrays = all_arrays(ckpt.state);
    const auto& shapes = header.at("arrays");
    if (shapes.size() != arrays.size()) throw std::runtime_error(where + ": array count does not match the config");
    for (std::size_t i = 0; i < arrays.size(); ++i) {
        auto* m = arrays[i].second;
        if (shapes[i].at("name") != arrays[i].first || shapes[i].at("rows") != m->rows() ||
            shapes[i].at("cols") != m->cols()) {
            throw std::runtime_error(where + ": array \"" + arrays[i].first + "\" does not match the config");
        }
        const auto bytes = static_cast<std::size_t>(m->size()) * sizeof(float);
        if (pos + bytes > in.size()) throw std::runtime_error(where + ": truncated checkpoint payload");
        std::memcpy(m->data(), in.data() + pos, bytes);
        pos += bytes;
    }
    if (pos != in.size()) throw std::runtime_error(where + ": trailing bytes after checkpoint payload");
    return ckpt;
}

}  // namespace vlg
