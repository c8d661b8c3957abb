// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "helpers.hpp"
#include "vlg/checkpoint.hpp"
#include "vlg/jsonio.hpp"
#include "vlg/pipeline.hpp"
#include "vlg/scenegen.hpp"

using namespace vlg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("vlg_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("base64") {
    CHECK(base64_encode({}) == "");
    CHECK(base64_encode({'f'}) == "Zg==");
    CHECK(base64_encode({'f', 'o'}) == "Zm8=");
    CHECK(base64_encode({'f', 'o', 'o', 'b', 'a', 'r'}) == "Zm9vYmFy");
    CHECK(base64_decode("Zm9vYg==") == std::vector<std::uint8_t>{'f', 'o', 'o', 'b'});
    CHECK_THROWS_AS(base64_decode("Zm9v!"), std::invalid_argument);
    std::vector<std::uint8_t> all(256);
    for (int i = 0; i < 256; ++i) all[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    CHECK(base64_decode(base64_encode(all)) == all);
}

TEST_CASE("configs round trip through JSON") {
    ModelConfig mc;
    mc.embed_dim = 32;
    mc.vocab_size = 9;
    mc.squash_boxes = false;
    CHECK(model_config_from_json(to_json(mc)) == mc);
    TrainConfig tc;
    tc.optimizer = OptimizerKind::Adam;
    tc.schedule = LrSchedule::Cosine;
    tc.warmup_steps = 7;
    tc.seed = 123456789012345ULL;
    CHECK(train_config_from_json(to_json(tc)) == tc);
    DataKnobs k;
    k.task_mix = {1, 2, 3};
    k.rotate = false;
    CHECK(knobs_from_json(to_json(k)) == k);

    auto j = to_json(tc);
    j["learning_rat"] = 1.0;
    CHECK_THROWS_AS(train_config_from_json(j), std::invalid_argument);
    CHECK(train_config_from_json(json{{"steps", 5}}).steps == 5);
}

TEST_CASE("dataset JSONL round trip") {
    TempDir tmp;
    const auto v = scene_vocabulary();
    const auto data = generate_dataset(20, 3);
    const auto path = tmp.path / "data.jsonl";
    write_dataset(path, v, data);
    const auto back = read_dataset(path, v);
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].id == data[i].id);
        CHECK(back[i].image == data[i].image);
        CHECK(back[i].query == data[i].query);
        CHECK(back[i].answer == data[i].answer);
        CHECK(back[i].boxes == data[i].boxes);
        CHECK(back[i].task == data[i].task);
    }
    const auto first = read_jsonl(path).front();
    CHECK(first.at("task").get<std::string>() == to_string(data[0].task));
    CHECK(first.at("image").is_string());
}

TEST_CASE("malformed dataset lines name the line") {
    TempDir tmp;
    const auto v = scene_vocabulary();
    const auto path = tmp.path / "bad.jsonl";
    auto text = read_text([&] {
        write_dataset(path, v, generate_dataset(6, 1));
        return path;
    }());
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    lines[4] = lines[4].substr(0, lines[4].size() / 2);
    std::string broken;
    for (const auto& l : lines) broken += l + "\n";
    write_text(path, broken);
    try {
        read_dataset(path, v);
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("bad.jsonl:5:") != std::string::npos);
    }

    lines[4] = R"({"id":4,"image":"","width":64,"height":64,"query":["nope"],"answer":[],"boxes":[],"task":"grounding"})";
    broken.clear();
    for (const auto& l : lines) broken += l + "\n";
    write_text(path, broken);
    CHECK_THROWS_WITH_AS(read_dataset(path, v), doctest::Contains(":5:"), std::invalid_argument);
}

TEST_CASE("checkpoint round trip") {
    TempDir tmp;
    const auto v = testing::micro_vocab();
    const auto mc = testing::micro_config(v);
    TrainConfig tc;
    tc.optimizer = OptimizerKind::Adam;
    tc.steps = 4;
    tc.batch_size = 2;
    Rng rng(1);
    std::vector<GroundedSample> data;
    for (int i = 0; i < 4; ++i) data.push_back(testing::micro_sample(v, 1, rng));
    Checkpoint ck{start_training<float>(mc, tc), tc, v};
    auto half = tc;
    half.steps = 2;
    train(ck.state, v, data, half);
    const auto path = tmp.path / "model.ckpt";
    save_checkpoint(path, ck);
    auto back = load_checkpoint(path);
    CHECK(back.state.step == 2);
    CHECK(back.train == tc);
    CHECK(back.vocab == v);
    CHECK(back.state.model.config == ck.state.model.config);
    const auto a = ck.state.model.params.named();
    const auto b = back.state.model.params.named();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i].second == *b[i].second);
    REQUIRE(back.state.optimizer.slots.size() == 2);

    train(ck.state, v, data, tc);
    train(back.state, v, data, back.train);
    CHECK(ck.state.model.params.head_w == back.state.model.params.head_w);

    {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        out << "x";
    }
    CHECK_THROWS(load_checkpoint(path));
    write_text(path, "VLGCKPT0");
    CHECK_THROWS(load_checkpoint(path));
    CHECK_THROWS(load_checkpoint(tmp.path / "missing.ckpt"));
}

TEST_CASE("align_records") {
    const auto v = scene_vocabulary();
    const auto data = generate_dataset(3, 2);
    std::vector<PredictionRecord> pred;
    for (const auto& s : data) pred.push_back({s.id, decode(v, s.answer), s.boxes, false});
    std::swap(pred[0], pred[2]);
    const auto recs = align_records(pred, data, v);
    REQUIRE(recs.size() == 3);
    for (const auto& r : recs)
        for (double iou : r.ious) CHECK(iou == doctest::Approx(1.0));

    auto dup = pred;
    dup[1].id = dup[0].id;
    CHECK_THROWS_WITH(align_records(dup, data, v), doctest::Contains("duplicate"));
    pred.pop_back();
    CHECK_THROWS_WITH(align_records(pred, data, v), doctest::Contains("without predictions"));
}

TEST_CASE("ablation grid") {
    const auto g = ablation_grid();
    REQUIRE(g.size() == 7);
    CHECK(g[0].name == "hungarian+bb");
    CHECK(g[0].use_hungarian);
    CHECK(g[0].use_bb_token);
    int distinct = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j)
            seen |= g[j].use_hungarian == g[i].use_hungarian && g[j].use_bb_token == g[i].use_bb_token &&
                    g[j].lambda_bb == g[i].lambda_bb;
        distinct += seen ? 0 : 1;
    }
    CHECK(distinct == 6);
}
