// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "vlg/evalkit.hpp"

using namespace vlg;

namespace {

std::vector<std::string> words(std::initializer_list<const char*> w) { return {w.begin(), w.end()}; }

EvalRecord with_ious(int id, std::vector<double> ious, TaskTag task = TaskTag::Grounding) {
    EvalRecord r;
    r.id = id;
    r.task = task;
    r.ious = std::move(ious);
    r.ref.assign(r.ious.size(), OrientedBox{0, 0, 10, 10, 0});
    return r;
}

OrientedBox rand_box(Rng& rng) {
    const double x = rng.uniform(0, 60), y = rng.uniform(0, 60);
    return {x, y, x + rng.uniform(5, 40), y + rng.uniform(5, 40), rng.uniform(0, 100)};
}

}  // namespace

TEST_CASE("match_for_eval") {
    const OrientedBox a{0, 0, 10, 10, 0}, b{50, 50, 70, 70, 0};
    CHECK(match_for_eval({a}, {a}) == std::vector<double>{1.0});
    CHECK(match_for_eval({}, {a}) == std::vector<double>{0.0});
    CHECK(match_for_eval({a, b}, {}).empty());
    const auto crossed = match_for_eval({b, a}, {a, b});
    CHECK(crossed == std::vector<double>{1.0, 1.0});
    CHECK(match_for_eval({b, a, {0, 0, 5, 5, 0}}, {a}) == std::vector<double>{1.0});
}

TEST_CASE("match_for_eval equals brute-force matching") {
    Rng rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<OrientedBox> pred(rng.below(5)), ref(1 + rng.below(4));
        for (auto& p : ref) p = rand_box(rng);
        for (auto& p : pred) {
            p = rng.below(2) == 0 ? ref[rng.below(ref.size())] : rand_box(rng);
            p.x1 += rng.uniform(-3, 3);
        }
        std::vector<std::vector<double>> score(pred.size(), std::vector<double>(ref.size()));
        for (std::size_t i = 0; i < pred.size(); ++i)
            for (std::size_t j = 0; j < ref.size(); ++j) score[i][j] = rotated_iou(pred[i], ref[j]);
        const auto expect = oracle::brute_force_max_matching(score, ref.size());
        const auto got = match_for_eval(pred, ref);
        double se = 0, sg = 0;
        for (std::size_t j = 0; j < ref.size(); ++j) {
            se += expect[j];
            sg += got[j];
        }
        CHECK(std::abs(se - sg) <= 1e-9);
    }
}

TEST_CASE("accuracy") {
    CHECK(accuracy({with_ious(0, {0.6})}, 0.5) == 1.0);
    CHECK(accuracy({with_ious(0, {0.6, 0.4})}, 0.5) == 0.5);
    CHECK(accuracy({with_ious(0, {0.5})}, 0.5) == 0.0);
    const std::vector<EvalRecord> recs{with_ious(0, {0.6, 0.4}), with_ious(1, {0.9}), with_ious(2, {0.3, 0.2})};
    CHECK(accuracy(recs, 0.5) == doctest::Approx(0.4));
    CHECK(accuracy(recs, 0.5, AccuracyMode::PerSample) == doctest::Approx(1.0 / 3.0));
    CHECK(accuracy(recs, 0.25) >= accuracy(recs, 0.5));
    auto shuffled = recs;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(accuracy(shuffled, 0.5) == accuracy(recs, 0.5));
    CHECK_THROWS_AS(accuracy({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(accuracy(recs, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(accuracy(recs, 1.0), std::invalid_argument);
}

TEST_CASE("accuracy is monotone in tau and ignores prediction order") {
    Rng rng(9);
    std::vector<EvalRecord> recs;
    for (int i = 0; i < 50; ++i) {
        std::vector<OrientedBox> ref(1 + rng.below(3)), pred(rng.below(4));
        for (auto& b : ref) b = rand_box(rng);
        for (auto& b : pred) b = rng.below(2) ? ref[rng.below(ref.size())] : rand_box(rng);
        recs.push_back(make_record(i, pred, ref, {}, {}, TaskTag::Grounding));
        std::reverse(pred.begin(), pred.end());
        const auto again = make_record(i, pred, ref, {}, {}, TaskTag::Grounding);
        double a = 0, b = 0;
        for (double x : recs.back().ious) a += x;
        for (double x : again.ious) b += x;
        CHECK(std::abs(a - b) <= 1e-9);
    }
    double prev = 1.0;
    for (double tau = 0.05; tau < 1.0; tau += 0.05) {
        const double acc = accuracy(recs, tau);
        CHECK(acc <= prev);
        prev = acc;
    }
}

TEST_CASE("cumulative_curve") {
    const auto grid = default_grid();
    CHECK(grid.size() == 101);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == 1.0);

    auto c = cumulative_curve({with_ious(0, {0, 0, 0})}, grid);
    for (const auto& p : c) CHECK(p.fraction == 1.0);

    std::vector<double> tenths;
    for (int i = 1; i <= 10; ++i) tenths.push_back(i / 10.0);
    c = cumulative_curve({with_ious(0, tenths)}, {0.5, 1.0});
    CHECK(c[0].fraction == doctest::Approx(0.5));
    CHECK(c[1].fraction == 1.0);

    c = cumulative_curve({with_ious(0, {0.2, 0.8}), with_ious(1, {0.9})}, {0.5, 0.85, 1.0}, true);
    CHECK(c[0].fraction == doctest::Approx(0.5));
    CHECK(c[1].fraction == doctest::Approx(0.5));
    CHECK(c[2].fraction == 1.0);

    Rng rng(4);
    std::vector<EvalRecord> recs;
    for (int i = 0; i < 40; ++i) recs.push_back(with_ious(i, {rng.uniform(), rng.uniform()}));
    c = cumulative_curve(recs, grid);
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i].fraction >= c[i - 1].fraction);
    CHECK(c.back().fraction == 1.0);
}

TEST_CASE("rouge") {
    CHECK(rouge1(words({"a", "b"}), words({"a", "b"})) == 1.0);
    CHECK(std::abs(rouge1(words({"two", "airplanes"}), words({"two", "large", "airplanes"})) - 0.8) <= 1e-9);
    CHECK(rouge1(words({"x"}), words({"y"})) == 0.0);
    CHECK(rouge1({}, {}) == 1.0);
    CHECK(rouge1({}, words({"a"})) == 0.0);
    CHECK(rouge1(words({"a", "a", "a"}), words({"a"})) == doctest::Approx(0.5));

    CHECK(rougeL(words({"a", "b", "c"}), words({"a", "b", "c"})) == 1.0);
    CHECK(std::abs(rougeL(words({"a", "b", "c"}), words({"a", "c", "b"})) - 2.0 / 3.0) <= 1e-9);
    CHECK(std::abs(rougeL(words({"c", "b", "a"}), words({"a", "b", "c"})) - 1.0 / 3.0) <= 1e-9);
    CHECK(rougeL({}, {}) == 1.0);
    CHECK(rougeL(words({"a"}), {}) == 0.0);

    CHECK(text_tokens(words({"1", "red", "⟨bb⟩", "⟨loc⟩", "⟨eos⟩"})) == words({"1", "red"}));
}

TEST_CASE("build_report") {
    std::vector<EvalRecord> recs;
    recs.push_back(make_record(0, {{0, 0, 10, 10, 0}}, {{0, 0, 10, 10, 0}}, words({"1", "red", "square"}),
                               words({"1", "red", "square"}), TaskTag::Grounding));
    recs.push_back(make_record(1, {}, {{0, 0, 50, 50, 0}, {50, 50, 100, 100, 0}}, words({"2"}),
                               words({"2", "blue", "disks"}), TaskTag::ReferringMulti));
    const auto r = build_report(recs, {}, 1);
    CHECK(r.overall.boxes == 3);
    CHECK(r.overall.samples == 2);
    CHECK(*r.overall.acc50 == doctest::Approx(1.0 / 3.0));
    CHECK(*r.overall.sample_acc50 == doctest::Approx(0.5));
    CHECK(*r.overall.acc25 >= *r.overall.acc50);
    CHECK(r.by_size.at("medium").boxes == 1);
    CHECK(r.by_size.at("large").boxes == 2);
    CHECK(r.by_task.at("referring-multi").acc50 == 0.0);
    CHECK(r.by_count.at("single").boxes == 1);
    CHECK(r.truncated == 1);
    CHECK(r.curve.back().fraction == 1.0);
    CHECK(r.rouge1 == doctest::Approx((1.0 + 0.5) / 2.0));

    const auto j = report_to_json(r);
    CHECK(report_to_json(report_from_json(j)).dump() == j.dump());
    CHECK(curve_csv({{0.0, 0.25}, {0.5, 1.0}}) == "iou,fraction\n0.0000,0.250000\n0.5000,1.000000\n");
}

TEST_CASE("curve_svg") {
    const std::vector<NamedCurve> curves{{"full", {{0.0, 0.0}, {1.0, 1.0}}}, {"single", {{0.0, 0.5}, {1.0, 1.0}}}};
    const auto svg = curve_svg(curves, "demo");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("demo") != std::string::npos);
    CHECK(svg.find("single") != std::string::npos);
    CHECK(curve_svg(curves, "demo") == svg);
}
