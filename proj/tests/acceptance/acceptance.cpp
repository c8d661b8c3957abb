// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Set VLG_ACCEPT_ONLY=1,4,9 to run a
// subset. Artifacts and a copy of the summary land in ./acceptance_out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "vlg/assignment.hpp"
#include "vlg/decoding.hpp"
#include "vlg/evalkit.hpp"
#include "vlg/geometry.hpp"
#include "vlg/jsonio.hpp"
#include "vlg/pipeline.hpp"
#include "vlg/scenegen.hpp"
#include "vlg/training.hpp"

namespace fs = std::filesystem;
using namespace vlg;

namespace {

// Tolerances and budgets.
constexpr double kHungarianTol = 1e-9;
constexpr double kHungarianBudgetS = 5.0;
constexpr double kAxisAlignedTol = 1e-12;
constexpr double kOctagonTol = 1e-9;
constexpr std::size_t kMcSamples = 1'000'000;
constexpr double kMcSigmas = 3.0;
constexpr double kMcPassFraction = 0.99;
constexpr double kIouBudgetS = 60.0;
constexpr double kGradTol = 1e-4;
constexpr double kGradStep = 1e-4;
constexpr int kProtocolGenerations = 10'000;
constexpr double kPermutationTol = 1e-9;
constexpr double kOrderSensitivity = 1e-3;
constexpr double kOverfitTarget = 0.90;
constexpr double kOverfitFloor = 0.80;
constexpr double kOverfitLossRatio = 0.10;
constexpr double kOverfitBudgetS = 600.0;
constexpr double kFixtureRelTol = 1e-4;
constexpr double kRougeTol = 1e-9;

const fs::path kOut = "acceptance_out";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// ---- 1 -------------------------------------------------------------------

Outcome hungarian_exactness() {
    const auto t0 = Clock::now();
    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto L = 1 + rng.below(5), K = 1 + rng.below(5);
        CostMatrix c(L, K);
        const bool ties = trial % 3 == 0;
        for (std::size_t i = 0; i < L; ++i)
            for (std::size_t j = 0; j < K; ++j) c(i, j) = ties ? static_cast<double>(rng.below(3)) : rng.uniform(0, 1e4);
        worst = std::max(worst, std::abs(hungarian(c).total_cost - oracle::brute_force_assignment(c)));
    }
    const double secs = seconds_since(t0);
    return {worst <= kHungarianTol && secs < kHungarianBudgetS,
            fmt("1000 matrices, max |hungarian - brute force| = %.3g (tol %.0e), %.2f s (budget %.0f s)", worst,
                kHungarianTol, secs, kHungarianBudgetS)};
}

// ---- 2 -------------------------------------------------------------------

Outcome rotated_iou_accuracy() {
    const auto t0 = Clock::now();
    Rng rng(202);
    double worst_aa = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double ax = rng.uniform(0, 80), ay = rng.uniform(0, 80), bx = ax + rng.uniform(-20, 20),
                     by = ay + rng.uniform(-20, 20);
        const OrientedBox a{ax, ay, ax + rng.uniform(0.5, 20), ay + rng.uniform(0.5, 20), 0};
        const OrientedBox b{bx, by, bx + rng.uniform(0.5, 20), by + rng.uniform(0.5, 20), 0};
        const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
        const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
        const double closed = iw * ih / (a.area() + b.area() - iw * ih);
        worst_aa = std::max(worst_aa, std::abs(rotated_iou(a, b) - closed));
    }

    const OrientedBox sq{0, 0, 10, 10, 0}, turned{0, 0, 10, 10, 12.5};
    const auto ca = corners(sq), ct = corners(turned);
    const double cover = polygon_area(clip_convex({ca.begin(), ca.end()}, {ct.begin(), ct.end()})) / sq.area();
    const double octagon_err = std::abs(cover - 2.0 * (std::sqrt(2.0) - 1.0));
    const double iou45_err = std::abs(rotated_iou(sq, turned) - 1.0 / std::sqrt(2.0));
    const double quarter_err = std::abs(rotated_iou(sq, {0, 0, 10, 10, 25}) - 1.0);

    Rng mc(203);
    int within = 0;
    const int pairs = 1000;
    for (int i = 0; i < pairs; ++i) {
        const double x = rng.uniform(0, 70), y = rng.uniform(0, 70);
        const OrientedBox a{x, y, x + rng.uniform(2, 30), y + rng.uniform(2, 30), rng.uniform(0, 100)};
        const double bx = a.center_x() + rng.uniform(-15, 15), by = a.center_y() + rng.uniform(-15, 15);
        const double bw = rng.uniform(2, 30), bh = rng.uniform(2, 30);
        const OrientedBox b{bx - bw / 2, by - bh / 2, bx + bw / 2, by + bh / 2, rng.uniform(0, 100)};
        const auto est = oracle::monte_carlo_iou(a, b, kMcSamples, mc);
        within += std::abs(est.iou - rotated_iou(a, b)) <= kMcSigmas * est.stderr_ + 1e-12 ? 1 : 0;
    }
    const double frac = static_cast<double>(within) / pairs;
    const double secs = seconds_since(t0);
    const bool ok = worst_aa <= kAxisAlignedTol && octagon_err <= kOctagonTol && iou45_err <= kOctagonTol &&
                    quarter_err <= kOctagonTol && frac >= kMcPassFraction && secs < kIouBudgetS;
    return {ok, fmt("axis-aligned max err %.2g; 45 deg: octagon/area err %.2g, IoU-1/sqrt2 err %.2g; theta 25 IoU err "
                    "%.2g; MC within %.0f sigma: %d/%d; %.1f s",
                    worst_aa, octagon_err, iou45_err, quarter_err, kMcSigmas, within, pairs, secs)};
}

// ---- 3 -------------------------------------------------------------------

Outcome gradient_fidelity() {
    const auto v = testing::micro_vocab();
    const auto mc = testing::micro_config(v);
    double worst_global = 0.0, worst_tensor = 0.0;
    std::string worst_name;
    int seeds = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto m = init_model<double>(mc, seed);
        Rng rng(500 + seed);
        const auto s = testing::micro_sample(v, 2, rng);
        TrainConfig cfg;
        auto g = Params<double>::zeros(mc);
        joint_loss(m, v, s, cfg, &g);
        const auto fd =
            oracle::finite_difference(m.params, [&] { return joint_loss(m, v, s, cfg).total; }, kGradStep);
        const auto r = oracle::compare_gradients(fd, g);
        worst_global = std::max(worst_global, r.global_rel);
        if (r.worst_tensor_rel > worst_tensor) {
            worst_tensor = r.worst_tensor_rel;
            worst_name = r.worst_tensor;
        }
        ++seeds;
    }
    return {worst_global <= kGradTol && worst_tensor <= kGradTol,
            fmt("D=8, 1 layer, 2 boxes, %d seeds: max global rel err %.2e, worst per-tensor %.2e (%s), tol %.0e",
                seeds, worst_global, worst_tensor, worst_name.c_str(), kGradTol)};
}

// ---- 4 -------------------------------------------------------------------

Outcome protocol_invariants() {
    const auto v = scene_vocabulary();
    const auto data = generate_dataset(50, 404);
    ModelConfig mc;
    mc.embed_dim = 16;
    mc.num_layers = 1;
    mc.num_heads = 2;
    mc.vocab_size = static_cast<int>(v.size());
    mc.grounding_hidden_dim = 8;
    Rng rng(405);
    int bad_protocol = 0, bad_count = 0, bad_range = 0, models = 0;
    std::size_t after_bb = 0, total_boxes = 0, truncated = 0;
    Model<float> model;
    for (int i = 0; i < kProtocolGenerations; ++i) {
        if (i % 20 == 0) {
            model = init_model<float>(mc, 4000 + static_cast<std::uint64_t>(models++));
            // tilt the language head so ⟨bb⟩ and ⟨eos⟩ both show up
            for (Eigen::Index k = 0; k < model.params.head_b.size(); ++k)
                model.params.head_b(0, k) = static_cast<float>(rng.uniform(-3, 3));
            model.params.head_b(0, v.bb()) += static_cast<float>(rng.uniform(0, 4));
            model.params.head_b(0, v.eos()) += static_cast<float>(rng.uniform(0, 3));
        }
        const auto& s = data[static_cast<std::size_t>(i) % data.size()];
        DecodeStats stats;
        const auto g = greedy_generate(model, v, s.image, s.query, 1 + rng.below(48), &stats);
        after_bb += stats.lm_head_calls_after_bb;
        truncated += g.truncated ? 1 : 0;
        if (!validate_protocol(v, g.answer, g.truncated).ok) ++bad_protocol;
        const auto locs = static_cast<std::size_t>(std::count(g.answer.ids.begin(), g.answer.ids.end(), v.loc()));
        if (g.boxes.size() != locs || g.loc_positions.size() != locs) ++bad_count;
        total_boxes += g.boxes.size();
        for (const auto& b : g.boxes)
            for (double p : b.params())
                if (!(p >= 0.0 && p <= 100.0)) {
                    ++bad_range;
                    break;
                }
    }
    return {bad_protocol == 0 && bad_count == 0 && bad_range == 0 && after_bb == 0 && total_boxes > 0,
            fmt("%d generations from %d random models (%zu boxes, %zu truncated): protocol violations %d, count "
                "mismatches %d, out-of-range boxes %d, head calls after bb %zu",
                kProtocolGenerations, models, total_boxes, truncated, bad_protocol, bad_count, bad_range, after_bb)};
}

// ---- 5 -------------------------------------------------------------------

Outcome loss_masking() {
    const auto v = scene_vocabulary();
    const auto data = generate_dataset(100, 505);
    ModelConfig mc;
    mc.embed_dim = 16;
    mc.num_layers = 1;
    mc.num_heads = 2;
    mc.vocab_size = static_cast<int>(v.size());
    mc.grounding_hidden_dim = 8;
    const auto model = init_model<double>(mc, 506);
    Rng rng(507);
    TrainConfig cfg;
    int changed = 0, perturbed = 0;
    for (const auto& s : data) {
        auto ex = make_example(v, s, true, 64);
        // two trailing ⟨pad⟩ targets, as in a right-padded batch
        for (int k = 0; k < 2; ++k) {
            ex.inputs.ids.push_back(ex.targets.ids.back());
            ex.targets.ids.push_back(v.pad());
            ex.mask.push_back(false);
        }
        const double base = joint_loss(model, s.image, ex, s.boxes, cfg).ce;
        auto edited = ex;
        for (std::size_t t = 0; t < edited.targets.size(); ++t) {
            const auto id = edited.targets[t];
            if (id == v.loc() || id == v.pad()) {
                edited.targets.ids[t] = static_cast<TokenId>(rng.below(v.size()));
                ++perturbed;
            }
        }
        if (joint_loss(model, s.image, edited, s.boxes, cfg).ce != base) ++changed;
    }
    return {changed == 0 && perturbed > 0,
            fmt("100 samples, %d masked targets perturbed: CE changed on %d samples (required exactly 0)", perturbed,
                changed)};
}

// ---- 6 -------------------------------------------------------------------

Outcome permutation_invariance() {
    const auto v = scene_vocabulary();
    DataKnobs knobs;
    knobs.task_mix = {0.0, 0.0, 1.0};
    const auto data = generate_dataset(100, 606, knobs);
    ModelConfig mc;
    mc.embed_dim = 16;
    mc.num_layers = 1;
    mc.num_heads = 2;
    mc.vocab_size = static_cast<int>(v.size());
    mc.grounding_hidden_dim = 8;
    const auto model = init_model<double>(mc, 607);
    Rng rng(608);
    TrainConfig hung, ordered;
    ordered.use_hungarian = false;
    double worst = 0.0, largest_ordered = 0.0;
    for (const auto& s : data) {
        auto shuffled = s;
        while (shuffled.boxes == s.boxes) rng.shuffle(shuffled.boxes.begin(), shuffled.boxes.end());
        worst = std::max(worst, std::abs(joint_loss(model, v, s, hung).total - joint_loss(model, v, shuffled, hung).total));
        largest_ordered = std::max(largest_ordered, std::abs(joint_loss(model, v, s, ordered).total -
                                                             joint_loss(model, v, shuffled, ordered).total));
    }
    return {worst <= kPermutationTol && largest_ordered > kOrderSensitivity,
            fmt("100 multi-box samples: Hungarian max |delta| %.3g (tol %.0e); in-order max |delta| %.4g (needs > "
                "%.0e)",
                worst, kPermutationTol, largest_ordered, kOrderSensitivity)};
}

// ---- 7 -------------------------------------------------------------------

struct ExperimentConfig {
    ModelConfig model;
    TrainConfig train;
};

ExperimentConfig load_config(const std::string& name, const Vocabulary& v) {
    const auto j = read_json(fs::path(VLG_CONFIG_DIR) / name);
    ExperimentConfig c;
    c.model = model_config_from_json(j.at("model"));
    c.model.vocab_size = static_cast<int>(v.size());
    c.train = train_config_from_json(j.at("train"));
    return c;
}

std::vector<StepRecord> read_loss_csv(const fs::path& path) {
    std::vector<StepRecord> out;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        StepRecord r;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &r.step, &r.total, &r.ce, &r.ground) == 4) out.push_back(r);
    }
    return out;
}

std::vector<Report> g_reports;

Outcome overfit() {
    const auto v = scene_vocabulary();
    const auto cfg = load_config("overfit.json", v);
    const auto data = generate_dataset(32, 1);
    std::vector<std::string> parts;
    double primary = 0.0, lowest = 1.0, ratio = 0.0, fixture_err = 0.0, secs_primary = 0.0;
    bool fixture_found = false;
    for (std::uint64_t seed : {3ULL, 4ULL}) {
        auto tc = cfg.train;
        tc.seed = seed;
        const auto t0 = Clock::now();
        auto st = start_training<float>(cfg.model, tc);
        const auto hist = train(st, v, data, tc);
        const double secs = seconds_since(t0);
        const auto ev = evaluate_model(st.model, v, data, 32);
        const double acc = accuracy(ev.records, 0.5);
        g_reports.push_back(build_report(ev.records, {}, ev.truncated));
        lowest = std::min(lowest, acc);
        parts.push_back(fmt("seed %llu acc@0.5 %.4f (%.0f s)", static_cast<unsigned long long>(seed), acc, secs));
        if (seed == 3) {
            primary = acc;
            secs_primary = secs;
            ratio = hist.back().total / hist.front().total;
            write_text(kOut / "overfit_loss.csv", loss_history_csv(hist));
            const fs::path fixture = fs::path(VLG_FIXTURE_DIR) / "overfit_loss.csv";
            if (fs::exists(fixture)) {
                fixture_found = true;
                const auto ref = read_loss_csv(fixture);
                if (ref.size() != hist.size()) {
                    fixture_err = INFINITY;
                } else {
                    for (std::size_t i = 0; i < ref.size(); ++i)
                        fixture_err = std::max(fixture_err, std::abs(ref[i].total - hist[i].total) /
                                                                std::max(1.0, std::abs(ref[i].total)));
                }
            }
        }
    }
    std::string detail = "32 samples, 2000 steps: ";
    for (const auto& p : parts) detail += p + "; ";
    detail += fmt("final/initial loss %.4f (needs <= %.2f); fixture curve %s max rel dev %.2g", ratio,
                  kOverfitLossRatio, fixture_found ? "found," : "MISSING,", fixture_err);
    const bool ok = primary >= kOverfitTarget && lowest > kOverfitFloor && ratio <= kOverfitLossRatio &&
                    fixture_found && fixture_err <= kFixtureRelTol && secs_primary < kOverfitBudgetS;
    return {ok, detail};
}

// ---- 8 -------------------------------------------------------------------

std::vector<AblationRow> g_ablation;

Outcome ablation_directions() {
    const auto v = scene_vocabulary();
    const auto j = read_json(fs::path(VLG_CONFIG_DIR) / "ablation.json");
    AblationSetup setup;
    setup.model = model_config_from_json(j.at("model"));
    setup.model.vocab_size = static_cast<int>(v.size());
    setup.train = train_config_from_json(j.at("train"));
    setup.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    const auto lambdas = j.at("lambdas").get<std::vector<double>>();
    const auto n_train = j.at("n_train").get<std::size_t>();
    const auto n_test = j.at("n_test").get<std::size_t>();
    DataKnobs knobs;
    if (j.contains("knobs")) knobs = knobs_from_json(j.at("knobs"));
    const auto all = generate_dataset(n_train + n_test, j.at("data_seed").get<std::uint64_t>(), knobs);
    const std::vector<GroundedSample> train_set(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    const std::vector<GroundedSample> test_set(all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());

    const auto t0 = Clock::now();
    g_ablation = run_ablation(ablation_grid(lambdas), setup, v, train_set, test_set,
                              [](const std::string& m) { std::fprintf(stderr, "  ablation: %s\n", m.c_str()); });
    const double secs = seconds_since(t0);
    write_text(kOut / "ablation.md", ablation_table(g_ablation));
    write_text(kOut / "ablation.json", ablation_to_json(g_ablation).dump(2) + "\n");

    auto find = [&](bool hung, bool bb, double lambda) -> const AblationRow& {
        for (const auto& r : g_ablation)
            if (r.variant.use_hungarian == hung && r.variant.use_bb_token == bb && r.variant.lambda_bb == lambda)
                return r;
        throw std::runtime_error("ablation row missing");
    };
    const auto& full = find(true, true, 10.0);
    const auto& in_order = find(false, true, 10.0);
    const auto& single = find(true, false, 10.0);
    std::string sweep;
    for (double l : lambdas) sweep += fmt(" %g: %.4f", l, find(true, true, l).mean_acc50);
    const bool ok = full.mean_acc50 >= in_order.mean_acc50 && full.mean_acc50 >= single.mean_acc50;
    return {ok, fmt("%zu train / %zu test, %zu seeds, mean acc@0.5: full %.4f, in-order %.4f, single token %.4f; "
                    "lambda_bb sweep (reported only):%s; %.0f s",
                    n_train, n_test, setup.seeds.size(), full.mean_acc50, in_order.mean_acc50, single.mean_acc50,
                    sweep.c_str(), secs)};
}

// ---- 9 -------------------------------------------------------------------

Outcome metric_sanity() {
    std::vector<Report> reports = g_reports;
    for (const char* name : {"report_a.json", "report_b.json"})
        reports.push_back(report_from_json(read_json(fs::path(VLG_FIXTURE_DIR) / name)));
    // a spread of synthetic records exercises every breakdown key
    Rng rng(909);
    std::vector<EvalRecord> recs;
    for (int i = 0; i < 200; ++i) {
        std::vector<OrientedBox> ref(1 + rng.below(3)), pred;
        for (auto& b : ref) b = testing::random_box(rng);
        for (const auto& b : ref) {
            auto p = b;
            p.x1 += rng.uniform(-8, 8);
            p.theta += rng.uniform(-5, 5);
            if (rng.below(4)) pred.push_back(p);
        }
        recs.push_back(make_record(i, pred, ref, {}, {}, static_cast<TaskTag>(rng.below(3))));
    }
    reports.push_back(build_report(recs));

    int acc_violations = 0, cdf_violations = 0, cells = 0;
    auto check_cell = [&](const AccuracyCell& c) {
        if (!c.acc50 || !c.acc25) return;
        ++cells;
        if (*c.acc25 < *c.acc50) ++acc_violations;
        if (c.sample_acc50 && c.sample_acc25 && *c.sample_acc25 < *c.sample_acc50) ++acc_violations;
    };
    for (const auto& r : reports) {
        check_cell(r.overall);
        for (const auto* m : {&r.by_size, &r.by_task, &r.by_kind, &r.by_count})
            for (const auto& [_, c] : *m) check_cell(c);
        for (std::size_t i = 1; i < r.curve.size(); ++i)
            if (r.curve[i].fraction < r.curve[i - 1].fraction) ++cdf_violations;
        if (r.curve.empty() || r.curve.back().iou != 1.0 || r.curve.back().fraction != 1.0) ++cdf_violations;
    }
    for (const auto& row : g_ablation)
        for (std::size_t s = 0; s < row.acc50.size(); ++s) {
            ++cells;
            if (row.acc25[s] < row.acc50[s]) ++acc_violations;
        }

    auto w = [](std::initializer_list<const char*> l) { return std::vector<std::string>(l.begin(), l.end()); };
    const double e1 = std::abs(rouge1(w({"two", "airplanes"}), w({"two", "large", "airplanes"})) - 0.8);
    const double e2 = std::abs(rougeL(w({"a", "b", "c"}), w({"a", "c", "b"})) - 2.0 / 3.0);
    const double e3 = std::abs(rougeL(w({"c", "b", "a"}), w({"a", "b", "c"})) - 1.0 / 3.0);
    const double rouge_err = std::max({e1, e2, e3});
    return {acc_violations == 0 && cdf_violations == 0 && rouge_err <= kRougeTol,
            fmt("%zu reports, %d accuracy cells: acc@0.25 < acc@0.5 in %d; CDF violations %d; ROUGE fixtures max err "
                "%.2g (tol %.0e)",
                reports.size(), cells, acc_violations, cdf_violations, rouge_err, kRougeTol)};
}

// ---- 10 ------------------------------------------------------------------

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

bool same_bytes(const fs::path& a, const fs::path& b) {
    return fs::exists(a) && fs::exists(b) && read_text(a) == read_text(b);
}

Outcome determinism() {
    const fs::path dir = fs::absolute(kOut / "determinism");
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = VLG_CLI;
    write_text(dir / "config.json",
               R"({"model": {"embed_dim": 16, "num_layers": 1, "num_heads": 2, "grounding_hidden_dim": 16},
 "train": {"steps": 30, "batch_size": 4, "seed": 5, "optimizer": "adam", "learning_rate": 0.003}})");
    int failures = 0;
    std::vector<std::string> mismatched;
    for (const char* run_id : {"a", "b"}) {
        const auto p = [&](const std::string& f) { return (dir / (std::string(run_id) + "_" + f)).string(); };
        failures += run(cli + " gen-data --n 40 --seed 10 --out " + p("data.jsonl")) != 0;
        failures += run(cli + " train --data " + p("data.jsonl") + " --config " + (dir / "config.json").string() +
                        " --quiet --out " + p("model.ckpt")) != 0;
        failures += run(cli + " infer --ckpt " + p("model.ckpt") + " --data " + p("data.jsonl") + " --out " +
                        p("pred.jsonl")) != 0;
        failures += run(cli + " eval --pred " + p("pred.jsonl") + " --ref " + p("data.jsonl") + " --out " +
                        p("report.json") + " --curve-csv " + p("curve.csv")) != 0;
    }
    const std::vector<std::string> artifacts{"data.jsonl", "model.ckpt", "model.ckpt.loss.csv", "pred.jsonl",
                                             "report.json", "curve.csv"};
    for (const auto& f : artifacts)
        if (!same_bytes(dir / ("a_" + f), dir / ("b_" + f))) mismatched.push_back(f);
    std::string list;
    for (const auto& m : mismatched) list += " " + m;
    return {failures == 0 && mismatched.empty(),
            fmt("gen-data, train, infer, eval run twice: %d command failures, %zu/%zu artifacts differ%s", failures,
                mismatched.size(), artifacts.size(), list.c_str())};
}

}  // namespace

int main() {
    fs::create_directories(kOut);
    std::set<int> only;
    if (const char* env = std::getenv("VLG_ACCEPT_ONLY")) {
        std::stringstream ss(env);
        std::string tok;
        while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    }
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"hungarian exactness", hungarian_exactness},
        {"rotated IoU", rotated_iou_accuracy},
        {"gradient fidelity", gradient_fidelity},
        {"protocol invariants", protocol_invariants},
        {"loss masking", loss_masking},
        {"permutation invariance", permutation_invariance},
        {"overfit", overfit},
        {"ablation directions", ablation_directions},
        {"metric sanity", metric_sanity},
        {"determinism", determinism},
    };
    int failed = 0;
    std::ofstream summary(kOut / "summary.txt");
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(number)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        const std::string line =
            fmt("%s %2d %s: ", o.pass ? "PASS" : "FAIL", number, criteria[i].first.c_str()) + o.detail;
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
        summary << line << "\n" << std::flush;
    }
    return failed == 0 ? 0 : 1;
}
