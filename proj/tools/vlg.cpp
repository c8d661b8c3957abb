// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

// vlg: data generation, training, inference, evaluation, plotting and
// ablation runs for the grounding model.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "vlg/checkpoint.hpp"
#include "vlg/decoding.hpp"
#include "vlg/evalkit.hpp"
#include "vlg/jsonio.hpp"
#include "vlg/pipeline.hpp"
#include "vlg/scenegen.hpp"
#include "vlg/training.hpp"

namespace fs = std::filesystem;
using namespace vlg;

namespace {

constexpr const char* kVersion = "0.1.0";

fs::path out_path(const std::string& p) {
    fs::path path(p);
    if (path.is_relative()) {
        if (const char* dir = std::getenv("VLG_OUT_DIR"); dir != nullptr && *dir != '\0') return fs::path(dir) / path;
    }
    return path;
}

fs::path manifest_path(const fs::path& p) {
    auto m = p;
    m += ".manifest.json";
    return m;
}

std::string hash_json(const json& j) { return to_hex(fnv1a64(j.dump())); }

void write_manifest(const fs::path& output, const std::string& command, const json& config, const json& extra) {
    json m{{"command", command},
           {"version", kVersion},
           {"config", config},
           {"config_hash", hash_json(config)}};
    for (const auto& [k, v] : extra.items()) m[k] = v;
    write_text(manifest_path(output), m.dump(2) + "\n");
}

/// Vocabulary recorded next to a dataset.
Vocabulary dataset_vocab(const fs::path& data) {
    const auto mp = manifest_path(data);
    if (!fs::exists(mp)) throw std::runtime_error(data.string() + ": missing sidecar manifest " + mp.string());
    const auto m = read_json(mp);
    std::string text;
    for (const auto& w : m.at("vocab")) text += w.get<std::string>() + "\n";
    auto v = Vocabulary::parse(text);
    if (v.content_hash() != m.at("vocab_hash").get<std::string>()) {
        throw std::runtime_error(mp.string() + ": vocabulary hash does not match its tokens");
    }
    return v;
}

std::string file_hash(const fs::path& p) { return to_hex(fnv1a64(read_text(p))); }

// ---- gen-data ---------------------------------------------------------------

struct GenArgs {
    long long n = -1;
    std::uint64_t seed = 0;
    std::string out;
    std::string knobs_file;
    DataKnobs knobs;
    bool no_rotate = false;
};

void run_gen_data(GenArgs& a) {
    if (a.n < 1) throw CLI::ValidationError("--n", "must be >= 1");
    if (!a.knobs_file.empty()) a.knobs = knobs_from_json(read_json(a.knobs_file));
    if (a.no_rotate) a.knobs.rotate = false;
    a.knobs.validate();
    const auto out = out_path(a.out);
    const auto v = scene_vocabulary();
    const auto data = generate_dataset(static_cast<std::size_t>(a.n), a.seed, a.knobs);
    write_dataset(out, v, data);
    const json config{{"n", a.n}, {"seed", a.seed}, {"knobs", to_json(a.knobs)}};
    write_manifest(out, "gen-data", config,
                   json{{"seed", a.seed},
                        {"vocab_hash", v.content_hash()},
                        {"vocab", v.tokens()},
                        {"output_hash", file_hash(out)}});
    std::cout << "wrote " << data.size() << " samples to " << out.string() << "\n";
}

// ---- train --------------------------------------------------------------------

struct TrainArgs {
    std::string data, config, out, resume, loss_csv;
    int steps = -1;
    long long seed = -1;
    bool quiet = false;
};

void run_train(const TrainArgs& a) {
    const fs::path data_path(a.data);
    const auto v = dataset_vocab(data_path);
    const auto data = read_dataset(data_path, v);
    if (data.empty()) throw std::runtime_error(a.data + ": no samples");

    const auto out = out_path(a.out);
    Checkpoint ckpt;
    ModelConfig mc;
    TrainConfig tc;
    if (!a.resume.empty()) {
        if (!a.config.empty()) throw CLI::ValidationError("--config", "not allowed with --resume");
        ckpt = load_checkpoint(a.resume);
        if (ckpt.vocab.content_hash() != v.content_hash()) {
            throw std::runtime_error("vocabulary hash mismatch: checkpoint " + ckpt.vocab.content_hash() +
                                     ", dataset " + v.content_hash());
        }
        tc = ckpt.train;
        mc = ckpt.state.model.config;
    } else if (!a.config.empty()) {
        const auto j = read_json(a.config);
        check_keys(j, {"model", "train"}, a.config);
        if (j.contains("model")) mc = model_config_from_json(j.at("model"));
        if (j.contains("train")) tc = train_config_from_json(j.at("train"));
    }
    if (a.steps > 0) tc.steps = a.steps;
    if (a.seed >= 0) {
        if (!a.resume.empty()) throw CLI::ValidationError("--seed", "not allowed with --resume");
        tc.seed = static_cast<std::uint64_t>(a.seed);
    }
    tc.validate();
    if (mc.vocab_size == 0) mc.vocab_size = static_cast<int>(v.size());
    if (mc.vocab_size != static_cast<int>(v.size())) {
        throw std::runtime_error("model vocab_size " + std::to_string(mc.vocab_size) + " does not match dataset vocabulary of " +
                                 std::to_string(v.size()));
    }
    mc.validate();
    if (a.resume.empty()) {
        ckpt.state = start_training<float>(mc, tc);
        ckpt.vocab = v;
    }
    ckpt.train = tc;
    if (ckpt.state.step > tc.steps) {
        throw std::runtime_error("checkpoint is at step " + std::to_string(ckpt.state.step) + ", past --steps " +
                                 std::to_string(tc.steps));
    }

    const int start = ckpt.state.step;
    const auto history = train(ckpt.state, v, data, tc, [&](const StepRecord& r) {
        if (!a.quiet && (r.step == 1 || r.step % 100 == 0 || r.step == tc.steps)) {
            std::fprintf(stderr, "step %d loss %.6g ce %.6g ground %.6g\n", r.step, r.total, r.ce, r.ground);
        }
    });
    save_checkpoint(out, ckpt);
    fs::path csv = a.loss_csv.empty() ? fs::path(out.string() + ".loss.csv") : out_path(a.loss_csv);
    write_text(csv, loss_history_csv(history));
    const json config{{"model", to_json(ckpt.state.model.config)}, {"train", to_json(tc)}};
    write_manifest(out, "train", config,
                   json{{"seed", tc.seed},
                        {"data", a.data},
                        {"data_hash", file_hash(data_path)},
                        {"resume", a.resume},
                        {"start_step", start},
                        {"end_step", ckpt.state.step},
                        {"vocab_hash", v.content_hash()},
                        {"checkpoint_hash", file_hash(out)},
                        {"loss_csv", csv.string()}});
    std::cout << "trained steps " << start << ".." << ckpt.state.step << ", checkpoint " << out.string() << "\n";
}

// ---- infer --------------------------------------------------------------------

struct InferArgs {
    std::string ckpt, data, out;
    int max_len = 32;
};

void run_infer(const InferArgs& a) {
    if (a.max_len < 1) throw CLI::ValidationError("--max-len", "must be >= 1");
    const auto ckpt = load_checkpoint(a.ckpt);
    const auto v = dataset_vocab(a.data);
    if (ckpt.vocab.content_hash() != v.content_hash()) {
        throw std::runtime_error("vocabulary hash mismatch: checkpoint " + ckpt.vocab.content_hash() + ", dataset " +
                                 v.content_hash());
    }
    const auto data = read_dataset(a.data, v);
    const auto gens = batch_generate(ckpt.state.model, v, data, static_cast<std::size_t>(a.max_len));
    std::vector<json> lines;
    for (std::size_t i = 0; i < data.size(); ++i) lines.push_back(generation_to_json(v, gens[i], data[i].id));
    const auto out = out_path(a.out);
    write_text(out, to_jsonl(lines));
    write_manifest(out, "infer", json{{"max_len", a.max_len}},
                   json{{"checkpoint", a.ckpt},
                        {"checkpoint_hash", file_hash(a.ckpt)},
                        {"data", a.data},
                        {"data_hash", file_hash(a.data)},
                        {"vocab_hash", v.content_hash()},
                        {"output_hash", file_hash(out)}});
    std::cout << "wrote " << lines.size() << " predictions to " << out.string() << "\n";
}

// ---- eval ---------------------------------------------------------------------

struct EvalArgs {
    std::string pred, ref, out, curve_csv;
    double tau = 0.5;
    bool per_sample_mean = false;
    std::vector<double> thresholds;
};

void run_eval(const EvalArgs& a) {
    if (!(a.tau > 0.0 && a.tau < 1.0)) throw CLI::ValidationError("--tau", "must be in (0, 1)");
    const auto v = dataset_vocab(a.ref);
    const auto ref = read_dataset(a.ref, v);
    std::vector<PredictionRecord> pred;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(a.pred)) {
        ++line;
        try {
            pred.push_back(prediction_from_json(j));
        } catch (const std::exception& e) {
            throw std::runtime_error(a.pred + ": record " + std::to_string(line) + ": " + e.what());
        }
    }
    const auto records = align_records(pred, ref, v);
    ReportOptions opts;
    opts.curve_per_sample_mean = a.per_sample_mean;
    if (!a.thresholds.empty()) {
        if (a.thresholds.size() != 2) throw CLI::ValidationError("--thresholds", "expects SMALL,LARGE");
        opts.thresholds = {a.thresholds[0], a.thresholds[1]};
    }
    std::size_t truncated = 0;
    for (const auto& p : pred) truncated += p.truncated ? 1 : 0;
    const auto report = build_report(records, opts, truncated);
    auto j = report_to_json(report);
    j["tau"] = a.tau;
    j["acc_tau"] = accuracy(records, a.tau);
    j["sample_acc_tau"] = accuracy(records, a.tau, AccuracyMode::PerSample);
    const auto out = out_path(a.out);
    write_text(out, j.dump(2) + "\n");
    if (!a.curve_csv.empty()) write_text(out_path(a.curve_csv), curve_csv(report.curve));
    write_manifest(out, "eval",
                   json{{"tau", a.tau},
                        {"per_sample_mean", a.per_sample_mean},
                        {"thresholds", {opts.thresholds.small, opts.thresholds.large}}},
                   json{{"pred", a.pred},
                        {"pred_hash", file_hash(a.pred)},
                        {"ref", a.ref},
                        {"ref_hash", file_hash(a.ref)},
                        {"output_hash", file_hash(out)}});
    std::printf("acc@0.5 %.4f  acc@0.25 %.4f  acc@%g %.4f  rouge1 %.4f  rougeL %.4f\n", *report.overall.acc50,
                *report.overall.acc25, a.tau, j["acc_tau"].get<double>(), report.rouge1, report.rougeL);
}

// ---- plot ---------------------------------------------------------------------

struct PlotArgs {
    std::vector<std::string> reports, labels;
    std::string out, csv, title = "Cumulative IoU";
};

void run_plot(const PlotArgs& a) {
    if (!a.labels.empty() && a.labels.size() != a.reports.size()) {
        throw CLI::ValidationError("--label", "give one label per --report");
    }
    std::vector<NamedCurve> curves;
    std::string csv = "method,iou,fraction\n";
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
        const auto r = report_from_json(read_json(a.reports[i]));
        const std::string name = a.labels.empty() ? fs::path(a.reports[i]).stem().string() : a.labels[i];
        curves.push_back({name, r.curve});
        const auto rows = curve_csv(r.curve);
        std::size_t pos = rows.find('\n') + 1;
        while (pos < rows.size()) {
            const auto end = rows.find('\n', pos);
            csv += name + "," + rows.substr(pos, end - pos) + "\n";
            pos = end + 1;
        }
    }
    const auto out = out_path(a.out);
    write_text(out, curve_svg(curves, a.title));
    if (!a.csv.empty()) write_text(out_path(a.csv), csv);
    json inputs = json::array();
    for (const auto& r : a.reports) inputs.push_back(json{{"report", r}, {"hash", file_hash(r)}});
    write_manifest(out, "plot", json{{"labels", a.labels}, {"title", a.title}},
                   json{{"inputs", inputs}, {"output_hash", file_hash(out)}});
    std::cout << "wrote " << out.string() << "\n";
}

// ---- ablate -------------------------------------------------------------------

struct AblateArgs {
    std::string grid, out;
    bool quiet = false;
};

void run_ablate(const AblateArgs& a) {
    json g = json::object();
    if (!a.grid.empty()) g = read_json(a.grid);
    check_keys(g, {"model", "train", "seeds", "lambdas", "n_train", "n_test", "data_seed", "knobs", "max_len"}, "grid");
    AblationSetup setup;
    if (g.contains("model")) setup.model = model_config_from_json(g.at("model"));
    if (g.contains("train")) setup.train = train_config_from_json(g.at("train"));
    if (g.contains("seeds")) setup.seeds = g.at("seeds").get<std::vector<std::uint64_t>>();
    setup.max_len = g.value("max_len", setup.max_len);
    const auto lambdas = g.value("lambdas", std::vector<double>{5.0, 10.0, 20.0});
    const auto n_train = g.value("n_train", std::size_t{1600});
    const auto n_test = g.value("n_test", std::size_t{400});
    const auto data_seed = g.value("data_seed", std::uint64_t{2024});
    DataKnobs knobs;
    if (g.contains("knobs")) knobs = knobs_from_json(g.at("knobs"));
    if (setup.seeds.empty()) throw std::runtime_error("grid: seeds must not be empty");

    const auto v = scene_vocabulary();
    setup.model.vocab_size = static_cast<int>(v.size());
    setup.model.validate();
    const auto all = generate_dataset(n_train + n_test, data_seed, knobs);
    const std::vector<GroundedSample> train_set(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    const std::vector<GroundedSample> test_set(all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());

    const auto rows = run_ablation(ablation_grid(lambdas), setup, v, train_set, test_set, [&](const std::string& m) {
        if (!a.quiet) std::fprintf(stderr, "%s\n", m.c_str());
    });
    const auto out = out_path(a.out);
    fs::create_directories(out);
    const auto table = ablation_table(rows);
    write_text(out / "ablation.md", table);
    write_text(out / "ablation.json", ablation_to_json(rows).dump(2) + "\n");
    const json config{{"model", to_json(setup.model)},
                      {"train", to_json(setup.train)},
                      {"seeds", setup.seeds},
                      {"lambdas", lambdas},
                      {"n_train", n_train},
                      {"n_test", n_test},
                      {"data_seed", data_seed},
                      {"knobs", to_json(knobs)},
                      {"max_len", setup.max_len}};
    write_manifest(out / "ablation.json", "ablate", config,
                   json{{"seed", data_seed}, {"vocab_hash", v.content_hash()}});
    std::cout << table;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grounding model toolkit: data, training, inference, evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    GenArgs gen;
    auto* g = app.add_subcommand("gen-data", "Generate a synthetic grounded dataset (JSONL)");
    g->add_option("--n", gen.n, "Number of samples")->required();
    g->add_option("--seed", gen.seed, "Dataset seed");
    g->add_option("--out", gen.out, "Output JSONL path")->required();
    g->add_option("--knobs", gen.knobs_file, "JSON file with generator knobs")->check(CLI::ExistingFile);
    g->add_option("--canvas", gen.knobs.canvas, "Canvas size in pixels");
    g->add_option("--min-objects", gen.knobs.min_objects, "Minimum objects per scene");
    g->add_option("--max-objects", gen.knobs.max_objects, "Maximum objects per scene");
    g->add_option("--task-mix", gen.knobs.task_mix, "Weights of grounding, referring-single, referring-multi")
        ->delimiter(',');
    g->add_option("--size-mix", gen.knobs.size_mix, "Weights of small, medium, large referents")->delimiter(',');
    g->add_option("--twin-prob", gen.knobs.twin_prob, "Chance of a look-alike in another quadrant");
    g->add_option("--max-multi", gen.knobs.max_multi, "Largest referent count of multi-object queries");
    g->add_flag("--no-rotate", gen.no_rotate, "Disable rotations");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a model and write a checkpoint and loss CSV");
    t->add_option("--data", tr.data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
    t->add_option("--config", tr.config, "JSON with \"model\" and \"train\" sections")->check(CLI::ExistingFile);
    t->add_option("--out", tr.out, "Checkpoint path")->required();
    t->add_option("--resume", tr.resume, "Continue from this checkpoint")->check(CLI::ExistingFile);
    t->add_option("--loss-csv", tr.loss_csv, "Loss history path (default <out>.loss.csv)");
    t->add_option("--steps", tr.steps, "Total optimizer steps (overrides the config)");
    t->add_option("--seed", tr.seed, "Training seed (overrides the config)");
    t->add_flag("--quiet", tr.quiet, "No progress output");

    InferArgs in;
    auto* i = app.add_subcommand("infer", "Greedy decoding over a dataset");
    i->add_option("--ckpt", in.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
    i->add_option("--data", in.data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
    i->add_option("--out", in.out, "Predictions JSONL")->required();
    i->add_option("--max-len", in.max_len, "Answer token cap");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score predictions against references");
    e->add_option("--pred", ev.pred, "Predictions JSONL")->required()->check(CLI::ExistingFile);
    e->add_option("--ref", ev.ref, "Reference dataset JSONL")->required()->check(CLI::ExistingFile);
    e->add_option("--tau", ev.tau, "Extra IoU threshold reported as acc_tau");
    e->add_option("--out", ev.out, "Report JSON")->required();
    e->add_option("--curve-csv", ev.curve_csv, "Cumulative curve CSV");
    e->add_flag("--per-sample-mean", ev.per_sample_mean, "Curve over per-sample mean IoU");
    e->add_option("--thresholds", ev.thresholds, "Size bucket area thresholds SMALL,LARGE")->delimiter(',');

    PlotArgs pl;
    auto* p = app.add_subcommand("plot", "Cumulative IoU curves as SVG");
    p->add_option("--report", pl.reports, "Report JSON (repeatable)")->required()->check(CLI::ExistingFile);
    p->add_option("--label", pl.labels, "Curve label per report (repeatable)");
    p->add_option("--out", pl.out, "SVG path")->required();
    p->add_option("--csv", pl.csv, "Combined curve CSV");
    p->add_option("--title", pl.title, "Chart title");

    AblateArgs ab;
    auto* a = app.add_subcommand("ablate", "Hungarian/token grid and lambda_bb sweep");
    a->add_option("--grid", ab.grid, "Grid JSON (model, train, seeds, lambdas, n_train, n_test, knobs)")
        ->check(CLI::ExistingFile);
    a->add_option("--out", ab.out, "Output directory")->required();
    a->add_flag("--quiet", ab.quiet, "No progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }

    try {
        if (*g) run_gen_data(gen);
        else if (*t) run_train(tr);
        else if (*i) run_infer(in);
        else if (*e) run_eval(ev);
        else if (*p) run_plot(pl);
        else if (*a) run_ablate(ab);
    } catch (const CLI::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const TrainingDiverged& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
