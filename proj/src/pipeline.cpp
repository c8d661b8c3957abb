// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <array>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace vlg {

template <typename T>
Evaluation evaluate_model(const Model<T>& model, const Vocabulary& v, const std::vector<GroundedSample>& data,
                          std::size_t max_len) {
    Evaluation ev;
    ev.generations = batch_generate(model, v, data, max_len);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& g = ev.generations[i];
        ev.truncated += g.truncated ? 1 : 0;
        ev.records.push_back(
            make_record(data[i].id, g.boxes, data[i].boxes, decode(v, g.answer), decode(v, data[i].answer), data[i].task));
    }
    return ev;
}

template Evaluation evaluate_model<float>(const Model<float>&, const Vocabulary&, const std::vector<GroundedSample>&,
                                          std::size_t);
template Evaluation evaluate_model<double>(const Model<double>&, const Vocabulary&,
                                           const std::vector<GroundedSample>&, std::size_t);

std::vector<EvalRecord> align_records(const std::vector<PredictionRecord>& pred,
                                      const std::vector<GroundedSample>& ref, const Vocabulary& v) {
    std::map<int, const PredictionRecord*> by_id;
    std::string dup;
    for (const auto& p : pred) {
        if (!by_id.emplace(p.id, &p).second) dup += (dup.empty() ? "" : ", ") + std::to_string(p.id);
    }
    if (!dup.empty()) throw std::invalid_argument("duplicate prediction ids: " + dup);
    std::string missing;
    std::map<int, bool> ref_ids;
    for (const auto& s : ref) {
        ref_ids[s.id] = true;
        if (!by_id.count(s.id)) missing += (missing.empty() ? "" : ", ") + std::to_string(s.id);
    }
    if (!missing.empty()) throw std::invalid_argument("references without predictions, ids: " + missing);
    std::string extra;
    for (const auto& [id, _] : by_id) {
        if (!ref_ids.count(id)) extra += (extra.empty() ? "" : ", ") + std::to_string(id);
    }
    if (!extra.empty()) throw std::invalid_argument("predictions without references, ids: " + extra);

    std::vector<EvalRecord> out;
    out.reserve(ref.size());
    for (const auto& s : ref) {
        const auto& p = *by_id.at(s.id);
        out.push_back(make_record(s.id, p.boxes, s.boxes, p.answer, decode(v, s.answer), s.task));
    }
    return out;
}

std::vector<AblationVariant> ablation_grid(const std::vector<double>& lambdas) {
    std::vector<AblationVariant> out{
        {"hungarian+bb", true, true, 10.0},
        {"hungarian, single token", true, false, 10.0},
        {"in-order+bb", false, true, 10.0},
        {"in-order, single token", false, false, 10.0},
    };
    for (double l : lambdas) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "lambda_bb=%g", l);
        out.push_back({buf, true, true, l});
    }
    return out;
}

namespace {

double mean(const std::vector<double>& x) {
    return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

}  // namespace

std::vector<AblationRow> run_ablation(const std::vector<AblationVariant>& variants, const AblationSetup& setup,
                                      const Vocabulary& v, const std::vector<GroundedSample>& train_set,
                                      const std::vector<GroundedSample>& test_set, const AblationProgress& progress) {
    using Key = std::tuple<bool, bool, double, std::uint64_t>;
    std::map<Key, std::array<double, 3>> done;
    std::vector<AblationRow> rows;
    for (const auto& var : variants) {
        AblationRow row;
        row.variant = var;
        for (auto seed : setup.seeds) {
            const Key key{var.use_hungarian, var.use_bb_token, var.lambda_bb, seed};
            auto it = done.find(key);
            if (it == done.end()) {
                TrainConfig tc = setup.train;
                tc.use_hungarian = var.use_hungarian;
                tc.use_bb_token = var.use_bb_token;
                tc.lambda_bb = var.lambda_bb;
                tc.seed = seed;
                if (!var.use_bb_token) tc = ablation_single_token(tc);
                auto state = start_training<float>(setup.model, tc);
                train(state, v, train_set, tc);
                const auto ev = evaluate_model(state.model, v, test_set, setup.max_len);
                std::array<double, 3> acc{accuracy(ev.records, 0.5), accuracy(ev.records, 0.25),
                                          accuracy(ev.records, 0.5, AccuracyMode::PerSample)};
                it = done.emplace(key, acc).first;
                if (progress) {
                    char buf[160];
                    std::snprintf(buf, sizeof(buf), "%s seed %llu: acc@0.5 %.4f", var.name.c_str(),
                                  static_cast<unsigned long long>(seed), acc[0]);
                    progress(buf);
                }
            }
            row.acc50.push_back(it->second[0]);
            row.acc25.push_back(it->second[1]);
            row.sample_acc50.push_back(it->second[2]);
        }
        row.mean_acc50 = mean(row.acc50);
        row.std_acc50 = stddev(row.acc50);
        row.mean_acc25 = mean(row.acc25);
        row.mean_sample_acc50 = mean(row.sample_acc50);
        rows.push_back(row);
    }
    return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
    std::string out = "| variant | hungarian | bb token | lambda_bb |";
    const std::size_t n = rows.empty() ? 0 : rows.front().acc50.size();
    for (std::size_t s = 0; s < n; ++s) out += " acc@0.5 run " + std::to_string(s + 1) + " |";
    out += " mean acc@0.5 | std | mean acc@0.25 | mean sample acc@0.5 |\n|---|---|---|---|";
    for (std::size_t s = 0; s < n; ++s) out += "---|";
    out += "---|---|---|---|\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%g", r.variant.lambda_bb);
        out += "| " + r.variant.name + " | " + (r.variant.use_hungarian ? "yes" : "no") + " | " +
               (r.variant.use_bb_token ? "yes" : "no") + " | " + buf + " |";
        for (double a : r.acc50) {
            std::snprintf(buf, sizeof(buf), " %.4f |", a);
            out += buf;
        }
        std::snprintf(buf, sizeof(buf), " %.4f | %.4f | %.4f | %.4f |\n", r.mean_acc50, r.std_acc50, r.mean_acc25,
                      r.mean_sample_acc50);
        out += buf;
    }
    return out;
}

json ablation_to_json(const std::vector<AblationRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back(json{{"variant", r.variant.name},
                           {"use_hungarian", r.variant.use_hungarian},
                           {"use_bb_token", r.variant.use_bb_token},
                           {"lambda_bb", r.variant.lambda_bb},
                           {"acc50", r.acc50},
                           {"acc25", r.acc25},
                           {"sample_acc50", r.sample_acc50},
                           {"mean_acc50", r.mean_acc50},
                           {"std_acc50", r.std_acc50},
                           {"mean_acc25", r.mean_acc25},
                           {"mean_sample_acc50", r.mean_sample_acc50}});
    }
    return out;
}

}  // namespace vlg
