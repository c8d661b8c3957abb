// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "vlg/assignment.hpp"

namespace vlg {

std::vector<double> match_for_eval(const std::vector<OrientedBox>& pred, const std::vector<OrientedBox>& ref) {
    std::vector<double> out(ref.size(), 0.0);
    if (pred.empty() || ref.empty()) return out;
    CostMatrix iou(pred.size(), ref.size());
    CostMatrix cost(pred.size(), ref.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            iou(i, j) = rotated_iou(pred[i], ref[j]);
            cost(i, j) = 1.0 - iou(i, j);
        }
    }
    for (const auto& [i, j] : hungarian(cost).pairs) out[j] = iou(i, j);
    return out;
}

EvalRecord make_record(int id, std::vector<OrientedBox> pred, std::vector<OrientedBox> ref,
                       std::vector<std::string> pred_text, std::vector<std::string> ref_text, TaskTag task) {
    EvalRecord r;
    r.id = id;
    r.ious = match_for_eval(pred, ref);
    r.pred = std::move(pred);
    r.ref = std::move(ref);
    r.pred_text = std::move(pred_text);
    r.ref_text = std::move(ref_text);
    r.task = task;
    return r;
}

double accuracy(const std::vector<EvalRecord>& records, double tau, AccuracyMode mode) {
    if (records.empty()) throw std::invalid_argument("accuracy: empty record set");
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("accuracy: tau must be in (0, 1)");
    std::size_t hits = 0;
    std::size_t total = 0;
    for (const auto& r : records) {
        if (mode == AccuracyMode::PerSample) {
            ++total;
            hits += std::all_of(r.ious.begin(), r.ious.end(), [&](double x) { return x > tau; }) ? 1 : 0;
        } else {
            total += r.ious.size();
            hits += static_cast<std::size_t>(std::count_if(r.ious.begin(), r.ious.end(), [&](double x) { return x > tau; }));
        }
    }
    if (total == 0) throw std::invalid_argument("accuracy: no reference boxes");
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> default_grid() {
    std::vector<double> g(101);
    for (int i = 0; i <= 100; ++i) g[static_cast<std::size_t>(i)] = i / 100.0;
    return g;
}

std::vector<CurvePoint> cumulative_curve(const std::vector<EvalRecord>& records, const std::vector<double>& grid,
                                         bool per_sample_mean) {
    if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("cumulative_curve: grid must be sorted");
    std::vector<double> values;
    for (const auto& r : records) {
        if (per_sample_mean) {
            if (!r.ious.empty()) values.push_back(std::accumulate(r.ious.begin(), r.ious.end(), 0.0) / r.ious.size());
        } else {
            values.insert(values.end(), r.ious.begin(), r.ious.end());
        }
    }
    std::sort(values.begin(), values.end());
    std::vector<CurvePoint> out;
    out.reserve(grid.size());
    for (double g : grid) {
        const auto n = std::upper_bound(values.begin(), values.end(), g) - values.begin();
        const double frac = values.empty() ? 1.0 : static_cast<double>(n) / static_cast<double>(values.size());
        out.push_back({g, frac});
    }
    return out;
}

double rouge1(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
    if (candidate.empty() && reference.empty()) return 1.0;
    if (candidate.empty() || reference.empty()) return 0.0;
    std::map<std::string, int> counts;
    for (const auto& w : reference) ++counts[w];
    std::size_t overlap = 0;
    for (const auto& w : candidate) {
        auto it = counts.find(w);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double p = static_cast<double>(overlap) / static_cast<double>(candidate.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(reference.size());
    return 2.0 * p * r / (p + r);
}

double rougeL(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
    if (candidate.empty() && reference.empty()) return 1.0;
    if (candidate.empty() || reference.empty()) return 0.0;
    const std::size_t n = candidate.size();
    const std::size_t m = reference.size();
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const std::size_t lcs = prev[m];
    if (lcs == 0) return 0.0;
    const double p = static_cast<double>(lcs) / static_cast<double>(n);
    const double r = static_cast<double>(lcs) / static_cast<double>(m);
    return 2.0 * p * r / (p + r);
}

std::vector<std::string> text_tokens(const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    for (const auto& t : tokens) {
        if (t == kBos || t == kEos || t == kPad || t == kBb || t == kLoc) continue;
        out.push_back(t);
    }
    return out;
}

namespace {

struct Tally {
    std::size_t boxes = 0, samples = 0;
    std::size_t hit50 = 0, hit25 = 0, sample50 = 0, sample25 = 0;

    void add_sample(const std::vector<double>& ious) {
        ++samples;
        sample50 += std::all_of(ious.begin(), ious.end(), [](double x) { return x > 0.5; }) ? 1 : 0;
        sample25 += std::all_of(ious.begin(), ious.end(), [](double x) { return x > 0.25; }) ? 1 : 0;
    }
    void add_box(double iou) {
        ++boxes;
        hit50 += iou > 0.5 ? 1 : 0;
        hit25 += iou > 0.25 ? 1 : 0;
    }
    AccuracyCell cell() const {
        AccuracyCell c;
        c.boxes = boxes;
        c.samples = samples;
        if (boxes > 0) {
            c.acc50 = static_cast<double>(hit50) / static_cast<double>(boxes);
            c.acc25 = static_cast<double>(hit25) / static_cast<double>(boxes);
        }
        if (samples > 0) {
            c.sample_acc50 = static_cast<double>(sample50) / static_cast<double>(samples);
            c.sample_acc25 = static_cast<double>(sample25) / static_cast<double>(samples);
        }
        return c;
    }
};

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }
std::optional<double> opt_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json cell_to_json(const AccuracyCell& c) {
    return json{{"boxes", c.boxes},          {"samples", c.samples},
                {"acc50", opt(c.acc50)},     {"acc25", opt(c.acc25)},
                {"sample_acc50", opt(c.sample_acc50)}, {"sample_acc25", opt(c.sample_acc25)}};
}

AccuracyCell cell_from_json(const json& j) {
    AccuracyCell c;
    c.boxes = j.at("boxes").get<std::size_t>();
    c.samples = j.at("samples").get<std::size_t>();
    c.acc50 = opt_from(j.at("acc50"));
    c.acc25 = opt_from(j.at("acc25"));
    c.sample_acc50 = opt_from(j.at("sample_acc50"));
    c.sample_acc25 = opt_from(j.at("sample_acc25"));
    return c;
}

json cells_to_json(const std::map<std::string, AccuracyCell>& m) {
    json out = json::object();
    for (const auto& [k, c] : m) out[k] = cell_to_json(c);
    return out;
}

std::map<std::string, AccuracyCell> cells_from_json(const json& j) {
    std::map<std::string, AccuracyCell> out;
    for (const auto& [k, c] : j.items()) out[k] = cell_from_json(c);
    return out;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, x);
    return buf;
}

}  // namespace

Report build_report(const std::vector<EvalRecord>& records, const ReportOptions& opts, std::size_t truncated) {
    if (records.empty()) throw std::invalid_argument("build_report: empty record set");
    Tally overall;
    std::map<std::string, Tally> size, task, kind, count;
    for (const char* k : {"small", "medium", "large"}) size[k];
    for (const char* k : {"grounding", "referring-single", "referring-multi"}) task[k];
    for (const char* k : {"grounding", "referring"}) kind[k];
    for (const char* k : {"single", "multi"}) count[k];
    double r1 = 0.0, rl = 0.0;
    for (const auto& r : records) {
        if (r.ious.size() != r.ref.size()) throw std::invalid_argument("build_report: record without matched IoUs");
        const std::string t = to_string(r.task);
        const std::string kd = r.task == TaskTag::Grounding ? "grounding" : "referring";
        const std::string ct = r.ref.size() > 1 ? "multi" : "single";
        overall.add_sample(r.ious);
        task[t].add_sample(r.ious);
        kind[kd].add_sample(r.ious);
        count[ct].add_sample(r.ious);
        for (std::size_t j = 0; j < r.ref.size(); ++j) {
            overall.add_box(r.ious[j]);
            task[t].add_box(r.ious[j]);
            kind[kd].add_box(r.ious[j]);
            count[ct].add_box(r.ious[j]);
            size[to_string(size_bucket(r.ref[j], opts.thresholds))].add_box(r.ious[j]);
        }
        const auto cand = text_tokens(r.pred_text);
        const auto ref = text_tokens(r.ref_text);
        r1 += rouge1(cand, ref);
        rl += rougeL(cand, ref);
    }
    Report rep;
    rep.overall = overall.cell();
    for (const auto& [k, t] : size) rep.by_size[k] = t.cell();
    for (const auto& [k, t] : task) rep.by_task[k] = t.cell();
    for (const auto& [k, t] : kind) rep.by_kind[k] = t.cell();
    for (const auto& [k, t] : count) rep.by_count[k] = t.cell();
    rep.curve = cumulative_curve(records, opts.grid, opts.curve_per_sample_mean);
    rep.curve_per_sample_mean = opts.curve_per_sample_mean;
    rep.rouge1 = r1 / static_cast<double>(records.size());
    rep.rougeL = rl / static_cast<double>(records.size());
    rep.truncated = truncated;
    return rep;
}

json report_to_json(const Report& r) {
    json curve = json::array();
    for (const auto& p : r.curve) curve.push_back(json::array({p.iou, p.fraction}));
    return json{{"overall", cell_to_json(r.overall)},
                {"by_size", cells_to_json(r.by_size)},
                {"by_task", cells_to_json(r.by_task)},
                {"by_kind", cells_to_json(r.by_kind)},
                {"by_count", cells_to_json(r.by_count)},
                {"rouge1", r.rouge1},
                {"rougeL", r.rougeL},
                {"truncated", r.truncated},
                {"curve_per_sample_mean", r.curve_per_sample_mean},
                {"curve", curve}};
}

Report report_from_json(const json& j) {
    try {
        Report r;
        r.overall = cell_from_json(j.at("overall"));
        r.by_size = cells_from_json(j.at("by_size"));
        r.by_task = cells_from_json(j.at("by_task"));
        r.by_kind = cells_from_json(j.at("by_kind"));
        r.by_count = cells_from_json(j.at("by_count"));
        r.rouge1 = j.at("rouge1").get<double>();
        r.rougeL = j.at("rougeL").get<double>();
        r.truncated = j.at("truncated").get<std::size_t>();
        r.curve_per_sample_mean = j.at("curve_per_sample_mean").get<bool>();
        for (const auto& p : j.at("curve")) r.curve.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        return r;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("report: ") + e.what());
    }
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
    std::string out = "iou,fraction\n";
    for (const auto& p : curve) out += fmt("%.4f", p.iou) + "," + fmt("%.6f", p.fraction) + "\n";
    return out;
}

std::string curve_svg(const std::vector<NamedCurve>& curves, const std::string& title) {
    constexpr double W = 480, H = 360, left = 60, right = 20, top = 40, bottom = 50;
    constexpr double pw = W - left - right, ph = H - top - bottom;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
    auto px = [&](double f) { return fmt("%.2f", left + f * pw); };
    auto py = [&](double v) { return fmt("%.2f", top + (1.0 - v) * ph); };
    auto escape = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '<') o += "&lt;";
            else if (c == '>') o += "&gt;";
            else if (c == '&') o += "&amp;";
            else o += c;
        }
        return o;
    };

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">\n";
    s += "<rect width=\"480\" height=\"360\" fill=\"white\"/>\n";
    s += "<text x=\"240\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + escape(title) +
         "</text>\n";
    for (int i = 0; i <= 10; i += 2) {
        const double v = i / 10.0;
        s += "<line x1=\"" + px(0) + "\" y1=\"" + py(v) + "\" x2=\"" + px(1) + "\" y2=\"" + py(v) +
             "\" stroke=\"#dddddd\"/>\n";
        s += "<line x1=\"" + px(v) + "\" y1=\"" + py(0) + "\" x2=\"" + px(v) + "\" y2=\"" + py(1) +
             "\" stroke=\"#dddddd\"/>\n";
        s += "<text x=\"" + fmt("%.2f", left - 6) + "\" y=\"" + fmt("%.2f", top + (1.0 - v) * ph + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt("%.1f", v) + "</text>\n";
        s += "<text x=\"" + px(v) + "\" y=\"" + fmt("%.2f", top + ph + 16) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + fmt("%.1f", v) + "</text>\n";
    }
    s += "<rect x=\"" + px(0) + "\" y=\"" + py(1) + "\" width=\"" + fmt("%.2f", pw) + "\" height=\"" + fmt("%.2f", ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt("%.2f", left + pw / 2) + "\" y=\"" + fmt("%.2f", H - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">fraction of boxes</text>\n";
    s += "<text x=\"16\" y=\"" + fmt("%.2f", top + ph / 2) + "\" transform=\"rotate(-90 16 " +
         fmt("%.2f", top + ph / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">IoU</text>\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = colors[c % (sizeof(colors) / sizeof(colors[0]))];
        std::string pts;
        for (const auto& p : curves[c].points) {
            if (!pts.empty()) pts += ' ';
            pts += px(p.fraction) + "," + py(p.iou);
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
             "\"/>\n";
        const double ly = top + 14 + 16 * static_cast<double>(c);
        s += "<line x1=\"" + fmt("%.2f", left + 10) + "\" y1=\"" + fmt("%.2f", ly) + "\" x2=\"" +
             fmt("%.2f", left + 30) + "\" y2=\"" + fmt("%.2f", ly) + "\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
        s += "<text x=\"" + fmt("%.2f", left + 34) + "\" y=\"" + fmt("%.2f", ly + 4) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(curves[c].name) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace vlg
