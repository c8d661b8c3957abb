// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlg/geometry.hpp"
#include "vlg/jsonio.hpp"
#include "vlg/sample.hpp"

namespace vlg {

/// Per-reference IoU of the prediction assigned by a Hungarian solve on
/// 1 - IoU; 0 for references left unmatched. Surplus predictions are dropped.
std::vector<double> match_for_eval(const std::vector<OrientedBox>& pred, const std::vector<OrientedBox>& ref);

struct EvalRecord {
    int id = 0;
    std::vector<OrientedBox> pred;
    std::vector<OrientedBox> ref;
    std::vector<std::string> pred_text;
    std::vector<std::string> ref_text;
    TaskTag task = TaskTag::Grounding;
    std::vector<double> ious;  // one per reference box
};

EvalRecord make_record(int id, std::vector<OrientedBox> pred, std::vector<OrientedBox> ref,
                       std::vector<std::string> pred_text, std::vector<std::string> ref_text, TaskTag task);

enum class AccuracyMode { PerBox, PerSample };

/// Fraction of reference boxes with matched IoU > tau (PerBox) or of
/// records whose every reference does (PerSample). Throws on an empty
/// record set or tau outside (0, 1).
double accuracy(const std::vector<EvalRecord>& records, double tau, AccuracyMode mode = AccuracyMode::PerBox);

struct CurvePoint {
    double iou = 0.0;
    double fraction = 0.0;
};

/// 0, 0.01, ..., 1.
std::vector<double> default_grid();

/// Empirical CDF of matched IoUs at each grid value. With per_sample_mean,
/// each record contributes the mean of its IoUs instead of one point per box.
std::vector<CurvePoint> cumulative_curve(const std::vector<EvalRecord>& records, const std::vector<double>& grid,
                                         bool per_sample_mean = false);

/// Unigram F1 with clipped counts.
double rouge1(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);
/// Longest-common-subsequence F1.
double rougeL(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

/// Drops control-token literals.
std::vector<std::string> text_tokens(const std::vector<std::string>& tokens);

struct AccuracyCell {
    std::size_t boxes = 0;
    std::size_t samples = 0;
    std::optional<double> acc50, acc25;
    std::optional<double> sample_acc50, sample_acc25;
};

struct Report {
    AccuracyCell overall;
    std::map<std::string, AccuracyCell> by_size;
    std::map<std::string, AccuracyCell> by_task;
    std::map<std::string, AccuracyCell> by_kind;   // grounding / referring
    std::map<std::string, AccuracyCell> by_count;  // single / multi
    std::vector<CurvePoint> curve;
    bool curve_per_sample_mean = false;
    double rouge1 = 0.0;
    double rougeL = 0.0;
    std::size_t truncated = 0;
};

struct ReportOptions {
    SizeThresholds thresholds{};
    std::vector<double> grid = default_grid();
    bool curve_per_sample_mean = false;
};

Report build_report(const std::vector<EvalRecord>& records, const ReportOptions& opts = {},
                    std::size_t truncated = 0);

json report_to_json(const Report& r);
Report report_from_json(const json& j);

/// "iou,fraction" rows.
std::string curve_csv(const std::vector<CurvePoint>& curve);

struct NamedCurve {
    std::string name;
    std::vector<CurvePoint> points;
};

/// Fixed-size SVG line chart, fraction of boxes (x) against IoU (y).
std::string curve_svg(const std::vector<NamedCurve>& curves, const std::string& title);

}  // namespace vlg
