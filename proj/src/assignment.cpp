// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlg/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vlg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_finite(const CostMatrix& c) {
    for (std::size_t i = 0; i < c.rows(); ++i) {
        for (std::size_t j = 0; j < c.cols(); ++j) {
            if (!std::isfinite(c(i, j))) {
                throw std::invalid_argument("hungarian: non-finite cost at (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ")");
            }
        }
    }
}

// Shortest augmenting path with potentials over the sub-matrix selected by
// `rows` x `cols`, requiring rows.size() <= cols.size(). Returns, for each
// selected row, the index into `cols` it is matched to.
std::vector<std::size_t> solve_rows_le_cols(const CostMatrix& c, const std::vector<std::size_t>& rows,
                                            const std::vector<std::size_t>& cols) {
    const std::size_t n = rows.size();
    const std::size_t m = cols.size();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = c(rows[i0 - 1], cols[j - 1]) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> match(n, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) match[p[j] - 1] = j - 1;
    }
    return match;
}

// Minimum cost of a matching of size min(|rows|, |cols|) on the sub-matrix.
double solve_subproblem(const CostMatrix& c, const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& cols) {
    if (rows.empty() || cols.empty()) return 0.0;
    double total = 0.0;
    if (rows.size() <= cols.size()) {
        const auto match = solve_rows_le_cols(c, rows, cols);
        for (std::size_t r = 0; r < rows.size(); ++r) total += c(rows[r], cols[match[r]]);
    } else {
        CostMatrix t(c.cols(), c.rows());
        for (std::size_t i = 0; i < c.rows(); ++i) {
            for (std::size_t j = 0; j < c.cols(); ++j) t(j, i) = c(i, j);
        }
        const auto match = solve_rows_le_cols(t, cols, rows);
        for (std::size_t k = 0; k < cols.size(); ++k) total += c(rows[match[k]], cols[k]);
    }
    return total;
}

std::vector<std::size_t> iota_vec(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

std::vector<std::size_t> without(const std::vector<std::size_t>& v, std::size_t value) {
    std::vector<std::size_t> out;
    out.reserve(v.size());
    for (auto x : v) {
        if (x != value) out.push_back(x);
    }
    return out;
}

double squared_distance(const OrientedBox& a, const OrientedBox& b) {
    const auto pa = a.params();
    const auto pb = b.params();
    double d = 0.0;
    for (std::size_t k = 0; k < 5; ++k) d += (pa[k] - pb[k]) * (pa[k] - pb[k]);
    return d;
}

}  // namespace

CostMatrix cost_matrix(const std::vector<OrientedBox>& pred, const std::vector<OrientedBox>& ref) {
    if (pred.empty() || ref.empty()) {
        throw std::invalid_argument("cost_matrix: prediction and reference lists must be non-empty");
    }
    CostMatrix c(pred.size(), ref.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = 0; j < ref.size(); ++j) c(i, j) = squared_distance(pred[i], ref[j]);
    }
    return c;
}

double hungarian_cost(const CostMatrix& c) {
    check_finite(c);
    return solve_subproblem(c, iota_vec(c.rows()), iota_vec(c.cols()));
}

Assignment hungarian(const CostMatrix& c) {
    check_finite(c);
    Assignment result;
    if (c.rows() == 0 || c.cols() == 0) return result;

    // Fix rows in order, each to the smallest column (or, failing that, to
    // "unmatched") that still admits an optimal completion.
    std::vector<std::size_t> rows = iota_vec(c.rows());
    std::vector<std::size_t> cols = iota_vec(c.cols());
    const double best = solve_subproblem(c, rows, cols);
    const double tol = 1e-11 * std::max(1.0, std::abs(best));
    double fixed = 0.0;
    for (std::size_t i = 0; i < c.rows(); ++i) {
        auto rest_rows = without(rows, i);
        bool placed = false;
        for (auto j : cols) {
            auto rest_cols = without(cols, j);
            const double completion = fixed + c(i, j) + solve_subproblem(c, rest_rows, rest_cols);
            if (completion <= best + tol) {
                result.pairs.emplace_back(i, j);
                fixed += c(i, j);
                cols = std::move(rest_cols);
                placed = true;
                break;
            }
        }
        if (!placed) {
            // Only reachable when rows outnumber columns; row i stays unmatched.
            if (rest_rows.size() < cols.size()) {
                throw std::logic_error("hungarian: no optimal completion found");
            }
        }
        rows = std::move(rest_rows);
        if (cols.empty()) break;
    }
    result.total_cost = 0.0;
    for (auto [i, j] : result.pairs) result.total_cost += c(i, j);
    return result;
}

GroundingLoss grounding_loss(const std::vector<OrientedBox>& pred, const std::vector<OrientedBox>& ref) {
    GroundingLoss out;
    if (pred.empty() || ref.empty()) return out;
    out.assignment = hungarian(cost_matrix(pred, ref));
    out.loss = out.assignment.total_cost;
    return out;
}

GroundingLoss in_order_grounding_loss(const std::vector<OrientedBox>& pred, const std::vector<OrientedBox>& ref) {
    GroundingLoss out;
    const std::size_t n = std::min(pred.size(), ref.size());
    for (std::size_t i = 0; i < n; ++i) {
        out.assignment.pairs.emplace_back(i, i);
        out.assignment.total_cost += squared_distance(pred[i], ref[i]);
    }
    out.loss = out.assignment.total_cost;
    return out;
}

std::vector<std::array<double, 5>> matched_distance_grad(const std::vector<OrientedBox>& pred,
                                                         const std::vector<OrientedBox>& ref,
                                                         const Assignment& assignment) {
    std::vector<std::array<double, 5>> grad(pred.size(), std::array<double, 5>{});
    for (auto [i, j] : assignment.pairs) {
        if (i >= pred.size() || j >= ref.size()) throw std::out_of_range("assignment index out of range");
        const auto pi = pred[i].params();
        const auto pj = ref[j].params();
        for (std::size_t k = 0; k < 5; ++k) grad[i][k] = 2.0 * (pi[k] - pj[k]);
    }
    return grad;
}

std::vector<std::array<double, 5>> grounding_loss_grad(const std::vector<OrientedBox>& pred,
                                                       const std::vector<OrientedBox>& ref,
                                                       const Assignment& assignment) {
#ifndef NDEBUG
    if (!pred.empty() && !ref.empty()) {
        const auto c = cost_matrix(pred, ref);
        double cost = 0.0;
        for (auto [i, j] : assignment.pairs) cost += c(i, j);
        const double best = hungarian_cost(c);
        if (assignment.pairs.size() != std::min(pred.size(), ref.size()) ||
            cost > best + 1e-9 * std::max(1.0, std::abs(best))) {
            throw std::logic_error("grounding_loss_grad: assignment is not optimal for these boxes");
        }
    }
#endif
    return matched_distance_grad(pred, ref, assignment);
}

}  // namespace vlg
