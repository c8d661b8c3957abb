// Copyright 2026 The vlg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "vlg/geometry.hpp"

namespace vlg {

/// Dense row-major L x K matrix of matching costs.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by row
    double total_cost = 0.0;
};

/// Squared distances in the 5-dimensional parameter space. Throws on empty input.
CostMatrix cost_matrix(const std::vector<OrientedBox>& pred, const std::vector<OrientedBox>& ref);

/// Minimum-cost matching of size min(L, K). Among optimal matchings the
/// lexicographically smallest pair list is returned. Throws on non-finite costs.
Assignment hungarian(const CostMatrix& c);

/// Minimal cost only, without the tie-breaking pass.
double hungarian_cost(const CostMatrix& c);

struct GroundingLoss {
    double loss = 0.0;
    Assignment assignment;
};

/// Sum of matched squared distances under the optimal partial matching;
/// zero when either side is empty.
GroundingLoss grounding_loss(const std::vector<OrientedBox>& pred, const std::vector<OrientedBox>& ref);

/// Same loss with the i-th prediction tied to the i-th reference.
GroundingLoss in_order_grounding_loss(const std::vector<OrientedBox>& pred, const std::vector<OrientedBox>& ref);

/// Gradient of the matched squared distances for any fixed matching.
std::vector<std::array<double, 5>> matched_distance_grad(const std::vector<OrientedBox>& pred,
                                                         const std::vector<OrientedBox>& ref,
                                                         const Assignment& assignment);

/// d loss / d pred with the matching held fixed: 2 (pred_i - ref_j) for
/// matched rows, zero otherwise. Debug builds reject a non-optimal assignment.
std::vector<std::array<double, 5>> grounding_loss_grad(const std::vector<OrientedBox>& pred,
                                                       const std::vector<OrientedBox>& ref,
                                                       const Assignment& assignment);

}  // namespace vlg
