#pragma once

#include <vector>

#include "tgs/linalg.hpp"

namespace tgs {

/// Exact minimum-cost perfect assignment on a square cost matrix via
/// potential-based shortest augmenting paths (Kuhn-Munkres). Ties resolve to
/// the lowest column index, so results are reproducible. Returns the column
/// matched to each row.
std::vector<int> solve_assignment(const Mat& cost);

double assignment_cost(const Mat& cost, const std::vector<int>& row_to_col);

/// Exact transportation plan minimizing <cost, plan> subject to row sums
/// `supply` and column sums `demand` (successive shortest augmenting paths on
/// the bipartite flow network). Supplies and demands must be nonnegative with
/// equal totals.
Mat solve_transport(const Mat& cost, const Vec& supply, const Vec& demand);

} // namespace tgs
