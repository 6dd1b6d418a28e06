#include "tgs/assignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tgs/error.hpp"

namespace tgs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<int> solve_assignment(const Mat& cost) {
    if (cost.rows != cost.cols) {
        throw ValidationError("assignment requires a square cost matrix");
    }
    const int n = static_cast<int>(cost.rows);
    if (n == 0) return {};

    // Row/column potentials; p[j] is the row currently matched to column j.
    // Index 0 is a virtual column used to seed each augmentation.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
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
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

double assignment_cost(const Mat& cost, const std::vector<int>& row_to_col) {
    if (row_to_col.size() != cost.rows) {
        throw ValidationError("assignment vector does not match cost matrix");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < cost.rows; ++i) {
        const int j = row_to_col[i];
        if (j < 0 || static_cast<std::size_t>(j) >= cost.cols) {
            throw ValidationError("assignment vector holds an out-of-range column");
        }
        total += cost(i, static_cast<std::size_t>(j));
    }
    return total;
}

namespace {

// One augmentation step: Bellman-Ford over the residual bipartite network
// (virtual source feeding rows with remaining supply, virtual sink drawing
// from columns with remaining demand). Cross arcs may carry negative costs,
// but the initial network is acyclic and successive shortest paths keep the
// residual graph free of negative cycles, so label-correcting search is exact.
struct ResidualSearch {
    std::vector<double> dist_row, dist_col;
    std::vector<int> parent_row, parent_col; // parent_row: feeding column, or -2 for the source

    bool run(const Mat& cost, const Mat& plan, const Vec& rem_supply, const Vec& rem_demand) {
        const std::size_t n = rem_supply.size();
        const std::size_t m = rem_demand.size();
        dist_row.assign(n, kInf);
        dist_col.assign(m, kInf);
        parent_row.assign(n, -1);
        parent_col.assign(m, -1);
        for (std::size_t i = 0; i < n; ++i) {
            if (rem_supply[i] > 0.0) {
                dist_row[i] = 0.0;
                parent_row[i] = -2;
            }
        }
        bool changed = true;
        std::size_t rounds = 0;
        while (changed) {
            if (++rounds > n + m + 2) {
                throw std::logic_error("transport search failed to settle; residual graph is inconsistent");
            }
            changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (dist_row[i] == kInf) continue;
                const double* c = cost.row_ptr(i);
                for (std::size_t k = 0; k < m; ++k) {
                    const double nd = dist_row[i] + c[k];
                    if (nd < dist_col[k] - 1e-15) {
                        dist_col[k] = nd;
                        parent_col[k] = static_cast<int>(i);
                        changed = true;
                    }
                }
            }
            for (std::size_t k = 0; k < m; ++k) {
                if (dist_col[k] == kInf) continue;
                for (std::size_t i = 0; i < n; ++i) {
                    if (plan(i, k) <= 0.0) continue;
                    const double nd = dist_col[k] - cost(i, k);
                    if (nd < dist_row[i] - 1e-15) {
                        dist_row[i] = nd;
                        parent_row[i] = static_cast<int>(k);
                        changed = true;
                    }
                }
            }
        }
        return true;
    }
};

} // namespace

Mat solve_transport(const Mat& cost, const Vec& supply, const Vec& demand) {
    const std::size_t n = supply.size();
    const std::size_t m = demand.size();
    if (cost.rows != n || cost.cols != m) {
        throw ValidationError("transport cost matrix does not match marginal sizes");
    }
    double total_supply = 0.0, total_demand = 0.0;
    for (double s : supply) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("transport supply entries must be finite and nonnegative");
        total_supply += s;
    }
    for (double d : demand) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("transport demand entries must be finite and nonnegative");
        total_demand += d;
    }
    if (std::fabs(total_supply - total_demand) > 1e-9 * std::max(1.0, total_supply)) {
        throw ValidationError("transport marginals carry unequal total mass");
    }

    Mat plan(n, m, 0.0);
    Vec rem_supply = supply;
    Vec rem_demand = demand;
    double shipped = 0.0;
    const double done_tol = 1e-12 * std::max(1.0, total_supply);

    ResidualSearch search;
    std::size_t guard = 0;
    const std::size_t guard_limit = 8 * (n + 1) * (m + 1) + 64;
    while (total_supply - shipped > done_tol) {
        if (++guard > guard_limit) {
            throw std::logic_error("transport solver exceeded its augmentation budget");
        }
        search.run(cost, plan, rem_supply, rem_demand);

        int best_col = -1;
        double best_dist = kInf;
        for (std::size_t k = 0; k < m; ++k) {
            if (rem_demand[k] <= 0.0) continue;
            if (search.dist_col[k] < best_dist) {
                best_dist = search.dist_col[k];
                best_col = static_cast<int>(k);
            }
        }
        if (best_col < 0) {
            throw std::logic_error("transport residual network has no augmenting path despite unmet demand");
        }

        // Walk back to the source to find the bottleneck, then apply it.
        double bottleneck = rem_demand[static_cast<std::size_t>(best_col)];
        {
            int col = best_col;
            while (true) {
                const int row = search.parent_col[static_cast<std::size_t>(col)];
                const int prev = search.parent_row[static_cast<std::size_t>(row)];
                if (prev == -2) {
                    bottleneck = std::min(bottleneck, rem_supply[static_cast<std::size_t>(row)]);
                    break;
                }
                bottleneck = std::min(bottleneck, plan(static_cast<std::size_t>(row), static_cast<std::size_t>(prev)));
                col = prev;
            }
        }
        if (!(bottleneck > 0.0)) {
            throw std::logic_error("transport augmentation found a zero-capacity path");
        }
        {
            int col = best_col;
            while (true) {
                const int row = search.parent_col[static_cast<std::size_t>(col)];
                plan(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) += bottleneck;
                const int prev = search.parent_row[static_cast<std::size_t>(row)];
                if (prev == -2) {
                    rem_supply[static_cast<std::size_t>(row)] -= bottleneck;
                    break;
                }
                plan(static_cast<std::size_t>(row), static_cast<std::size_t>(prev)) -= bottleneck;
                col = prev;
            }
            rem_demand[static_cast<std::size_t>(best_col)] -= bottleneck;
        }
        shipped += bottleneck;
    }
    return plan;
}

} // namespace tgs
