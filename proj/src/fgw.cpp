#include "tgs/fgw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tgs/assignment.hpp"
#include "tgs/error.hpp"

namespace tgs {

namespace {

void require_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ValidationError("alpha must lie in [0, 1]");
    }
}

Mat feature_distances(const Mat& x1, const Mat& x2) {
    if (x1.cols != x2.cols) {
        throw ValidationError("graphs carry node features of different dimension");
    }
    Mat d(x1.rows, x2.rows, 0.0);
    for (std::size_t i = 0; i < x1.rows; ++i) {
        for (std::size_t k = 0; k < x2.rows; ++k) {
            d(i, k) = squared_distance(x1.row_ptr(i), x2.row_ptr(k), x1.cols);
        }
    }
    return d;
}

// Direct four-index evaluation; exact for non-symmetric adjacency.
FgwTerms evaluate(const Mat& feat_dist, const Mat& a1, const Mat& a2, const Mat& pi,
                  double alpha) {
    const std::size_t t1 = a1.rows;
    const std::size_t t2 = a2.rows;
    double feature = 0.0;
    for (std::size_t i = 0; i < t1; ++i) {
        feature += dot_n(feat_dist.row_ptr(i), pi.row_ptr(i), t2);
    }
    double structure = 0.0;
    for (std::size_t i = 0; i < t1; ++i) {
        for (std::size_t k = 0; k < t2; ++k) {
            const double w = pi(i, k);
            if (w == 0.0) continue;
            double inner = 0.0;
            for (std::size_t j = 0; j < t1; ++j) {
                const double a1ij = a1(i, j);
                const double* a2row = a2.row_ptr(k);
                const double* pirow = pi.row_ptr(j);
                for (std::size_t l = 0; l < t2; ++l) {
                    const double diff = a1ij - a2row[l];
                    inner += diff * diff * pirow[l];
                }
            }
            structure += w * inner;
        }
    }
    FgwTerms terms;
    terms.feature_term = feature;
    terms.structure_term = structure;
    terms.value = alpha * structure + (1.0 - alpha) * feature;
    return terms;
}

// d objective / d pi_{ik}, treating the objective as quadratic in pi.
Mat gradient(const Mat& feat_dist, const Mat& a1, const Mat& a2, const Mat& pi, double alpha) {
    const std::size_t t1 = a1.rows;
    const std::size_t t2 = a2.rows;
    Mat g(t1, t2, 0.0);
    for (std::size_t i = 0; i < t1; ++i) {
        for (std::size_t k = 0; k < t2; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < t1; ++j) {
                const double out1 = a1(i, j);
                const double in1 = a1(j, i);
                const double* pirow = pi.row_ptr(j);
                for (std::size_t l = 0; l < t2; ++l) {
                    const double w = pirow[l];
                    if (w == 0.0) continue;
                    const double d_out = out1 - a2(k, l);
                    const double d_in = in1 - a2(l, k);
                    acc += (d_out * d_out + d_in * d_in) * w;
                }
            }
            g(i, k) = (1.0 - alpha) * feat_dist(i, k) + alpha * acc;
        }
    }
    return g;
}

double marginal_violation(const Mat& pi, const Vec& mu1, const Vec& mu2) {
    double worst = 0.0;
    for (std::size_t i = 0; i < pi.rows; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < pi.cols; ++k) s += pi(i, k);
        worst = std::max(worst, std::fabs(s - mu1[i]));
    }
    for (std::size_t k = 0; k < pi.cols; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < pi.rows; ++i) s += pi(i, k);
        worst = std::max(worst, std::fabs(s - mu2[k]));
    }
    return worst;
}

bool uniform_measure(const Vec& mu) {
    if (mu.empty()) return false;
    const double want = 1.0 / static_cast<double>(mu.size());
    for (double m : mu) {
        if (std::fabs(m - want) > 1e-12) return false;
    }
    return true;
}

// min <g, pi'> over admissible couplings: permutation matrix scaled by 1/T for
// uniform square marginals, exact network-flow transport otherwise.
Mat linear_minimizer(const Mat& g, const Vec& mu1, const Vec& mu2) {
    if (mu1.size() == mu2.size() && uniform_measure(mu1) && uniform_measure(mu2)) {
        const std::vector<int> match = solve_assignment(g);
        Mat pi(g.rows, g.cols, 0.0);
        const double mass = 1.0 / static_cast<double>(g.rows);
        for (std::size_t i = 0; i < g.rows; ++i) {
            pi(i, static_cast<std::size_t>(match[i])) = mass;
        }
        return pi;
    }
    return solve_transport(g, mu1, mu2);
}

struct StartResult {
    FgwTerms terms;
    Mat pi;
    int iterations = 0;
    bool converged = false;
};

StartResult run_from(Mat pi, const Mat& feat_dist, const SentenceGraph& g1,
                     const SentenceGraph& g2, double alpha, const FgwConfig& config,
                     FgwStartTrace* trace, double* violation) {
    StartResult out;
    FgwTerms cur = evaluate(feat_dist, g1.adjacency, g2.adjacency, pi, alpha);
    if (trace) trace->objectives.push_back(cur.value);
    if (violation) {
        *violation = std::max(*violation, marginal_violation(pi, g1.measure, g2.measure));
    }
    for (int iter = 1; iter <= config.max_iters; ++iter) {
        if (!std::isfinite(cur.value)) {
            throw std::logic_error("fgw objective became non-finite at iteration " +
                                   std::to_string(iter));
        }
        const Mat grad = gradient(feat_dist, g1.adjacency, g2.adjacency, pi, alpha);
        const Mat target = linear_minimizer(grad, g1.measure, g2.measure);

        // Exact line search: the objective is quadratic along the segment, so a
        // 3-point fit recovers it exactly up to rounding.
        Mat mid(pi.rows, pi.cols, 0.0);
        for (std::size_t idx = 0; idx < pi.data.size(); ++idx) {
            mid.data[idx] = 0.5 * (pi.data[idx] + target.data[idx]);
        }
        const double f0 = cur.value;
        const double fh = evaluate(feat_dist, g1.adjacency, g2.adjacency, mid, alpha).value;
        const double f1 = evaluate(feat_dist, g1.adjacency, g2.adjacency, target, alpha).value;
        const double a = 2.0 * (f0 + f1 - 2.0 * fh);
        const double b = f1 - f0 - a;
        double gamma;
        if (a > 1e-18) {
            gamma = std::clamp(-b / (2.0 * a), 0.0, 1.0);
        } else {
            gamma = (f1 < f0) ? 1.0 : 0.0;
        }

        Mat next(pi.rows, pi.cols, 0.0);
        for (std::size_t idx = 0; idx < pi.data.size(); ++idx) {
            next.data[idx] = pi.data[idx] + gamma * (target.data[idx] - pi.data[idx]);
        }
        FgwTerms next_terms = evaluate(feat_dist, g1.adjacency, g2.adjacency, next, alpha);
        if (!std::isfinite(next_terms.value)) {
            throw std::logic_error("fgw objective became non-finite at iteration " +
                                   std::to_string(iter));
        }
        if (next_terms.value > cur.value + 1e-12 * std::max(1.0, std::fabs(cur.value))) {
            // The line search is exact on a quadratic; an increase means a bug.
            throw std::logic_error("fgw objective increased at iteration " + std::to_string(iter));
        }
        if (next_terms.value <= cur.value) {
            pi = std::move(next);
            cur = next_terms;
        }
        out.iterations = iter;
        if (trace) trace->objectives.push_back(cur.value);
        if (violation) {
            *violation = std::max(*violation, marginal_violation(pi, g1.measure, g2.measure));
        }
        const double decrease = f0 - cur.value;
        if (decrease < config.rel_tol * std::max(std::fabs(f0), 1e-30)) {
            out.converged = true;
            break;
        }
    }
    out.terms = cur;
    out.pi = std::move(pi);
    return out;
}

} // namespace

void check_admissible(const Mat& pi, const Vec& mu1, const Vec& mu2, double tol) {
    if (pi.rows != mu1.size() || pi.cols != mu2.size()) {
        throw ValidationError("coupling shape does not match graph measures");
    }
    for (double v : pi.data) {
        if (!(v >= -tol) || !std::isfinite(v)) {
            throw ValidationError("coupling holds a negative or non-finite entry");
        }
    }
    if (marginal_violation(pi, mu1, mu2) > tol) {
        throw ValidationError("coupling marginals do not match the graph measures");
    }
}

FgwTerms fgw_objective(const SentenceGraph& g1, const SentenceGraph& g2, const Coupling& pi,
                       double alpha) {
    require_alpha(alpha);
    check_admissible(pi.matrix, g1.measure, g2.measure);
    const Mat feat_dist = feature_distances(g1.features, g2.features);
    return evaluate(feat_dist, g1.adjacency, g2.adjacency, pi.matrix, alpha);
}

FgwResult solve_fgw(const SentenceGraph& g1, const SentenceGraph& g2, double alpha,
                    const FgwConfig& config, FgwDiagnostics* diagnostics) {
    require_alpha(alpha);
    if (config.max_iters < 1) throw ValidationError("max_iters must be at least 1");
    if (!(config.rel_tol > 0.0)) throw ValidationError("rel_tol must be positive");
    const std::size_t t1 = g1.size();
    const std::size_t t2 = g2.size();
    if (t1 == 0 || t2 == 0) throw ValidationError("cannot match an empty sentence graph");

    const Mat feat_dist = feature_distances(g1.features, g2.features);

    std::vector<Mat> starts;
    {
        Mat product(t1, t2, 0.0);
        for (std::size_t i = 0; i < t1; ++i) {
            for (std::size_t k = 0; k < t2; ++k) {
                product(i, k) = g1.measure[i] * g2.measure[k];
            }
        }
        starts.push_back(std::move(product));
    }
    if (t1 == t2 && uniform_measure(g1.measure) && uniform_measure(g2.measure)) {
        Mat ident(t1, t2, 0.0);
        for (std::size_t i = 0; i < t1; ++i) ident(i, i) = 1.0 / static_cast<double>(t1);
        starts.push_back(std::move(ident));
    }

    double violation = 0.0;
    StartResult best;
    bool have_best = false;
    for (auto& start : starts) {
        FgwStartTrace* trace = nullptr;
        if (diagnostics) {
            diagnostics->starts.emplace_back();
            trace = &diagnostics->starts.back();
        }
        StartResult run = run_from(std::move(start), feat_dist, g1, g2, alpha, config, trace,
                                   &violation);
        if (!have_best || run.terms.value < best.terms.value) {
            best = std::move(run);
            have_best = true;
        }
    }
    if (diagnostics) diagnostics->max_marginal_violation = violation;

    FgwResult result;
    result.value = best.terms.value;
    result.feature_term = best.terms.feature_term;
    result.structure_term = best.terms.structure_term;
    result.coupling.matrix = std::move(best.pi);
    result.iterations = best.iterations;
    result.converged = best.converged;
    return result;
}

FgwFeatureGrads fgw_grad_features(const SentenceGraph& g1, const SentenceGraph& g2,
                                  const FgwResult& result, double alpha) {
    require_alpha(alpha);
    const Mat& pi = result.coupling.matrix;
    if (pi.rows != g1.size() || pi.cols != g2.size()) {
        throw ValidationError("coupling shape does not match the graphs");
    }
    if (g1.features.cols != g2.features.cols) {
        throw ValidationError("graphs carry node features of different dimension");
    }
    const std::size_t d = g1.features.cols;
    const double scale = 2.0 * (1.0 - alpha);
    FgwFeatureGrads grads;
    grads.d_x1 = Mat(g1.size(), d, 0.0);
    grads.d_x2 = Mat(g2.size(), d, 0.0);
    for (std::size_t i = 0; i < pi.rows; ++i) {
        const double* x1 = g1.features.row_ptr(i);
        double* gx1 = grads.d_x1.row_ptr(i);
        for (std::size_t k = 0; k < pi.cols; ++k) {
            const double w = pi(i, k);
            if (w == 0.0) continue;
            const double* x2 = g2.features.row_ptr(k);
            double* gx2 = grads.d_x2.row_ptr(k);
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = scale * w * (x1[c] - x2[c]);
                gx1[c] += diff;
                gx2[c] -= diff;
            }
        }
    }
    return grads;
}

} // namespace tgs
