#pragma once

#include <cstddef>
#include <vector>

#include "tgs/linalg.hpp"
#include "tgs/sentence_graph.hpp"

namespace tgs {

/// Transport plan between the node measures of two sentence graphs. Row sums
/// match the first graph's measure and column sums the second's, both within
/// 1e-9; total mass is 1.
struct Coupling {
    Mat matrix;
};

struct FgwTerms {
    double value = 0.0;
    double feature_term = 0.0;
    double structure_term = 0.0;
};

struct FgwConfig {
    int max_iters = 200;
    double rel_tol = 1e-8;
};

struct FgwResult {
    double value = 0.0;          // alpha*structure_term + (1-alpha)*feature_term
    double feature_term = 0.0;   // sum_{ik} ||X1(i)-X2(k)||^2 pi_{ik}
    double structure_term = 0.0; // sum_{ijkl} (A1(i,j)-A2(k,l))^2 pi_{ik} pi_{jl}
    Coupling coupling;
    int iterations = 0;
    bool converged = false;
};

/// Per-start objective values: entry 0 is the starting objective, each later
/// entry is the objective after one accepted Frank-Wolfe step.
struct FgwStartTrace {
    std::vector<double> objectives;
};

struct FgwDiagnostics {
    std::vector<FgwStartTrace> starts;
    double max_marginal_violation = 0.0;
};

/// Throws ValidationError unless pi's marginals match (mu1, mu2) within tol.
void check_admissible(const Mat& pi, const Vec& mu1, const Vec& mu2, double tol = 1e-9);

/// Evaluates the fused objective at a fixed admissible coupling.
FgwTerms fgw_objective(const SentenceGraph& g1, const SentenceGraph& g2, const Coupling& pi,
                       double alpha);

/// Minimizes the fused objective over admissible couplings by conditional
/// gradient descent with an exact linear subproblem and exact quadratic line
/// search. Multi-start: the product coupling always, plus the scaled identity
/// when both graphs share T and a uniform measure. Deterministic.
FgwResult solve_fgw(const SentenceGraph& g1, const SentenceGraph& g2, double alpha,
                    const FgwConfig& config = {}, FgwDiagnostics* diagnostics = nullptr);

/// Gradients of the objective w.r.t. node features with the coupling frozen
/// (envelope treatment; adjacency held constant).
struct FgwFeatureGrads {
    Mat d_x1;
    Mat d_x2;
};
FgwFeatureGrads fgw_grad_features(const SentenceGraph& g1, const SentenceGraph& g2,
                                  const FgwResult& result, double alpha);

} // namespace tgs
