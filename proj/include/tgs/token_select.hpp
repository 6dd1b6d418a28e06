#pragma once

#include <vector>

#include "tgs/linalg.hpp"
#include "tgs/trace.hpp"

namespace tgs {

struct SelectionConfig {
    double rho = 0.5;                  // entropy quantile for candidate filtering
    double lambda_nec = 0.5;           // semantic-vs-trajectory trade-off
    double beta = 0.5;                 // entropy modulation strength
    int k = 8;                         // token budget per sentence
    double redundancy_threshold = 0.85;

    void validate() const;             // throws ValidationError on out-of-range fields
};

struct TokenScore {
    int position = 0;
    double entropy = 0.0;
    double d_sent = 0.0;               // 1 - cos, in [0, 2]
    double d_traj = 0.0;               // KL(original || counterfactual)
    double necessity = 0.0;
    double importance = 0.0;
};

/// Shannon entropy in nats with the 0*ln 0 = 0 convention. Validates the input.
double entropy_of(const Vec& dist);

/// Positions whose entropy is at or above the nearest-rank lower empirical
/// rho-quantile (ascending sort, element at index ceil(rho*L)-1). Nonempty.
std::vector<int> entropy_candidates(const std::vector<double>& entropies, double rho);

/// 1 - cos(orig, cf); throws on zero vectors or dimension mismatch.
double sentence_change(const Vec& orig_embed, const Vec& cf_embed);

/// KL(p || q) in nats, skipping p=0 terms; throws if some q_j = 0 < p_j.
double traj_change(const Vec& p, const Vec& q);

double necessity(double d_sent, double d_traj, double lambda_nec);

/// Min-max rescale to [0,1]; a constant list maps to all 0.5.
std::vector<double> rescale_unit(const std::vector<double>& values);

double importance(double n_tilde, double h_tilde, double beta);

struct Selection {
    std::vector<int> positions;        // ascending, for downstream anchoring
    std::vector<TokenScore> scores;    // one per entropy candidate, by position
};

/// Entropy filtering, counterfactual necessity, combined importance, then a
/// greedy budget-K pass that skips candidates whose hidden state is
/// near-duplicate (cosine above redundancy_threshold) of a selected one.
Selection select_tokens(const SentenceRecord& sentence, const SelectionConfig& config);

} // namespace tgs
