#include "tgs/token_select.hpp"

#include <algorithm>
#include <cmath>

#include "tgs/error.hpp"

namespace tgs {

void SelectionConfig::validate() const {
    if (!(rho > 0.0 && rho < 1.0))
        throw ValidationError("selection.rho must be in (0,1)");
    if (!(lambda_nec >= 0.0 && lambda_nec <= 1.0))
        throw ValidationError("selection.lambda_nec must be in [0,1]");
    if (!(beta >= 0.0)) throw ValidationError("selection.beta must be >= 0");
    if (k < 1) throw ValidationError("selection.k must be positive");
    if (!(redundancy_threshold > 0.0 && redundancy_threshold <= 1.0))
        throw ValidationError("selection.redundancy_threshold must be in (0,1]");
}

double entropy_of(const Vec& dist) {
    if (dist.empty()) throw ValidationError("entropy_of: empty distribution");
    double sum = 0.0;
    for (double p : dist) {
        if (p < 0.0) throw ValidationError("entropy_of: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw ValidationError("entropy_of: distribution sums to " + std::to_string(sum));
    double h = 0.0;
    for (double p : dist)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

std::vector<int> entropy_candidates(const std::vector<double>& entropies, double rho) {
    if (entropies.empty()) throw ValidationError("entropy_candidates: empty entropy list");
    if (!(rho > 0.0 && rho < 1.0))
        throw ValidationError("entropy_candidates: rho must be in (0,1)");

    std::vector<double> sorted(entropies);
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    // Nearest-rank lower quantile; the epsilon keeps ceil() exact when rho*n
    // lands on an integer up to rounding.
    auto rank = static_cast<std::size_t>(std::ceil(rho * n - 1e-9));
    rank = std::min(std::max<std::size_t>(rank, 1), sorted.size());
    const double threshold = sorted[rank - 1];

    std::vector<int> keep;
    for (std::size_t i = 0; i < entropies.size(); ++i)
        if (entropies[i] >= threshold) keep.push_back(static_cast<int>(i));
    return keep;
}

double sentence_change(const Vec& orig_embed, const Vec& cf_embed) {
    if (orig_embed.size() != cf_embed.size())
        throw ValidationError("sentence_change: embedding dimensions differ");
    const double no = norm(orig_embed);
    const double nc = norm(cf_embed);
    if (no == 0.0 || nc == 0.0)
        throw ValidationError("sentence_change: zero embedding vector");
    return 1.0 - dot(orig_embed, cf_embed) / (no * nc);
}

double traj_change(const Vec& p, const Vec& q) {
    if (p.size() != q.size()) throw ValidationError("traj_change: length mismatch");
    double kl = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] == 0.0) continue;
        if (q[j] == 0.0)
            throw ValidationError("traj_change: q has zero mass at index " + std::to_string(j) +
                                  " where p does not");
        kl += p[j] * std::log(p[j] / q[j]);
    }
    return kl;
}

double necessity(double d_sent, double d_traj, double lambda_nec) {
    if (!(lambda_nec >= 0.0 && lambda_nec <= 1.0))
        throw ValidationError("necessity: lambda must be in [0,1]");
    return lambda_nec * d_sent + (1.0 - lambda_nec) * d_traj;
}

std::vector<double> rescale_unit(const std::vector<double>& values) {
    if (values.empty()) return {};
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(values.size());
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / (hi - lo);
    return out;
}

double importance(double n_tilde, double h_tilde, double beta) {
    return n_tilde * (1.0 + beta * h_tilde);
}

Selection select_tokens(const SentenceRecord& sentence, const SelectionConfig& config) {
    config.validate();

    std::vector<double> entropies;
    entropies.reserve(sentence.tokens.size());
    for (const auto& tok : sentence.tokens) entropies.push_back(tok.entropy);

    const std::vector<int> candidates = entropy_candidates(entropies, config.rho);

    Selection sel;
    std::vector<double> cand_entropy, cand_necessity;
    for (int pos : candidates) {
        const auto& tok = sentence.tokens[static_cast<std::size_t>(pos)];
        if (!tok.necessity_inputs)
            throw ValidationError("select_tokens: candidate token at position " +
                                  std::to_string(pos) + " lacks necessity_inputs");
        const auto& cf = *tok.necessity_inputs;
        TokenScore score;
        score.position = pos;
        score.entropy = tok.entropy;
        score.d_sent = sentence_change(cf.orig_sent_embed, cf.cf_sent_embed);
        score.d_traj = traj_change(cf.orig_down_dist, cf.cf_down_dist);
        score.necessity = necessity(score.d_sent, score.d_traj, config.lambda_nec);
        sel.scores.push_back(score);
        cand_entropy.push_back(score.entropy);
        cand_necessity.push_back(score.necessity);
    }

    const std::vector<double> h_tilde = rescale_unit(cand_entropy);
    const std::vector<double> n_tilde = rescale_unit(cand_necessity);
    for (std::size_t i = 0; i < sel.scores.size(); ++i)
        sel.scores[i].importance = importance(n_tilde[i], h_tilde[i], config.beta);

    // Greedy descent by importance with the cosine redundancy skip; ties go to
    // the smaller position.
    std::vector<std::size_t> order(sel.scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sel.scores[a].importance != sel.scores[b].importance)
            return sel.scores[a].importance > sel.scores[b].importance;
        return sel.scores[a].position < sel.scores[b].position;
    });

    const Mat& hs = sentence.hidden_states;
    std::vector<int> picked;
    for (std::size_t oi : order) {
        if (picked.size() >= static_cast<std::size_t>(config.k)) break;
        const int pos = sel.scores[oi].position;
        bool redundant = false;
        for (int chosen : picked) {
            const double sim = cosine_or_zero(hs.row_ptr(static_cast<std::size_t>(pos)),
                                              hs.row_ptr(static_cast<std::size_t>(chosen)),
                                              hs.cols);
            if (sim > config.redundancy_threshold) {
                redundant = true;
                break;
            }
        }
        if (!redundant) picked.push_back(pos);
    }

    std::sort(picked.begin(), picked.end());
    sel.positions = std::move(picked);
    return sel;
}

} // namespace tgs
