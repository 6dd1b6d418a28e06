#include "tgs/sentence_graph.hpp"

#include <algorithm>
#include <iostream>

#include "tgs/error.hpp"

namespace tgs {

SentenceGraph build_graph(const Mat& features, double lambda_edge) {
    if (features.rows == 0) throw ValidationError("build_graph: empty feature matrix");
    if (!(lambda_edge >= 0.0)) throw ValidationError("build_graph: lambda_edge must be >= 0");
    const std::size_t t = features.rows;

    bool warned_zero_row = false;
    SentenceGraph g;
    g.features = features;
    g.adjacency = Mat(t, t, 0.0);
    g.measure = Vec(t, 1.0 / static_cast<double>(t));

    for (std::size_t i = 0; i < t; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = i + 1; j < t; ++j) {
            double w = (j == i + 1) ? 1.0 : 0.0;
            if (lambda_edge > 0.0) {
                const double sim =
                    cosine_or_zero(features.row_ptr(i), features.row_ptr(j), features.cols);
                if (sim == 0.0 && !warned_zero_row &&
                    dot_n(features.row_ptr(i), features.row_ptr(i), features.cols) == 0.0) {
                    std::clog << "build_graph: zero feature row at sentence " << i
                              << ", cosine taken as 0\n";
                    warned_zero_row = true;
                }
                w += lambda_edge * std::max(0.0, sim);
            }
            g.adjacency(i, j) = w;
            row_sum += w;
        }
        if (row_sum > 0.0)
            for (std::size_t j = i + 1; j < t; ++j) g.adjacency(i, j) /= row_sum;
    }
    return g;
}

std::pair<SentenceGraph, SentenceGraph> shared_build(const Mat& internal_feats,
                                                     const Mat& external_feats,
                                                     double lambda_edge) {
    if (internal_feats.rows != external_feats.rows)
        throw ValidationError("shared_build: sentence counts differ (" +
                              std::to_string(internal_feats.rows) + " vs " +
                              std::to_string(external_feats.rows) + ")");
    return {build_graph(internal_feats, lambda_edge), build_graph(external_feats, lambda_edge)};
}

nlohmann::json sentence_graph_debug_json(const SentenceGraph& g) {
    auto mat_rows = [](const Mat& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < m.rows; ++i) rows.push_back(m.row(i));
        return rows;
    };
    return {{"features", mat_rows(g.features)},
            {"adjacency", mat_rows(g.adjacency)},
            {"measure", g.measure}};
}

} // namespace tgs
