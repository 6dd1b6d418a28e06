#pragma once

#include <utility>

#include <json.hpp>

#include "tgs/linalg.hpp"

namespace tgs {

/// Trace-level graph over reasoning sentences: node features, a strictly
/// upper-triangular row-normalized forward adjacency, and a uniform node
/// measure. The same builder serves both the internal (circuit-derived) and
/// external (hidden-state-derived) sides so discrepancies reflect the data,
/// not the construction.
struct SentenceGraph {
    Mat features;  // T x d
    Mat adjacency; // T x T, A[i][j] = 0 for j <= i, nonzero rows sum to 1
    Vec measure;   // uniform 1/T
};

/// Raw forward edges are successor indicators plus lambda_edge-weighted
/// clamped cosine similarity; rows with positive sum are normalized by it.
/// Cosine against a zero feature row is taken as 0.
SentenceGraph build_graph(const Mat& features, double lambda_edge);

/// Builds both graphs through the identical code path. Throws on T mismatch.
std::pair<SentenceGraph, SentenceGraph> shared_build(const Mat& internal_feats,
                                                     const Mat& external_feats,
                                                     double lambda_edge);

nlohmann::json sentence_graph_debug_json(const SentenceGraph& g);

} // namespace tgs
