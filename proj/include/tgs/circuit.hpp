#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace tgs {

enum class NodeKind { input, feature, output };

std::string to_string(NodeKind k);
NodeKind node_kind_from_string(const std::string& s);

/// One node of an attribution circuit. Inputs sit at layer -1, outputs above
/// every feature layer, so (layer, position) totally orders the graph.
struct CircuitNode {
    int id = 0;
    NodeKind kind = NodeKind::feature;
    int layer = 0;
    int position = 0;
    std::optional<int> feature_index; // feature nodes only
    double activation = 0.0;
};

struct CircuitEdge {
    int src = 0;
    int dst = 0;
    double weight = 0.0; // source activation times its linear influence
};

struct AttributionGraph {
    std::vector<CircuitNode> nodes;
    std::vector<CircuitEdge> edges;
    std::optional<int> anchor_position;
};

/// Attribution weight of a single edge: activation times linear influence.
inline double edge_weight(double activation, double influence) {
    return activation * influence;
}

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string joined() const;
};

/// Checks every structural invariant and reports all violations; never throws.
ValidationReport validate_graph(const AttributionGraph& g);

/// Keeps input/feature nodes at the selected positions plus output nodes at
/// the anchor (the rightmost selected position), then drops the edges that
/// lost an endpoint and any node left without incident edges (anchored
/// outputs excepted). Throws ValidationError if the anchor has no output node.
AttributionGraph restrict_circuit(const AttributionGraph& g, const std::set<int>& selected_positions);

struct GraphStats {
    std::size_t input_nodes = 0;
    std::size_t feature_nodes = 0;
    std::size_t output_nodes = 0;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    double total_abs_weight = 0.0;
    int max_layer = 0; // 0 for the empty graph
};

GraphStats graph_stats(const AttributionGraph& g);

nlohmann::json circuit_to_json(const AttributionGraph& g);
AttributionGraph circuit_from_json(const nlohmann::json& j);

} // namespace tgs
