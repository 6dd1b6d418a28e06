#include "tgs/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "tgs/error.hpp"

namespace tgs {

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::input: return "input";
        case NodeKind::feature: return "feature";
        case NodeKind::output: return "output";
    }
    return "?";
}

NodeKind node_kind_from_string(const std::string& s) {
    if (s == "input") return NodeKind::input;
    if (s == "feature") return NodeKind::feature;
    if (s == "output") return NodeKind::output;
    throw ParseError("unknown circuit node kind: \"" + s + "\"");
}

std::string ValidationReport::joined() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v;
    }
    return out;
}

namespace {

// Strict lexicographic order on (layer, position) that every edge must follow.
bool lex_less(const CircuitNode& a, const CircuitNode& b) {
    return a.layer < b.layer || (a.layer == b.layer && a.position < b.position);
}

std::unordered_map<int, std::size_t> index_by_id(const AttributionGraph& g) {
    std::unordered_map<int, std::size_t> idx;
    idx.reserve(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) idx.emplace(g.nodes[i].id, i);
    return idx;
}

} // namespace

ValidationReport validate_graph(const AttributionGraph& g) {
    ValidationReport report;
    auto flag = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

    std::unordered_map<int, std::size_t> idx;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& n = g.nodes[i];
        if (idx.count(n.id)) flag("duplicate node id " + std::to_string(n.id));
        idx.emplace(n.id, i);
        if (n.position < 0) flag("node " + std::to_string(n.id) + ": negative position");
        switch (n.kind) {
            case NodeKind::feature:
                if (!n.feature_index)
                    flag("node " + std::to_string(n.id) + ": feature node missing feature_index");
                if (!(n.activation > 0.0))
                    flag("node " + std::to_string(n.id) + ": inactive feature node (activation " +
                         std::to_string(n.activation) + ")");
                if (n.layer < 0) flag("node " + std::to_string(n.id) + ": feature layer < 0");
                break;
            case NodeKind::input:
                if (n.feature_index)
                    flag("node " + std::to_string(n.id) + ": input node carries feature_index");
                if (n.layer != -1)
                    flag("node " + std::to_string(n.id) + ": input node must sit at layer -1");
                break;
            case NodeKind::output:
                if (n.feature_index)
                    flag("node " + std::to_string(n.id) + ": output node carries feature_index");
                if (n.layer < 0) flag("node " + std::to_string(n.id) + ": output layer < 0");
                break;
        }
        if (!std::isfinite(n.activation))
            flag("node " + std::to_string(n.id) + ": non-finite activation");
    }

    int max_feature_layer = -1;
    for (const auto& n : g.nodes)
        if (n.kind == NodeKind::feature) max_feature_layer = std::max(max_feature_layer, n.layer);
    if (max_feature_layer >= 0)
        for (const auto& n : g.nodes)
            if (n.kind == NodeKind::output && n.layer <= max_feature_layer)
                flag("node " + std::to_string(n.id) + ": output layer must exceed every feature layer");

    // Edge-level checks plus a Kahn pass so cycles get named as cycles even
    // when the per-edge ordering check already fails.
    std::unordered_map<int, std::vector<int>> adj;
    std::unordered_map<int, int> indeg;
    for (const auto& e : g.edges) {
        if (e.src == e.dst) {
            flag("self-loop on node " + std::to_string(e.src));
            continue;
        }
        auto si = idx.find(e.src);
        auto di = idx.find(e.dst);
        if (si == idx.end()) flag("edge references missing src node " + std::to_string(e.src));
        if (di == idx.end()) flag("edge references missing dst node " + std::to_string(e.dst));
        if (si == idx.end() || di == idx.end()) continue;
        if (!std::isfinite(e.weight))
            flag("edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                 ": non-finite weight");
        if (!lex_less(g.nodes[si->second], g.nodes[di->second]))
            flag("edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                 " does not increase (layer, position)");
        adj[e.src].push_back(e.dst);
        ++indeg[e.dst];
    }

    std::vector<int> queue;
    for (const auto& n : g.nodes)
        if (indeg.find(n.id) == indeg.end()) queue.push_back(n.id);
    std::size_t visited = queue.size();
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        auto it = adj.find(u);
        if (it == adj.end()) continue;
        for (int v : it->second)
            if (--indeg[v] == 0) {
                queue.push_back(v);
                ++visited;
            }
    }
    if (visited < g.nodes.size()) flag("cycle detected");

    return report;
}

AttributionGraph restrict_circuit(const AttributionGraph& g, const std::set<int>& selected_positions) {
    if (selected_positions.empty())
        throw ValidationError("restrict_circuit: empty selection");

    const int anchor = *selected_positions.rbegin();

    bool anchor_has_output = false;
    for (const auto& n : g.nodes)
        if (n.kind == NodeKind::output && n.position == anchor) {
            anchor_has_output = true;
            break;
        }
    if (!anchor_has_output)
        throw ValidationError("restrict_circuit: anchor has no output node (position " +
                              std::to_string(anchor) + ")");

    auto idx = index_by_id(g);
    std::unordered_set<int> kept;
    for (const auto& n : g.nodes) {
        const bool keep = (n.kind == NodeKind::output)
                              ? n.position == anchor
                              : selected_positions.count(n.position) > 0;
        if (keep) kept.insert(n.id);
    }

    AttributionGraph out;
    out.anchor_position = anchor;
    std::unordered_set<int> touched;
    for (const auto& e : g.edges) {
        if (kept.count(e.src) && kept.count(e.dst)) {
            out.edges.push_back(e);
            touched.insert(e.src);
            touched.insert(e.dst);
        }
    }
    for (const auto& n : g.nodes) {
        if (!kept.count(n.id)) continue;
        const bool anchored_output = n.kind == NodeKind::output && n.position == anchor;
        if (anchored_output || touched.count(n.id)) out.nodes.push_back(n);
    }
    return out;
}

GraphStats graph_stats(const AttributionGraph& g) {
    GraphStats s;
    for (const auto& n : g.nodes) {
        switch (n.kind) {
            case NodeKind::input: ++s.input_nodes; break;
            case NodeKind::feature: ++s.feature_nodes; break;
            case NodeKind::output: ++s.output_nodes; break;
        }
        s.max_layer = std::max(s.max_layer, n.layer);
    }
    s.node_count = g.nodes.size();
    s.edge_count = g.edges.size();
    for (const auto& e : g.edges) s.total_abs_weight += std::abs(e.weight);
    return s;
}

nlohmann::json circuit_to_json(const AttributionGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : g.nodes) {
        nlohmann::json jn{{"id", n.id},
                          {"kind", to_string(n.kind)},
                          {"layer", n.layer},
                          {"position", n.position},
                          {"activation", n.activation}};
        if (n.feature_index) jn["feature_index"] = *n.feature_index;
        nodes.push_back(std::move(jn));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges)
        edges.push_back({{"src", e.src}, {"dst", e.dst}, {"weight", e.weight}});
    nlohmann::json j{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
    if (g.anchor_position) j["anchor_position"] = *g.anchor_position;
    return j;
}

AttributionGraph circuit_from_json(const nlohmann::json& j) {
    AttributionGraph g;
    for (const auto& jn : j.at("nodes")) {
        CircuitNode n;
        n.id = jn.at("id").get<int>();
        n.kind = node_kind_from_string(jn.at("kind").get<std::string>());
        n.layer = jn.at("layer").get<int>();
        n.position = jn.at("position").get<int>();
        n.activation = jn.at("activation").get<double>();
        if (jn.contains("feature_index")) n.feature_index = jn.at("feature_index").get<int>();
        g.nodes.push_back(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
        CircuitEdge e;
        e.src = je.at("src").get<int>();
        e.dst = je.at("dst").get<int>();
        e.weight = je.at("weight").get<double>();
        g.edges.push_back(e);
    }
    if (j.contains("anchor_position")) g.anchor_position = j.at("anchor_position").get<int>();
    return g;
}

} // namespace tgs
