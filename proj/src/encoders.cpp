#include "tgs/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "tgs/error.hpp"

namespace tgs {

namespace {

// Portable uniform double in [0, 1): top 53 bits of the engine output.
double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void glorot_fill(Mat& w, std::mt19937_64& rng) {
    const double s = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
    for (double& v : w.data) v = (2.0 * u01(rng) - 1.0) * s;
}

Mlp make_mlp(std::size_t in, std::size_t hidden, std::size_t out, std::mt19937_64& rng) {
    Mlp m;
    m.w1 = Mat(hidden, in, 0.0);
    m.b1 = Vec(hidden, 0.0);
    m.w2 = Mat(out, hidden, 0.0);
    m.b2 = Vec(out, 0.0);
    glorot_fill(m.w1, rng);
    glorot_fill(m.w2, rng);
    return m;
}

Mlp mlp_zeros(const Mlp& m) {
    Mlp z;
    z.w1 = Mat(m.w1.rows, m.w1.cols, 0.0);
    z.b1 = Vec(m.b1.size(), 0.0);
    z.w2 = Mat(m.w2.rows, m.w2.cols, 0.0);
    z.b2 = Vec(m.b2.size(), 0.0);
    return z;
}

void mlp_refs(Mlp& m, const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "w1", {m.w1.rows, m.w1.cols}, &m.w1.data});
    out.push_back({prefix + "b1", {m.b1.size()}, &m.b1});
    out.push_back({prefix + "w2", {m.w2.rows, m.w2.cols}, &m.w2.data});
    out.push_back({prefix + "b2", {m.b2.size()}, &m.b2});
}

} // namespace

Vec mlp_forward(const Mlp& m, const Vec& x, MlpCache* cache) {
    if (x.size() != m.in_dim()) {
        throw ValidationError("mlp input has dimension " + std::to_string(x.size()) +
                              ", expected " + std::to_string(m.in_dim()));
    }
    Vec pre1 = matvec(m.w1, x);
    for (std::size_t i = 0; i < pre1.size(); ++i) pre1[i] += m.b1[i];
    Vec h1(pre1.size());
    for (std::size_t i = 0; i < pre1.size(); ++i) h1[i] = pre1[i] > 0.0 ? pre1[i] : 0.0;
    Vec out = matvec(m.w2, h1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m.b2[i];
    if (cache) {
        cache->x = x;
        cache->pre1 = std::move(pre1);
        cache->h1 = h1;
    }
    return out;
}

Vec mlp_backward(const Mlp& m, const MlpCache& cache, const Vec& d_out, Mlp& grads) {
    if (cache.x.empty() && m.in_dim() != 0) {
        throw ValidationError("mlp backward called without a recorded forward pass");
    }
    if (d_out.size() != m.out_dim()) {
        throw ValidationError("mlp upstream gradient has the wrong dimension");
    }
    add_outer(grads.w2, d_out, cache.h1);
    for (std::size_t i = 0; i < d_out.size(); ++i) grads.b2[i] += d_out[i];
    Vec d_h1 = matvec_t(m.w2, d_out);
    for (std::size_t i = 0; i < d_h1.size(); ++i) {
        if (cache.pre1[i] <= 0.0) d_h1[i] = 0.0;
    }
    add_outer(grads.w1, d_h1, cache.x);
    for (std::size_t i = 0; i < d_h1.size(); ++i) grads.b1[i] += d_h1[i];
    return matvec_t(m.w1, d_h1);
}

GinParams make_gin(std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw ValidationError("encoder dimension must be positive");
    std::mt19937_64 rng(seed);
    GinParams p;
    p.dim = dim;
    p.layer1 = make_mlp(kNodeFeatureDim, dim, dim, rng);
    p.layer2 = make_mlp(dim, dim, dim, rng);
    p.readout_w = Mat(dim, dim, 0.0);
    glorot_fill(p.readout_w, rng);
    p.readout_b = Vec(dim, 0.0);
    return p;
}

AdaptorParams make_adaptor(std::size_t d_model, std::size_t dim, std::uint64_t seed) {
    if (d_model == 0 || dim == 0) throw ValidationError("adaptor dimensions must be positive");
    std::mt19937_64 rng(seed);
    AdaptorParams p;
    p.mlp = make_mlp(d_model, dim, dim, rng);
    return p;
}

GinParams zeros_like(const GinParams& p) {
    GinParams z;
    z.dim = p.dim;
    z.layer1 = mlp_zeros(p.layer1);
    z.layer2 = mlp_zeros(p.layer2);
    z.readout_w = Mat(p.readout_w.rows, p.readout_w.cols, 0.0);
    z.readout_b = Vec(p.readout_b.size(), 0.0);
    return z;
}

AdaptorParams zeros_like(const AdaptorParams& p) {
    AdaptorParams z;
    z.mlp = mlp_zeros(p.mlp);
    return z;
}

std::vector<ParamRef> param_refs(GinParams& p, const std::string& prefix) {
    std::vector<ParamRef> out;
    mlp_refs(p.layer1, prefix + "layer1.", out);
    mlp_refs(p.layer2, prefix + "layer2.", out);
    out.push_back({prefix + "readout_w", {p.readout_w.rows, p.readout_w.cols}, &p.readout_w.data});
    out.push_back({prefix + "readout_b", {p.readout_b.size()}, &p.readout_b});
    return out;
}

std::vector<ParamRef> param_refs(AdaptorParams& p, const std::string& prefix) {
    std::vector<ParamRef> out;
    mlp_refs(p.mlp, prefix, out);
    return out;
}

Mat build_node_features(const AttributionGraph& g) {
    const std::size_t n = g.nodes.size();
    Mat feats(n, kNodeFeatureDim, 0.0);
    if (n == 0) return feats;

    int max_layer = g.nodes.front().layer;
    int max_position = g.nodes.front().position;
    for (const auto& node : g.nodes) {
        max_layer = std::max(max_layer, node.layer);
        max_position = std::max(max_position, node.position);
    }
    // Input-only graphs have max_layer = -1; keep the scale finite.
    const double layer_denom = std::max(max_layer + 1, 1);
    const double pos_denom = static_cast<double>(max_position + 1);

    std::unordered_map<std::int64_t, std::size_t> index;
    index.reserve(n);
    for (std::size_t i = 0; i < n; ++i) index.emplace(g.nodes[i].id, i);
    std::vector<double> in_deg(n, 0.0), out_deg(n, 0.0);
    for (const auto& e : g.edges) {
        out_deg[index.at(e.src)] += 1.0;
        in_deg[index.at(e.dst)] += 1.0;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = g.nodes[i];
        double* row = feats.row_ptr(i);
        row[static_cast<std::size_t>(node.kind)] = 1.0;
        row[3] = static_cast<double>(node.layer) / layer_denom;
        row[4] = static_cast<double>(node.position) / pos_denom;
        row[5] = node.activation;
        row[6] = in_deg[i] / static_cast<double>(n);
        row[7] = out_deg[i] / static_cast<double>(n);
    }
    return feats;
}

Vec encode_circuit(const AttributionGraph& g, const GinParams& params, GinCache* cache) {
    GinCache local;
    GinCache& c = cache ? *cache : local;
    c = GinCache{};

    Mat feats;
    if (g.nodes.empty()) {
        c.empty_input = true;
        feats = Mat(1, kNodeFeatureDim, 0.0);
    } else {
        feats = build_node_features(g);
        std::unordered_map<std::int64_t, std::size_t> index;
        index.reserve(g.nodes.size());
        for (std::size_t i = 0; i < g.nodes.size(); ++i) index.emplace(g.nodes[i].id, i);
        c.edge_endpoints.reserve(g.edges.size());
        c.edge_weights.reserve(g.edges.size());
        for (const auto& e : g.edges) {
            c.edge_endpoints.push_back({index.at(e.src), index.at(e.dst)});
            c.edge_weights.push_back(e.weight);
        }
    }
    const std::size_t n = feats.rows;
    c.n = n;

    // Round 1: aggregate raw descriptors, then update.
    Mat agg1(n, kNodeFeatureDim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(feats.row_ptr(i), kNodeFeatureDim, agg1.row_ptr(i));
    }
    for (std::size_t e = 0; e < c.edge_endpoints.size(); ++e) {
        const auto [src, dst] = c.edge_endpoints[e];
        axpy(c.edge_weights[e], feats.row_ptr(src), agg1.row_ptr(dst), kNodeFeatureDim);
    }
    c.c1.resize(n);
    c.h1 = Mat(n, params.dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Vec h = mlp_forward(params.layer1, agg1.row(i), &c.c1[i]);
        c.h1.set_row(i, h);
    }

    // Round 2 over the updated states.
    Mat agg2 = c.h1;
    for (std::size_t e = 0; e < c.edge_endpoints.size(); ++e) {
        const auto [src, dst] = c.edge_endpoints[e];
        axpy(c.edge_weights[e], c.h1.row_ptr(src), agg2.row_ptr(dst), params.dim);
    }
    c.c2.resize(n);
    Vec mean(params.dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Vec h = mlp_forward(params.layer2, agg2.row(i), &c.c2[i]);
        axpy(1.0 / static_cast<double>(n), h.data(), mean.data(), params.dim);
    }
    c.mean_state = mean;

    Vec out = matvec(params.readout_w, mean);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += params.readout_b[i];
    return out;
}

void encode_backward(const GinParams& params, const GinCache& cache, const Vec& d_embed,
                     GinParams& grads) {
    if (cache.n == 0) {
        throw ValidationError("encode_backward called without a recorded forward pass");
    }
    if (d_embed.size() != params.dim) {
        throw ValidationError("upstream embedding gradient has the wrong dimension");
    }
    const std::size_t n = cache.n;

    add_outer(grads.readout_w, d_embed, cache.mean_state);
    for (std::size_t i = 0; i < d_embed.size(); ++i) grads.readout_b[i] += d_embed[i];
    Vec d_mean = matvec_t(params.readout_w, d_embed);
    for (double& v : d_mean) v /= static_cast<double>(n);

    // Round 2 backward: every node's final state receives d_mean.
    Mat d_agg2(n, params.dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Vec d = mlp_backward(params.layer2, cache.c2[i], d_mean, grads.layer2);
        d_agg2.set_row(i, d);
    }
    // Transpose of agg2[dst] = h1[dst] + sum_e w_e h1[src].
    Mat d_h1 = d_agg2;
    for (std::size_t e = 0; e < cache.edge_endpoints.size(); ++e) {
        const auto [src, dst] = cache.edge_endpoints[e];
        axpy(cache.edge_weights[e], d_agg2.row_ptr(dst), d_h1.row_ptr(src), params.dim);
    }

    // Round 1 backward; node descriptors are data, so gradients stop here.
    for (std::size_t i = 0; i < n; ++i) {
        mlp_backward(params.layer1, cache.c1[i], d_h1.row(i), grads.layer1);
    }
}

Vec external_embed(const SentenceRecord& sentence) {
    const Mat& h = sentence.hidden_states;
    if (h.rows == 0 || h.cols == 0) {
        throw ValidationError("sentence has no hidden states to pool");
    }
    Vec mean(h.cols, 0.0);
    for (std::size_t i = 0; i < h.rows; ++i) {
        axpy(1.0 / static_cast<double>(h.rows), h.row_ptr(i), mean.data(), h.cols);
    }
    return mean;
}

Vec adapt(const Vec& x, const AdaptorParams& params, MlpCache* cache) {
    return mlp_forward(params.mlp, x, cache);
}

Vec adapt_backward(const AdaptorParams& params, const MlpCache& cache, const Vec& d_out,
                   AdaptorParams& grads) {
    return mlp_backward(params.mlp, cache, d_out, grads.mlp);
}

} // namespace tgs
