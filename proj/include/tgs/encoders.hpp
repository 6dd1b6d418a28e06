#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tgs/circuit.hpp"
#include "tgs/linalg.hpp"
#include "tgs/trace.hpp"

namespace tgs {

/// Structural/activation node descriptor fed to the graph encoder:
/// [kind one-hot (3)] [layer scaled] [position scaled] [activation]
/// [in-degree/n] [out-degree/n].
inline constexpr std::size_t kNodeFeatureDim = 8;

/// y = W2 * max(0, W1 x + b1) + b2. Used for both GIN node updates and the
/// external-feature adaptor; gradients are hand-derived against the cache.
struct Mlp {
    Mat w1; // hidden x in
    Vec b1;
    Mat w2; // out x hidden
    Vec b2;

    std::size_t in_dim() const { return w1.cols; }
    std::size_t hidden_dim() const { return w1.rows; }
    std::size_t out_dim() const { return w2.rows; }
};

struct MlpCache {
    Vec x;
    Vec pre1; // W1 x + b1
    Vec h1;   // max(0, pre1)
};

Vec mlp_forward(const Mlp& m, const Vec& x, MlpCache* cache = nullptr);

/// Accumulates parameter gradients into `grads` (same shapes as `m`) and
/// returns the gradient w.r.t. the input.
Vec mlp_backward(const Mlp& m, const MlpCache& cache, const Vec& d_out, Mlp& grads);

/// Two message-passing rounds (node update MLP over self state plus
/// weight-scaled in-neighbor states, epsilon = 0) followed by a linear map of
/// the node-mean state.
struct GinParams {
    std::size_t dim = 0;
    Mlp layer1; // kNodeFeatureDim -> dim -> dim
    Mlp layer2; // dim -> dim -> dim
    Mat readout_w; // dim x dim
    Vec readout_b;
};

struct AdaptorParams {
    Mlp mlp; // d_model -> dim -> dim
};

/// Seeded uniform init in [-s, s] with s = sqrt(6 / (fan_in + fan_out));
/// biases zero. Bit-reproducible for a fixed seed within one build.
GinParams make_gin(std::size_t dim, std::uint64_t seed);
AdaptorParams make_adaptor(std::size_t d_model, std::size_t dim, std::uint64_t seed);

GinParams zeros_like(const GinParams& p);
AdaptorParams zeros_like(const AdaptorParams& p);

/// Named view over every parameter tensor, in a fixed order shared by
/// checkpoints, gradient clipping, and finite-difference probes.
struct ParamRef {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double>* data;
};

std::vector<ParamRef> param_refs(GinParams& p, const std::string& prefix = "gin.");
std::vector<ParamRef> param_refs(AdaptorParams& p, const std::string& prefix = "adaptor.");

/// Deterministic node descriptors for a validated graph, one row per node in
/// storage order.
Mat build_node_features(const AttributionGraph& g);

struct GinCache {
    std::size_t n = 0;
    bool empty_input = false; // encoded a synthetic zero node for an empty graph
    std::vector<std::array<std::size_t, 2>> edge_endpoints;
    Vec edge_weights;
    std::vector<MlpCache> c1, c2;
    Mat h1; // n x dim, states after round 1
    Vec mean_state;
};

/// Embeds a circuit. An empty graph encodes as a single synthetic node with a
/// zero descriptor; the cache flags that case.
Vec encode_circuit(const AttributionGraph& g, const GinParams& params,
                   GinCache* cache = nullptr);

/// Backprop through encode_circuit given d(loss)/d(embedding); parameter
/// gradients accumulate into `grads`. Node descriptors are data, so nothing
/// flows past them.
void encode_backward(const GinParams& params, const GinCache& cache, const Vec& d_embed,
                     GinParams& grads);

/// Mean of the sentence's token hidden states.
Vec external_embed(const SentenceRecord& sentence);

Vec adapt(const Vec& x, const AdaptorParams& params, MlpCache* cache = nullptr);
Vec adapt_backward(const AdaptorParams& params, const MlpCache& cache, const Vec& d_out,
                   AdaptorParams& grads);

} // namespace tgs
