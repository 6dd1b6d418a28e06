#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgs/linalg.hpp"
#include "tgs/trace.hpp"

namespace tgs {

/// Controls the labeled synthetic corpus. Faithful traces derive internal
/// circuits and external hidden states from one latent trajectory; post-hoc
/// traces resample the external latents of corrupted sentences independently
/// (feature-level mismatch); spurious traces rotate external latents among
/// non-adjacent sentence positions (structure-level mismatch).
struct SynthConfig {
    std::size_t n_traces = 600;
    std::size_t t_min = 4; // sentences per trace
    std::size_t t_max = 8;
    std::size_t d_model = 32;
    std::size_t d_latent = 4;
    double noise_std = 0.02;
    double post_hoc_fraction = 0.3;
    double spurious_fraction = 0.3;
    double corrupt_fraction = 0.5; // fraction of sentences perturbed in unfaithful traces
    std::uint64_t seed = 0;

    void validate() const;
};

struct SentenceTruth {
    std::vector<std::size_t> informative; // planted high-necessity token positions
    Vec latent;                           // z_t driving the internal circuit
    Vec ext_latent;                       // latent behind the external hidden states
};

struct TraceTruth {
    std::string trace_id;
    std::vector<SentenceTruth> sentences;
};

struct SynthDataset {
    std::vector<TraceRecord> traces;
    std::vector<TraceTruth> truth;
    Mat ext_map; // d_model x d_latent linear map behind external states
};

SynthDataset generate(const SynthConfig& config);

/// Planted informative token positions, one set per sentence. Throws
/// ValidationError for a trace id the dataset does not contain.
std::vector<std::vector<std::size_t>> selection_ground_truth(const SynthDataset& dataset,
                                                             const std::string& trace_id);

/// Sidecar JSONL: first line describes the dataset (ext_map), then one line
/// per trace with informative sets and latents.
void save_truth(const SynthDataset& dataset, const std::string& path);

} // namespace tgs
