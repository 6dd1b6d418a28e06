#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tgs/circuit.hpp"
#include "tgs/linalg.hpp"

namespace tgs {

enum class UnfaithType { post_hoc, spurious };

std::string to_string(UnfaithType t);
UnfaithType unfaith_type_from_string(const std::string& s);

/// Recorded counterfactual intervention for one token: sentence-encoder
/// embeddings of the original and regenerated sentence plus the two
/// downstream predictive distributions.
struct CounterfactualRecord {
    Vec orig_sent_embed;
    Vec cf_sent_embed;
    Vec orig_down_dist;
    Vec cf_down_dist;
};

struct TokenSignal {
    std::string token_text;
    double entropy = 0.0;                          // nats, recorded at generation temperature
    std::optional<Vec> dist;                       // predictive distribution, when small enough to keep
    std::optional<CounterfactualRecord> necessity_inputs;
};

struct SentenceRecord {
    std::string text;
    std::vector<TokenSignal> tokens;
    Mat hidden_states;                             // L_t x d_model, one row per token
    std::optional<AttributionGraph> circuit;
};

struct TraceRecord {
    std::string id;
    std::string question;
    std::vector<SentenceRecord> sentences;
    std::optional<int> label;                      // 1 = unfaithful
    std::optional<UnfaithType> unfaith_type;
};

/// Throws ValidationError naming the record id and offending field.
void validate_trace(const TraceRecord& record);

/// Loads one TraceRecord per JSON line. Parse errors carry the 1-based line
/// number; validation errors (when schema_check is set) carry record id and
/// field. Hidden states may be inline nested arrays or {"bin","offset"}
/// references into a tensor container, resolved relative to the trace file.
std::vector<TraceRecord> load_traces(const std::string& path, bool schema_check = true);

/// Writes one record per line; floats round-trip at full precision.
void save_traces(const std::vector<TraceRecord>& records, const std::string& path);

nlohmann::json trace_to_json(const TraceRecord& record);
TraceRecord trace_from_json(const nlohmann::json& j, const std::string& base_dir = "");

struct DatasetSplit {
    std::vector<TraceRecord> train;
    std::vector<TraceRecord> val;
    std::vector<TraceRecord> test;
};

/// Deterministic seeded partition. Sizes are floor(fraction * n) with the
/// remainder going to train.
DatasetSplit split_dataset(const std::vector<TraceRecord>& records,
                           const std::array<double, 3>& fractions,
                           std::uint64_t seed);

} // namespace tgs
