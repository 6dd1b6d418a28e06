#include "tgs/trace.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "tgs/error.hpp"
#include "tgs/tensor_io.hpp"

namespace tgs {

namespace {

constexpr double kDistSumTol = 1e-6;
constexpr double kEntropyTol = 1e-5;

double shannon_entropy(const Vec& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

void check_distribution(const Vec& p, const std::string& where, const std::string& record_id) {
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0)
            throw ValidationError("record " + record_id + ": " + where + " has negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kDistSumTol)
        throw ValidationError("record " + record_id + ": " + where + " sums to " +
                              std::to_string(sum) + ", expected 1");
}

Vec vec_from_json(const nlohmann::json& j) {
    Vec v;
    v.reserve(j.size());
    for (const auto& e : j) v.push_back(e.get<double>());
    return v;
}

nlohmann::json vec_to_json(const Vec& v) {
    return nlohmann::json(v);
}

Mat hidden_states_from_json(const nlohmann::json& j, const std::string& base_dir) {
    if (j.is_object()) {
        std::filesystem::path bin = j.at("bin").get<std::string>();
        if (bin.is_relative() && !base_dir.empty()) bin = std::filesystem::path(base_dir) / bin;
        return tensor_to_matrix(read_tensor_at(bin.string(), j.at("offset").get<std::uint64_t>()));
    }
    const std::size_t rows = j.size();
    if (rows == 0) return Mat();
    const std::size_t cols = j.at(0).size();
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& row = j.at(i);
        if (row.size() != cols)
            throw ParseError("hidden_states rows have inconsistent widths");
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = row.at(k).get<double>();
    }
    return m;
}

nlohmann::json hidden_states_to_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows; ++i) rows.push_back(vec_to_json(m.row(i)));
    return rows;
}

} // namespace

std::string to_string(UnfaithType t) {
    return t == UnfaithType::post_hoc ? "post_hoc" : "spurious";
}

UnfaithType unfaith_type_from_string(const std::string& s) {
    if (s == "post_hoc") return UnfaithType::post_hoc;
    if (s == "spurious") return UnfaithType::spurious;
    throw ParseError("unknown unfaith_type: \"" + s + "\"");
}

void validate_trace(const TraceRecord& record) {
    const std::string& id = record.id;
    if (record.sentences.empty())
        throw ValidationError("record " + id + ": sentences must be nonempty");
    if (record.label && *record.label != 0 && *record.label != 1)
        throw ValidationError("record " + id + ": label must be 0 or 1");

    for (std::size_t t = 0; t < record.sentences.size(); ++t) {
        const auto& sent = record.sentences[t];
        const std::string where = "sentence " + std::to_string(t);
        if (sent.tokens.empty())
            throw ValidationError("record " + id + ": " + where + " has no tokens");
        if (sent.hidden_states.rows != sent.tokens.size())
            throw ValidationError("record " + id + ": " + where + " hidden_states has " +
                                  std::to_string(sent.hidden_states.rows) + " rows for " +
                                  std::to_string(sent.tokens.size()) + " tokens");
        for (std::size_t u = 0; u < sent.tokens.size(); ++u) {
            const auto& tok = sent.tokens[u];
            const std::string tok_where = where + " token " + std::to_string(u);
            if (tok.entropy < 0.0 || !std::isfinite(tok.entropy))
                throw ValidationError("record " + id + ": " + tok_where + " entropy invalid");
            if (tok.dist) {
                check_distribution(*tok.dist, tok_where + " dist", id);
                const double recomputed = shannon_entropy(*tok.dist);
                if (std::abs(recomputed - tok.entropy) > kEntropyTol)
                    throw ValidationError("record " + id + ": " + tok_where +
                                          " stored entropy " + std::to_string(tok.entropy) +
                                          " disagrees with dist entropy " +
                                          std::to_string(recomputed));
            }
            if (tok.necessity_inputs) {
                const auto& cf = *tok.necessity_inputs;
                check_distribution(cf.orig_down_dist, tok_where + " orig_down_dist", id);
                check_distribution(cf.cf_down_dist, tok_where + " cf_down_dist", id);
                if (cf.orig_sent_embed.size() != cf.cf_sent_embed.size())
                    throw ValidationError("record " + id + ": " + tok_where +
                                          " counterfactual embeddings differ in dimension");
            }
        }
        if (sent.circuit) {
            auto report = validate_graph(*sent.circuit);
            if (!report.ok())
                throw ValidationError("record " + id + ": " + where +
                                      " circuit invalid: " + report.joined());
        }
    }
}

TraceRecord trace_from_json(const nlohmann::json& j, const std::string& base_dir) {
    TraceRecord r;
    r.id = j.at("id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    for (const auto& js : j.at("sentences")) {
        SentenceRecord s;
        s.text = js.at("text").get<std::string>();
        for (const auto& jt : js.at("tokens")) {
            TokenSignal tok;
            tok.token_text = jt.at("token_text").get<std::string>();
            tok.entropy = jt.at("entropy").get<double>();
            if (jt.contains("dist")) tok.dist = vec_from_json(jt.at("dist"));
            if (jt.contains("necessity_inputs")) {
                const auto& jn = jt.at("necessity_inputs");
                CounterfactualRecord cf;
                cf.orig_sent_embed = vec_from_json(jn.at("orig_sent_embed"));
                cf.cf_sent_embed = vec_from_json(jn.at("cf_sent_embed"));
                cf.orig_down_dist = vec_from_json(jn.at("orig_down_dist"));
                cf.cf_down_dist = vec_from_json(jn.at("cf_down_dist"));
                tok.necessity_inputs = std::move(cf);
            }
            s.tokens.push_back(std::move(tok));
        }
        s.hidden_states = hidden_states_from_json(js.at("hidden_states"), base_dir);
        if (js.contains("circuit")) s.circuit = circuit_from_json(js.at("circuit"));
        r.sentences.push_back(std::move(s));
    }
    if (j.contains("label")) r.label = j.at("label").get<int>();
    if (j.contains("unfaith_type"))
        r.unfaith_type = unfaith_type_from_string(j.at("unfaith_type").get<std::string>());
    return r;
}

nlohmann::json trace_to_json(const TraceRecord& record) {
    nlohmann::json sentences = nlohmann::json::array();
    for (const auto& s : record.sentences) {
        nlohmann::json tokens = nlohmann::json::array();
        for (const auto& tok : s.tokens) {
            nlohmann::json jt{{"token_text", tok.token_text}, {"entropy", tok.entropy}};
            if (tok.dist) jt["dist"] = vec_to_json(*tok.dist);
            if (tok.necessity_inputs) {
                const auto& cf = *tok.necessity_inputs;
                jt["necessity_inputs"] = {{"orig_sent_embed", vec_to_json(cf.orig_sent_embed)},
                                          {"cf_sent_embed", vec_to_json(cf.cf_sent_embed)},
                                          {"orig_down_dist", vec_to_json(cf.orig_down_dist)},
                                          {"cf_down_dist", vec_to_json(cf.cf_down_dist)}};
            }
            tokens.push_back(std::move(jt));
        }
        nlohmann::json js{{"text", s.text},
                          {"tokens", std::move(tokens)},
                          {"hidden_states", hidden_states_to_json(s.hidden_states)}};
        if (s.circuit) js["circuit"] = circuit_to_json(*s.circuit);
        sentences.push_back(std::move(js));
    }
    nlohmann::json j{{"id", record.id},
                     {"question", record.question},
                     {"sentences", std::move(sentences)}};
    if (record.label) j["label"] = *record.label;
    if (record.unfaith_type) j["unfaith_type"] = to_string(*record.unfaith_type);
    return j;
}

std::vector<TraceRecord> load_traces(const std::string& path, bool schema_check) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file: " + path);
    const std::string base_dir = std::filesystem::path(path).parent_path().string();

    std::vector<TraceRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        TraceRecord r;
        try {
            r = trace_from_json(j, base_dir);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (schema_check) validate_trace(r);
        records.push_back(std::move(r));
    }
    return records;
}

void save_traces(const std::vector<TraceRecord>& records, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write trace file: " + path);
        for (const auto& r : records) out << trace_to_json(r).dump() << '\n';
        if (!out) throw IoError("write failed: " + path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot finalize trace file " + path + ": " + ec.message());
}

DatasetSplit split_dataset(const std::vector<TraceRecord>& records,
                           const std::array<double, 3>& fractions,
                           std::uint64_t seed) {
    for (double f : fractions)
        if (!(f > 0.0)) throw ValidationError("split_dataset: fractions must be positive");
    const double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("split_dataset: fractions sum to " + std::to_string(sum));
    if (records.size() < 3)
        throw ValidationError("split_dataset: need at least 3 records, got " +
                              std::to_string(records.size()));

    const std::size_t n = records.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::floor(fractions[2] * static_cast<double>(n)));
    const std::size_t n_train = n - n_val - n_test; // floor remainder goes to train

    DatasetSplit split;
    for (std::size_t i = 0; i < n; ++i) {
        const TraceRecord& r = records[order[i]];
        if (i < n_train)
            split.train.push_back(r);
        else if (i < n_train + n_val)
            split.val.push_back(r);
        else
            split.test.push_back(r);
    }
    return split;
}

} // namespace tgs
