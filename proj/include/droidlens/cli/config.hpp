#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "droidlens/core/error.hpp"
#include "droidlens/eval/pipeline.hpp"
#include "droidlens/learn/classifier_spec.hpp"

namespace droidlens::cli {

/// Settings for eval/compare runs; loaded from JSON, then overridden by flags.
struct RunConfig {
    std::uint64_t seed = 42;
    std::size_t cv_k = 10;
    std::size_t cluster_k = 2;
    bool smote = true;
    std::size_t smote_k = 5;
    bool stratified = true;
    std::size_t kmeans_restarts = 10;
    bool standardize_clustering = false;
    Protocol protocol = Protocol::leakfree;
    Aggregation aggregation = Aggregation::pooled;
    std::vector<ClassifierKind> kinds{kAllClassifiers.begin(), kAllClassifiers.end()};
    std::vector<Hyperparameters> hyperparameters{5};

    std::vector<ClassifierSpec> specs() const {
        std::vector<ClassifierSpec> out;
        for (std::size_t i = 0; i < kinds.size(); ++i) out.push_back(make_spec(kinds[i], hyperparameters[i], seed));
        return out;
    }

    PipelineOptions pipeline_options() const {
        PipelineOptions o;
        o.cv_folds = cv_k;
        o.seed = seed;
        o.stratified = stratified;
        o.cluster_k = cluster_k;
        o.kmeans_restarts = kmeans_restarts;
        o.standardize_clustering = standardize_clustering;
        o.smote = smote;
        o.smote_k = smote_k;
        o.protocol = protocol;
        o.aggregation = aggregation;
        return o;
    }
};

inline Protocol parse_protocol(const std::string& s) {
    if (s == "leakfree") return Protocol::leakfree;
    if (s == "paper") return Protocol::paper;
    throw UsageError("unknown protocol '" + s + "' (leakfree, paper)");
}

inline Aggregation parse_aggregation(const std::string& s) {
    if (s == "pooled") return Aggregation::pooled;
    if (s == "fold_mean" || s == "fold-mean") return Aggregation::fold_mean;
    throw UsageError("unknown aggregation '" + s + "' (pooled, fold_mean)");
}

namespace config_detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw UsageError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError(where + ": key '" + key + "' has the wrong type");
    }
}

inline std::size_t get_count(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) throw UsageError(where + ": key '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

} // namespace config_detail

/// Parses a run config. Every key is optional; unknown keys are rejected.
inline RunConfig parse_run_config(const std::string& text, const std::string& where = "config") {
    using namespace config_detail;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(where + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError(where + ": top level must be an object");
    reject_unknown(j,
                   {"seed", "cv_k", "cluster_k", "smote", "smote_k", "stratified", "kmeans_restarts",
                    "standardize_clustering", "protocol", "aggregation", "classifiers"},
                   where);
    RunConfig c;
    if (j.contains("seed")) c.seed = get_count(j, "seed", where);
    if (j.contains("cv_k")) c.cv_k = get_count(j, "cv_k", where);
    if (j.contains("cluster_k")) c.cluster_k = get_count(j, "cluster_k", where);
    if (j.contains("smote")) c.smote = get<bool>(j, "smote", where);
    if (j.contains("smote_k")) c.smote_k = get_count(j, "smote_k", where);
    if (j.contains("stratified")) c.stratified = get<bool>(j, "stratified", where);
    if (j.contains("kmeans_restarts")) c.kmeans_restarts = get_count(j, "kmeans_restarts", where);
    if (j.contains("standardize_clustering")) c.standardize_clustering = get<bool>(j, "standardize_clustering", where);
    if (j.contains("protocol")) c.protocol = parse_protocol(get<std::string>(j, "protocol", where));
    if (j.contains("aggregation")) c.aggregation = parse_aggregation(get<std::string>(j, "aggregation", where));
    if (j.contains("classifiers")) {
        const json& list = j["classifiers"];
        if (!list.is_array() || list.empty()) throw UsageError(where + ": 'classifiers' must be a non-empty array");
        c.kinds.clear();
        c.hyperparameters.clear();
        for (const auto& entry : list) {
            if (entry.is_string()) {
                c.kinds.push_back(parse_classifier_kind(entry.get<std::string>()));
                c.hyperparameters.emplace_back();
                continue;
            }
            if (!entry.is_object()) throw UsageError(where + ": classifier entries must be strings or objects");
            reject_unknown(entry, {"kind", "params"}, where + ".classifiers");
            c.kinds.push_back(parse_classifier_kind(get<std::string>(entry, "kind", where)));
            Hyperparameters hp;
            if (entry.contains("params")) {
                const json& params = entry["params"];
                if (!params.is_object()) throw UsageError(where + ": 'params' must be an object");
                for (const auto& [key, value] : params.items()) {
                    if (!value.is_number()) throw UsageError(where + ": hyperparameter '" + key + "' must be a number");
                    hp[key] = value.get<double>();
                }
            }
            c.hyperparameters.push_back(std::move(hp));
        }
    }
    if (c.cv_k < 2) throw UsageError(where + ": cv_k must be >= 2");
    if (c.cluster_k < 1) throw UsageError(where + ": cluster_k must be >= 1");
    if (c.smote_k < 1) throw UsageError(where + ": smote_k must be >= 1");
    if (c.kmeans_restarts < 1) throw UsageError(where + ": kmeans_restarts must be >= 1");
    c.specs();  // validates hyperparameter keys
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.string());
}

} // namespace droidlens::cli
