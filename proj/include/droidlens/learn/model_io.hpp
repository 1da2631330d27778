#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "droidlens/core/error.hpp"
#include "droidlens/dataset/csv.hpp"
#include "droidlens/learn/classifier.hpp"

namespace droidlens {

inline constexpr const char* kModelFormat = "droidlens-model";
inline constexpr int kModelFormatVersion = 1;

namespace model_io_detail {

using nlohmann::json;

inline json standardizer_to_json(const Standardizer& s) {
    return {{"mean", s.mean}, {"scale", s.scale}, {"active", s.active}};
}

inline Standardizer standardizer_from_json(const json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    s.active = j.at("active").get<std::vector<std::size_t>>();
    for (std::size_t a : s.active) {
        if (a >= s.mean.size() || a >= s.scale.size() || !(s.scale[a] > 0.0)) throw DataError("model: bad standardizer");
    }
    return s;
}

inline json tree_to_json(const TreeModel& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, to_int(n.label)});
    return nodes;
}

inline TreeModel tree_from_json(const json& j, std::size_t dims) {
    TreeModel t;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.label = label_from_int(n.at(4).get<int>());
        t.nodes.push_back(node);
    }
    // Children must point forward so every path ends at a leaf.
    if (t.nodes.empty()) throw DataError("model: empty tree");
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& n = t.nodes[i];
        if (n.feature < 0) continue;
        const auto size = static_cast<int>(t.nodes.size());
        if (static_cast<std::size_t>(n.feature) >= dims || n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
            n.left >= size || n.right >= size) {
            throw DataError("model: malformed tree node " + std::to_string(i));
        }
    }
    return t;
}

} // namespace model_io_detail

/// Versioned JSON document: format tag, version, kind, dims, constant flag
/// and a kind-specific parameter block.
inline std::string serialize_model(const ClassifierModel& m) {
    using nlohmann::json;
    using namespace model_io_detail;
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelFormatVersion;
    j["kind"] = std::string(to_string(m.kind));
    j["dims"] = m.dims;
    j["constant"] = m.constant ? json(to_int(*m.constant)) : json(nullptr);
    json p = json::object();
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, LogisticModel> || std::is_same_v<T, LinearSvmModel>) {
                p = {{"standardizer", standardizer_to_json(v.standardizer)}, {"weights", v.weights}, {"bias", v.bias}};
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                p = {{"log_prior", v.log_prior}, {"mean", v.mean}, {"variance", v.variance}, {"epsilon", v.epsilon}};
            } else if constexpr (std::is_same_v<T, TreeModel>) {
                p = {{"nodes", tree_to_json(v)}};
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                json trees = json::array();
                for (const auto& t : v.trees) trees.push_back(tree_to_json(t));
                p = {{"max_features", v.max_features}, {"trees", trees}};
            }
        },
        m.params);
    j["params"] = p;
    return j.dump(1) + "\n";
}

inline ClassifierModel deserialize_model(const std::string& text) {
    using nlohmann::json;
    using namespace model_io_detail;
    try {
        const json j = json::parse(text);
        if (j.at("format") != kModelFormat) throw DataError("model: unknown format tag");
        if (j.at("version") != kModelFormatVersion) {
            throw DataError("model: unsupported version " + j.at("version").dump());
        }
        ClassifierModel m;
        m.kind = parse_classifier_kind(j.at("kind").get<std::string>());
        m.dims = j.at("dims").get<std::size_t>();
        if (!j.at("constant").is_null()) {
            m.constant = label_from_int(j.at("constant").get<int>());
            return m;
        }
        const json& p = j.at("params");
        auto check_linear = [&](const Standardizer& s, const std::vector<double>& w) {
            if (s.mean.size() != m.dims || w.size() != s.active.size()) throw DataError("model: linear block size mismatch");
        };
        switch (m.kind) {
        case ClassifierKind::logistic_regression: {
            LogisticModel v;
            v.standardizer = standardizer_from_json(p.at("standardizer"));
            v.weights = p.at("weights").get<std::vector<double>>();
            v.bias = p.at("bias").get<double>();
            check_linear(v.standardizer, v.weights);
            m.params = std::move(v);
            break;
        }
        case ClassifierKind::linear_svm: {
            LinearSvmModel v;
            v.standardizer = standardizer_from_json(p.at("standardizer"));
            v.weights = p.at("weights").get<std::vector<double>>();
            v.bias = p.at("bias").get<double>();
            check_linear(v.standardizer, v.weights);
            m.params = std::move(v);
            break;
        }
        case ClassifierKind::gaussian_nb: {
            NaiveBayesModel v;
            v.log_prior = p.at("log_prior").get<std::array<double, 2>>();
            v.mean = p.at("mean").get<std::array<std::vector<double>, 2>>();
            v.variance = p.at("variance").get<std::array<std::vector<double>, 2>>();
            v.epsilon = p.at("epsilon").get<double>();
            for (int c = 0; c < 2; ++c) {
                if (v.mean[c].size() != m.dims || v.variance[c].size() != m.dims) throw DataError("model: NB size mismatch");
            }
            m.params = std::move(v);
            break;
        }
        case ClassifierKind::decision_tree:
            m.params = tree_from_json(p.at("nodes"), m.dims);
            break;
        case ClassifierKind::random_forest: {
            ForestModel v;
            v.max_features = p.at("max_features").get<std::size_t>();
            for (const auto& t : p.at("trees")) v.trees.push_back(tree_from_json(t, m.dims));
            if (v.trees.empty()) throw DataError("model: forest without trees");
            m.params = std::move(v);
            break;
        }
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("model: ") + e.what());
    }
}

inline void save_model(const ClassifierModel& m, const std::filesystem::path& path) {
    write_file_atomically(path, serialize_model(m));
}

inline ClassifierModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

} // namespace droidlens
