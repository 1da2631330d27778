#pragma once

#include <cmath>
#include <thread>
#include <vector>

#include "droidlens/core/random.hpp"
#include "droidlens/dataset/dataset.hpp"
#include "droidlens/learn/classifier_spec.hpp"
#include "droidlens/learn/decision_tree.hpp"

namespace droidlens {

struct ForestModel {
    std::vector<TreeModel> trees;
    std::size_t max_features = 0;
};

inline std::size_t default_max_features(std::size_t d) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
}

/// Bagged CART trees with per-split feature sampling. Tree t draws its
/// bootstrap and feature samples from its own stream derived from
/// (seed, t), so the forest is the same for any n_jobs.
inline ForestModel fit_random_forest(const ClassifierSpec& spec, const Dataset& ds) {
    const std::size_t n_trees = spec.count_param("n_trees");
    const std::size_t jobs = std::max<std::size_t>(1, spec.count_param("n_jobs"));
    const std::size_t n = ds.size();

    ForestModel forest;
    forest.max_features = spec.count_param("max_features");
    if (forest.max_features == 0) forest.max_features = default_max_features(ds.dims());

    TreeOptions opt;
    opt.min_samples_split = spec.count_param("min_samples_split");
    opt.max_depth = spec.count_param("max_depth");
    opt.max_features = forest.max_features;

    forest.trees.resize(n_trees);
    auto grow = [&](std::size_t t) {
        Rng rng(derive_seed(spec.seed, {t}));
        std::vector<std::size_t> rows(n);
        for (auto& r : rows) r = rng.index(n);
        forest.trees[t] = grow_tree(ds.features, ds.labels, std::move(rows), opt, &rng);
    };
    if (jobs == 1) {
        for (std::size_t t = 0; t < n_trees; ++t) grow(t);
    } else {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t t = w; t < n_trees; t += jobs) grow(t);
            });
        }
    }
    return forest;
}

/// Majority vote; a tied vote goes to benign.
inline Label predict_forest(const ForestModel& forest, std::span<const double> x) {
    std::size_t votes = 0;
    for (const auto& tree : forest.trees) votes += predict_tree(tree, x) == Label::malware;
    return 2 * votes > forest.trees.size() ? Label::malware : Label::benign;
}

} // namespace droidlens
