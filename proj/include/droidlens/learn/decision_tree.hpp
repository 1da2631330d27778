#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "droidlens/core/matrix.hpp"
#include "droidlens/core/random.hpp"
#include "droidlens/dataset/dataset.hpp"
#include "droidlens/learn/classifier_spec.hpp"

namespace droidlens {

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;     // taken when x[feature] <= threshold
    int right = -1;
    Label label = Label::benign;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Flat binary tree; node 0 is the root.
struct TreeModel {
    std::vector<TreeNode> nodes;

    friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

struct TreeOptions {
    std::size_t min_samples_split = 2;
    std::size_t max_depth = 0;     // 0 = unlimited
    std::size_t max_features = 0;  // 0 = all features, in index order
};

namespace tree_detail {

inline double gini(std::size_t n0, std::size_t n1) {
    const double n = static_cast<double>(n0 + n1);
    if (n == 0.0) return 0.0;
    const double p0 = static_cast<double>(n0) / n, p1 = static_cast<double>(n1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

inline Label majority(std::size_t n0, std::size_t n1) { return n1 > n0 ? Label::malware : Label::benign; }

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = -std::numeric_limits<double>::infinity();
};

/// Best Gini split on one feature; nullopt when the feature is constant here.
/// Thresholds are midpoints of consecutive distinct values, scanned upward.
inline std::optional<Split> best_split_on(const Matrix& x, const std::vector<Label>& y,
                                          std::span<const std::size_t> rows, std::size_t f, double parent,
                                          std::size_t n0, std::size_t n1,
                                          std::vector<std::pair<double, int>>& scratch) {
    scratch.clear();
    for (std::size_t r : rows) scratch.emplace_back(x(r, f), to_int(y[r]));
    std::sort(scratch.begin(), scratch.end());
    if (scratch.front().first == scratch.back().first) return std::nullopt;
    const std::size_t n = rows.size();
    std::size_t l0 = 0, l1 = 0;
    std::optional<Split> best;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        (scratch[i].second ? l1 : l0) += 1;
        const double a = scratch[i].first, b = scratch[i + 1].first;
        if (a == b) continue;
        double threshold = a + (b - a) / 2.0;
        if (threshold >= b) threshold = a;
        const std::size_t nl = i + 1, nr = n - nl;
        const double child = (static_cast<double>(nl) * gini(l0, l1) + static_cast<double>(nr) * gini(n0 - l0, n1 - l1)) /
                             static_cast<double>(n);
        const double decrease = parent - child;
        if (!best || decrease > best->decrease) best = Split{f, threshold, decrease};
    }
    return best;
}

} // namespace tree_detail

/// CART on Gini impurity, grown until nodes are pure (or the limits bite).
/// When max_features > 0 each node samples that many features from `rng`,
/// drawing further ones only if none of the sample can split the node.
/// Ties go to the lowest feature index, then the lowest threshold.
inline TreeModel grow_tree(const Matrix& x, const std::vector<Label>& y, std::vector<std::size_t> rows,
                           const TreeOptions& opt, Rng* rng = nullptr) {
    using namespace tree_detail;
    const std::size_t d = x.cols();
    TreeModel tree;
    struct Pending {
        int node;
        std::size_t begin, end, depth;
    };
    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, rows.size(), 0});

    std::vector<std::pair<double, int>> scratch;
    std::vector<std::size_t> features(d);

    while (!stack.empty()) {
        const Pending job = stack.back();
        stack.pop_back();
        const std::span<std::size_t> node_rows(rows.data() + job.begin, job.end - job.begin);
        std::size_t n0 = 0, n1 = 0;
        for (std::size_t r : node_rows) (y[r] == Label::malware ? n1 : n0) += 1;
        tree.nodes[job.node].label = majority(n0, n1);

        const bool pure = n0 == 0 || n1 == 0;
        const bool depth_capped = opt.max_depth > 0 && job.depth >= opt.max_depth;
        if (pure || depth_capped || node_rows.size() < opt.min_samples_split) continue;

        const double parent = gini(n0, n1);
        std::optional<Split> best;
        auto consider = [&](std::size_t f) {
            auto s = best_split_on(x, y, node_rows, f, parent, n0, n1, scratch);
            if (s && (!best || s->decrease > best->decrease ||
                      (s->decrease == best->decrease && s->feature < best->feature))) {
                best = s;
            }
        };
        if (opt.max_features == 0 || opt.max_features >= d || rng == nullptr) {
            for (std::size_t f = 0; f < d; ++f) consider(f);
        } else {
            std::iota(features.begin(), features.end(), 0);
            for (std::size_t i = 0; i < opt.max_features; ++i) std::swap(features[i], features[i + rng->index(d - i)]);
            std::vector<std::size_t> sample(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(opt.max_features));
            std::sort(sample.begin(), sample.end());
            for (std::size_t f : sample) consider(f);
            for (std::size_t i = opt.max_features; i < d && !best; ++i) {
                std::swap(features[i], features[i + rng->index(d - i)]);
                consider(features[i]);
            }
        }
        if (!best) continue;

        const auto mid = std::partition(node_rows.begin(), node_rows.end(),
                                        [&](std::size_t r) { return x(r, best->feature) <= best->threshold; });
        const std::size_t split_at = job.begin + static_cast<std::size_t>(mid - node_rows.begin());
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        TreeNode& node = tree.nodes[job.node];
        node.feature = static_cast<int>(best->feature);
        node.threshold = best->threshold;
        node.left = left;
        node.right = left + 1;
        stack.push_back({left + 1, split_at, job.end, job.depth + 1});
        stack.push_back({left, job.begin, split_at, job.depth + 1});
    }
    return tree;
}

inline Label predict_tree(const TreeModel& tree, std::span<const double> x) {
    std::size_t i = 0;
    while (tree.nodes[i].feature >= 0) {
        const TreeNode& n = tree.nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return tree.nodes[i].label;
}

inline std::size_t tree_depth(const TreeModel& tree, std::size_t node = 0) {
    const TreeNode& n = tree.nodes[node];
    if (n.feature < 0) return 0;
    return 1 + std::max(tree_depth(tree, static_cast<std::size_t>(n.left)), tree_depth(tree, static_cast<std::size_t>(n.right)));
}

inline TreeModel fit_decision_tree(const ClassifierSpec& spec, const Dataset& ds) {
    TreeOptions opt;
    opt.min_samples_split = spec.count_param("min_samples_split");
    opt.max_depth = spec.count_param("max_depth");
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), 0);
    return grow_tree(ds.features, ds.labels, std::move(rows), opt);
}

} // namespace droidlens
