#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "droidlens/clustering/agglomerative.hpp"
#include "droidlens/clustering/assignment.hpp"
#include "droidlens/clustering/kmeans.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/core/matrix.hpp"

namespace droidlens {

namespace birch_detail {

/// Clustering feature: (count, linear sum, sum of squared norms).
struct ClusterFeature {
    double n = 0.0;
    std::vector<double> ls;
    double ss = 0.0;

    explicit ClusterFeature(std::size_t d) : ls(d, 0.0) {}

    void add_point(std::span<const double> x) {
        n += 1.0;
        for (std::size_t j = 0; j < ls.size(); ++j) ls[j] += x[j];
        ss += std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    }

    void add(const ClusterFeature& o) {
        n += o.n;
        for (std::size_t j = 0; j < ls.size(); ++j) ls[j] += o.ls[j];
        ss += o.ss;
    }

    std::vector<double> centroid() const {
        std::vector<double> c(ls);
        for (double& v : c) v /= n;
        return c;
    }

    double distance2_to(std::span<const double> x) const {
        double s = 0.0;
        for (std::size_t j = 0; j < ls.size(); ++j) {
            const double d = ls[j] / n - x[j];
            s += d * d;
        }
        return s;
    }

    double radius_with(std::span<const double> x) const {
        const double m = n + 1.0;
        double mean2 = 0.0;
        for (std::size_t j = 0; j < ls.size(); ++j) {
            const double c = (ls[j] + x[j]) / m;
            mean2 += c * c;
        }
        const double ss2 = ss + std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
        return std::sqrt(std::max(0.0, ss2 / m - mean2));
    }
};

struct Node;

struct Entry {
    ClusterFeature cf;
    std::unique_ptr<Node> child;  // null in leaves
};

struct Node {
    bool leaf = true;
    std::vector<Entry> entries;
};

inline double centroid_distance2(const ClusterFeature& a, const ClusterFeature& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.ls.size(); ++j) {
        const double d = a.ls[j] / a.n - b.ls[j] / b.n;
        s += d * d;
    }
    return s;
}

inline ClusterFeature summarize(const Node& node, std::size_t d) {
    ClusterFeature cf(d);
    for (const auto& e : node.entries) cf.add(e.cf);
    return cf;
}

class Tree {
public:
    Tree(std::size_t dims, double threshold, std::size_t branching)
        : dims_(dims), threshold_(threshold), branching_(branching), root_(std::make_unique<Node>()) {}

    void insert(std::span<const double> x) {
        if (auto sibling = insert_into(*root_, x)) {
            auto old = std::move(root_);
            root_ = std::make_unique<Node>();
            root_->leaf = false;
            ClusterFeature left = summarize(*old, dims_);
            ClusterFeature right = summarize(**sibling, dims_);
            root_->entries.push_back(Entry{std::move(left), std::move(old)});
            root_->entries.push_back(Entry{std::move(right), std::move(*sibling)});
        }
    }

    /// Leaf entries in left-to-right order.
    std::vector<const ClusterFeature*> leaf_entries() const {
        std::vector<const ClusterFeature*> out;
        collect(*root_, out);
        return out;
    }

private:
    static void collect(const Node& node, std::vector<const ClusterFeature*>& out) {
        for (const auto& e : node.entries) {
            if (node.leaf) {
                out.push_back(&e.cf);
            } else {
                collect(*e.child, out);
            }
        }
    }

    static std::size_t closest(const Node& node, std::span<const double> x) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < node.entries.size(); ++i) {
            const double d = node.entries[i].cf.distance2_to(x);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

    std::optional<std::unique_ptr<Node>> insert_into(Node& node, std::span<const double> x) {
        if (node.leaf) {
            if (!node.entries.empty()) {
                Entry& e = node.entries[closest(node, x)];
                if (e.cf.radius_with(x) <= threshold_) {
                    e.cf.add_point(x);
                    return std::nullopt;
                }
            }
            ClusterFeature cf(dims_);
            cf.add_point(x);
            node.entries.push_back(Entry{std::move(cf), nullptr});
        } else {
            Entry& e = node.entries[closest(node, x)];
            auto sibling = insert_into(*e.child, x);
            if (sibling) {
                e.cf = summarize(*e.child, dims_);
                ClusterFeature cf = summarize(**sibling, dims_);
                node.entries.push_back(Entry{std::move(cf), std::move(*sibling)});
            } else {
                e.cf.add_point(x);
            }
        }
        if (node.entries.size() > branching_) return split(node);
        return std::nullopt;
    }

    // Farthest pair of entries seeds the two halves.
    std::unique_ptr<Node> split(Node& node) {
        const std::size_t m = node.entries.size();
        std::size_t s1 = 0, s2 = 1;
        double far = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                const double d = centroid_distance2(node.entries[i].cf, node.entries[j].cf);
                if (d > far) {
                    far = d;
                    s1 = i;
                    s2 = j;
                }
            }
        }
        auto sibling = std::make_unique<Node>();
        sibling->leaf = node.leaf;
        std::vector<Entry> keep;
        std::vector<Entry> entries = std::move(node.entries);
        for (std::size_t i = 0; i < m; ++i) {
            const bool to_sibling =
                i == s2 || (i != s1 && centroid_distance2(entries[i].cf, entries[s2].cf) <
                                           centroid_distance2(entries[i].cf, entries[s1].cf));
            (to_sibling ? sibling->entries : keep).push_back(std::move(entries[i]));
        }
        node.entries = std::move(keep);
        return sibling;
    }

    std::size_t dims_;
    double threshold_;
    std::size_t branching_;
    std::unique_ptr<Node> root_;
};

} // namespace birch_detail

/// 0.05 x the largest distance from any point to the global centroid, so the
/// threshold scales with raw counts.
inline double birch_default_threshold(const Matrix& x, double fraction = 0.05) {
    const auto mean = column_means(x);
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) r2 = std::max(r2, squared_distance(x.row(i), mean));
    return std::max(fraction * std::sqrt(r2), std::numeric_limits<double>::min());
}

/// Single-pass CF-tree summary, ward agglomeration of the leaf-entry
/// centroids down to k, then every point goes to its nearest final centroid.
inline Assignment birch(const Matrix& x, std::size_t k, double threshold, std::size_t branching = 50) {
    if (!(threshold > 0.0)) throw InvalidArgument("birch: threshold must be > 0");
    if (branching < 2) throw InvalidArgument("birch: branching must be >= 2");
    if (k < 1) throw InvalidArgument("birch: k must be >= 1");
    require_finite(x, "birch");

    birch_detail::Tree tree(x.cols(), threshold, branching);
    for (std::size_t i = 0; i < x.rows(); ++i) tree.insert(x.row(i));
    const auto leaves = tree.leaf_entries();
    if (k > leaves.size()) {
        throw InvalidArgument("birch: k = " + std::to_string(k) + " exceeds the " + std::to_string(leaves.size()) +
                              " leaf entries; lower the threshold");
    }

    Matrix centers(0, x.cols());
    for (const auto* cf : leaves) centers.append_row(cf->centroid());
    const Assignment groups = agglomerative(centers, k, Linkage::ward);

    Matrix final_centers(k, x.cols(), 0.0);
    std::vector<double> weight(k, 0.0);
    for (std::size_t e = 0; e < leaves.size(); ++e) {
        const auto g = static_cast<std::size_t>(groups.labels[e]);
        weight[g] += leaves[e]->n;
        auto dst = final_centers.row(g);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] += leaves[e]->ls[j];
    }
    for (std::size_t g = 0; g < k; ++g) {
        for (double& v : final_centers.row(g)) v /= weight[g];
    }

    std::vector<int> raw(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) raw[i] = static_cast<int>(nearest_centroid(x.row(i), final_centers));
    return canonical_relabel(raw);
}

} // namespace droidlens
