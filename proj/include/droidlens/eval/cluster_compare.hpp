#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "droidlens/clustering/agglomerative.hpp"
#include "droidlens/clustering/birch.hpp"
#include "droidlens/clustering/dbscan.hpp"
#include "droidlens/clustering/gmm.hpp"
#include "droidlens/clustering/kmeans.hpp"
#include "droidlens/clustering/validity.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/core/random.hpp"
#include "droidlens/dataset/csv.hpp"

namespace droidlens {

struct ClusterCompareConfig {
    std::vector<std::size_t> ks{2, 3, 4, 5};
    std::vector<double> eps{5000, 10000, 15000, 20000};
    std::size_t min_pts = 5;
    Linkage linkage = Linkage::ward;
    std::optional<double> birch_threshold;  // default: 0.05 x data radius
    std::size_t birch_branching = 50;
    std::size_t kmeans_restarts = 10;
    GmmOptions gmm;
};

struct ComparisonRow {
    std::string algorithm;
    std::string parameter;  // "k=2", "eps=5000"
    std::size_t n_clusters = 0;
    std::optional<double> calinski_harabasz;
    std::optional<double> silhouette;
    double noise_fraction = 0.0;
    std::string note;
    bool winner = false;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;

    const ComparisonRow* winner() const {
        for (const auto& r : rows) {
            if (r.winner) return &r;
        }
        return nullptr;
    }
};

namespace compare_detail {

inline void score(const Matrix& x, const Assignment& a, ComparisonRow& row) {
    row.n_clusters = a.k;
    row.noise_fraction = x.rows() ? static_cast<double>(a.noise_count()) / static_cast<double>(x.rows()) : 0.0;
    std::vector<std::size_t> kept;
    std::vector<int> labels;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        if (a.labels[i] != kNoise) {
            kept.push_back(i);
            labels.push_back(a.labels[i]);
        }
    }
    const Matrix xs = x.select_rows(kept);
    const Assignment filtered = canonical_relabel(labels);
    row.n_clusters = filtered.k;
    try {
        row.calinski_harabasz = calinski_harabasz(xs, filtered);
    } catch (const InvalidArgument& e) {
        row.note = e.what();
    }
    try {
        row.silhouette = silhouette(x, a).score;
    } catch (const InvalidArgument& e) {
        if (row.note.empty()) row.note = e.what();
    }
}

inline std::string format_param(double v) { return format_real(v); }

} // namespace compare_detail

/// Runs the five algorithms over their parameter grids and scores every run
/// with Calinski-Harabasz and silhouette. The winner is the row with the
/// highest Calinski-Harabasz, ties to the higher silhouette.
inline ComparisonTable compare_clusterings(const Matrix& x, const ClusterCompareConfig& cfg, std::uint64_t seed) {
    if (cfg.ks.empty() && cfg.eps.empty()) throw InvalidArgument("compare_clusterings: empty parameter grids");
    require_finite(x, "compare_clusterings");
    ComparisonTable table;
    auto run = [&](const std::string& algorithm, const std::string& parameter, auto&& cluster) {
        ComparisonRow row;
        row.algorithm = algorithm;
        row.parameter = parameter;
        try {
            compare_detail::score(x, cluster(), row);
        } catch (const InvalidArgument& e) {
            row.note = e.what();
        }
        table.rows.push_back(std::move(row));
    };

    for (std::size_t k : cfg.ks) {
        run("k-means", "k=" + std::to_string(k), [&] {
            KMeansOptions opt;
            opt.n_init = cfg.kmeans_restarts;
            return kmeans(x, k, derive_seed(seed, {10, k}), opt).assignment;
        });
    }
    for (std::size_t k : cfg.ks) {
        run("Agglomerative", "k=" + std::to_string(k), [&] { return agglomerative(x, k, cfg.linkage); });
    }
    const double threshold = cfg.birch_threshold ? *cfg.birch_threshold : birch_default_threshold(x);
    for (std::size_t k : cfg.ks) {
        run("BIRCH", "k=" + std::to_string(k), [&] { return birch(x, k, threshold, cfg.birch_branching); });
    }
    for (std::size_t k : cfg.ks) {
        run("Gaussian Mixture Model", "k=" + std::to_string(k),
            [&] { return gmm(x, k, derive_seed(seed, {11, k}), cfg.gmm).assignment; });
    }
    for (double eps : cfg.eps) {
        run("DBSCAN", "eps=" + compare_detail::format_param(eps), [&] { return dbscan(x, eps, cfg.min_pts); });
    }

    ComparisonRow* best = nullptr;
    for (auto& r : table.rows) {
        if (!r.calinski_harabasz) continue;
        if (!best || *r.calinski_harabasz > *best->calinski_harabasz ||
            (*r.calinski_harabasz == *best->calinski_harabasz && r.silhouette &&
             (!best->silhouette || *r.silhouette > *best->silhouette))) {
            best = &r;
        }
    }
    if (best) best->winner = true;
    return table;
}

} // namespace droidlens
