#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "droidlens/clustering/assignment.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/core/matrix.hpp"

namespace droidlens {

namespace validity_detail {

/// Dense 0..k-1 ids for the labels present, in order of first appearance.
inline std::vector<std::size_t> dense_ids(const std::vector<int>& labels, std::size_t& k) {
    std::map<int, std::size_t> remap;
    std::vector<std::size_t> ids(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ids[i] = remap.try_emplace(labels[i], remap.size()).first->second;
    }
    k = remap.size();
    return ids;
}

} // namespace validity_detail

/// Between- over within-cluster dispersion, each divided by its degrees of
/// freedom. Returns +infinity when the within-cluster dispersion is zero,
/// which includes n == k (all singletons).
inline double calinski_harabasz(const Matrix& x, const Assignment& a) {
    const std::size_t n = x.rows();
    if (a.labels.size() != n) throw InvalidArgument("calinski_harabasz: label count differs from row count");
    for (int l : a.labels) {
        if (l < 0) throw InvalidArgument("calinski_harabasz: noise labels must be filtered first");
    }
    std::size_t k = 0;
    const auto ids = validity_detail::dense_ids(a.labels, k);
    if (k < 2) throw InvalidArgument("calinski_harabasz: needs at least 2 clusters");

    const std::size_t d = x.cols();
    const auto mean = column_means(x);
    Matrix centers(k, d, 0.0);
    std::vector<std::size_t> size(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++size[ids[i]];
        auto c = centers.row(ids[i]);
        const auto xi = x.row(i);
        for (std::size_t j = 0; j < d; ++j) c[j] += xi[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (double& v : centers.row(c)) v /= static_cast<double>(size[c]);
    }
    double between = 0.0;
    for (std::size_t c = 0; c < k; ++c) between += static_cast<double>(size[c]) * squared_distance(centers.row(c), mean);
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) within += squared_distance(x.row(i), centers.row(ids[i]));
    if (within == 0.0) return std::numeric_limits<double>::infinity();
    return (between / static_cast<double>(k - 1)) / (within / static_cast<double>(n - k));
}

struct SilhouetteResult {
    double score = 0.0;
    double excluded_fraction = 0.0;  // noise rows left out
};

/// Mean silhouette over non-noise rows, exact O(n^2). Rows in singleton
/// clusters contribute 0.
inline SilhouetteResult silhouette(const Matrix& x, const Assignment& a) {
    if (a.labels.size() != x.rows()) throw InvalidArgument("silhouette: label count differs from row count");
    std::vector<std::size_t> rows;
    std::vector<int> kept;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (a.labels[i] != kNoise) {
            rows.push_back(i);
            kept.push_back(a.labels[i]);
        }
    }
    SilhouetteResult result;
    result.excluded_fraction =
        x.rows() ? static_cast<double>(x.rows() - rows.size()) / static_cast<double>(x.rows()) : 0.0;
    std::size_t k = 0;
    const auto ids = validity_detail::dense_ids(kept, k);
    const std::size_t n = rows.size();
    if (k < 2) throw InvalidArgument("silhouette: needs at least 2 clusters after noise exclusion");
    if (k >= n) throw InvalidArgument("silhouette: every point is in its own cluster");

    std::vector<std::size_t> size(k, 0);
    for (std::size_t id : ids) ++size[id];

    double total = 0.0;
    std::vector<double> sums(k);
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t own = ids[p];
        if (size[own] == 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        const auto xp = x.row(rows[p]);
        for (std::size_t q = 0; q < n; ++q) {
            if (q != p) sums[ids[q]] += euclidean_distance(xp, x.row(rows[q]));
        }
        const double a_p = sums[own] / static_cast<double>(size[own] - 1);
        double b_p = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c != own) b_p = std::min(b_p, sums[c] / static_cast<double>(size[c]));
        }
        const double denom = std::max(a_p, b_p);
        total += denom > 0.0 ? (b_p - a_p) / denom : 0.0;
    }
    result.score = total / static_cast<double>(n);
    return result;
}

} // namespace droidlens
