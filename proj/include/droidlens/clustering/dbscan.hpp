#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "droidlens/clustering/assignment.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/core/matrix.hpp"

namespace droidlens {

/// Density clustering on Euclidean distance. A point is core when at least
/// `min_pts` points (itself included) lie within `eps`. Clusters are the
/// connected components of core points, numbered by their first core row.
/// A non-core point joins the cluster of its nearest core neighbour within
/// eps, ties broken by the neighbour's coordinates, so the result does not
/// depend on row order; points with no core neighbour are noise.
inline Assignment dbscan(const Matrix& x, double eps, std::size_t min_pts = 5) {
    if (!(eps > 0.0)) throw InvalidArgument("dbscan: eps must be > 0");
    if (min_pts < 1) throw InvalidArgument("dbscan: min_pts must be >= 1");
    require_finite(x, "dbscan");

    const std::size_t n = x.rows();
    const double eps2 = eps * eps;
    auto within = [&](std::size_t i, std::size_t j) { return squared_distance(x.row(i), x.row(j)) <= eps2; };

    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < n && count < min_pts; ++j) count += within(i, j);
        core[i] = count >= min_pts;
    }

    std::vector<int> labels(n, kNoise);
    int next_id = 0;
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || labels[i] != kNoise) continue;
        const int id = next_id++;
        labels[i] = id;
        queue.push_back(i);
        while (!queue.empty()) {
            const std::size_t p = queue.front();
            queue.pop_front();
            for (std::size_t q = 0; q < n; ++q) {
                if (core[q] && labels[q] == kNoise && within(p, q)) {
                    labels[q] = id;
                    queue.push_back(q);
                }
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        std::size_t best = n;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (!core[j]) continue;
            const double d = squared_distance(x.row(i), x.row(j));
            if (d > eps2) continue;
            if (d < best_d || (d == best_d && std::lexicographical_compare(x.row(j).begin(), x.row(j).end(),
                                                                           x.row(best).begin(), x.row(best).end()))) {
                best_d = d;
                best = j;
            }
        }
        if (best < n) labels[i] = labels[best];
    }

    Assignment out;
    out.labels = std::move(labels);
    out.k = static_cast<std::size_t>(next_id);
    return out;
}

} // namespace droidlens
