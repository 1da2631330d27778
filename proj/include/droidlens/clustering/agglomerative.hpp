#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "droidlens/clustering/assignment.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/core/matrix.hpp"

namespace droidlens {

enum class Linkage { ward, complete, average };

inline const char* to_string(Linkage l) {
    switch (l) {
    case Linkage::ward: return "ward";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
    }
    return "?";
}

inline Linkage parse_linkage(const std::string& s) {
    if (s == "ward") return Linkage::ward;
    if (s == "complete") return Linkage::complete;
    if (s == "average") return Linkage::average;
    throw UsageError("unknown linkage '" + s + "' (ward, complete, average)");
}

/// Bottom-up merging with Lance-Williams distance updates. Each cluster is
/// identified by its smallest member row; among equally close pairs the one
/// with the lowest (i, j) merges first. Output ids follow first appearance.
inline Assignment agglomerative(const Matrix& x, std::size_t k, Linkage linkage = Linkage::ward) {
    const std::size_t n = x.rows();
    if (k < 1 || k > n) {
        throw InvalidArgument("agglomerative: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
    require_finite(x, "agglomerative");

    // Ward works on squared distances, the others on plain Euclidean.
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 = squared_distance(x.row(i), x.row(j));
            dist[i * n + j] = dist[j * n + i] = linkage == Linkage::ward ? d2 : std::sqrt(d2);
        }
    }
    auto D = [&](std::size_t a, std::size_t b) -> double& { return dist[a * n + b]; };

    std::vector<std::size_t> size(n, 1);
    std::vector<bool> active(n, true);
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;

    // Cached nearest partner with a larger id, ties to the lowest id.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> nn(n, n);
    std::vector<double> nn_dist(n, kInf);
    auto refresh = [&](std::size_t i) {
        nn[i] = n;
        nn_dist[i] = kInf;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (active[j] && D(i, j) < nn_dist[i]) {
                nn_dist[i] = D(i, j);
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    for (std::size_t clusters = n; clusters > k; --clusters) {
        std::size_t a = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && nn[i] < n && (a == n || nn_dist[i] < nn_dist[a])) a = i;
        }
        const std::size_t b = nn[a];
        const double dab = D(a, b);
        const double na = static_cast<double>(size[a]);
        const double nb = static_cast<double>(size[b]);
        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m] || m == a || m == b) continue;
            const double nm = static_cast<double>(size[m]);
            double v = 0.0;
            switch (linkage) {
            case Linkage::ward:
                v = ((na + nm) * D(a, m) + (nb + nm) * D(b, m) - nm * dab) / (na + nb + nm);
                break;
            case Linkage::complete:
                v = std::max(D(a, m), D(b, m));
                break;
            case Linkage::average:
                v = (na * D(a, m) + nb * D(b, m)) / (na + nb);
                break;
            }
            D(a, m) = D(m, a) = v;
        }
        active[b] = false;
        size[a] += size[b];
        parent[b] = a;

        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m]) continue;
            if (m == a || nn[m] == a || nn[m] == b) {
                refresh(m);
            } else if (m < a && (D(m, a) < nn_dist[m] || (D(m, a) == nn_dist[m] && a < nn[m]))) {
                nn_dist[m] = D(m, a);
                nn[m] = a;
            }
        }
    }

    std::vector<int> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = i;
        while (parent[r] != r) r = parent[r];
        raw[i] = static_cast<int>(r);
    }
    return canonical_relabel(raw);
}

} // namespace droidlens
