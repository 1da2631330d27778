#pragma once

#include <cstddef>
#include <map>
#include <vector>

namespace droidlens {

inline constexpr int kNoise = -1;

/// Cluster id per row; kNoise marks DBSCAN noise. `k` counts non-noise clusters.
struct Assignment {
    std::vector<int> labels;
    std::size_t k = 0;

    std::size_t noise_count() const noexcept {
        std::size_t n = 0;
        for (int l : labels) n += (l == kNoise);
        return n;
    }

    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> sizes(k, 0);
        for (int l : labels) {
            if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
        }
        return sizes;
    }

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Renumbers clusters by order of first appearance; noise stays noise.
inline Assignment canonical_relabel(const std::vector<int>& labels) {
    std::map<int, int> remap;
    Assignment out;
    out.labels.reserve(labels.size());
    for (int l : labels) {
        if (l == kNoise) {
            out.labels.push_back(kNoise);
            continue;
        }
        auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
        out.labels.push_back(it->second);
    }
    out.k = remap.size();
    return out;
}

} // namespace droidlens
