#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "droidlens/core/error.hpp"
#include "droidlens/core/random.hpp"
#include "droidlens/dataset/dataset.hpp"

namespace droidlens {

/// base + u * (neighbor - base)
inline std::vector<double> smote_interpolate(std::span<const double> base, std::span<const double> neighbor, double u) {
    std::vector<double> out(base.size());
    for (std::size_t j = 0; j < base.size(); ++j) out[j] = base[j] + u * (neighbor[j] - base[j]);
    return out;
}

/// Oversamples the minority class up to the majority count. Each synthetic
/// row interpolates a random minority row toward one of its k nearest
/// minority neighbours. Original rows keep their order; synthetics follow.
inline Dataset smote_balance(const Dataset& ds, std::size_t k_neighbors, std::uint64_t seed) {
    const std::size_t n_malware = ds.count(Label::malware);
    const std::size_t n_benign = ds.size() - n_malware;
    if (n_malware == n_benign) return ds;
    const Label minority = n_malware < n_benign ? Label::malware : Label::benign;
    const std::size_t minority_count = std::min(n_malware, n_benign);
    if (minority_count < 2) {
        throw InvalidArgument("smote_balance: minority class has " + std::to_string(minority_count) +
                              " rows, need at least 2");
    }
    if (k_neighbors < 1) throw InvalidArgument("smote_balance: k_neighbors must be >= 1");
    const std::size_t k = std::min(k_neighbors, minority_count - 1);

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] == minority) rows.push_back(i);
    }

    // k nearest minority neighbours of every minority row, ties to lower row.
    std::vector<std::vector<std::size_t>> neighbors(rows.size());
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t a = 0; a < rows.size(); ++a) {
        cand.clear();
        for (std::size_t b = 0; b < rows.size(); ++b) {
            if (a != b) cand.emplace_back(squared_distance(ds.features.row(rows[a]), ds.features.row(rows[b])), b);
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        for (std::size_t t = 0; t < k; ++t) neighbors[a].push_back(cand[t].second);
    }

    Dataset out = ds;
    Rng rng(seed);
    const std::size_t needed = std::max(n_malware, n_benign) - minority_count;
    for (std::size_t s = 0; s < needed; ++s) {
        const std::size_t a = rng.index(rows.size());
        const std::size_t b = neighbors[a][rng.index(k)];
        const double u = rng.uniform();
        const auto synthetic = smote_interpolate(ds.features.row(rows[a]), ds.features.row(rows[b]), u);
        out.add(ds.ids[rows[a]] + "~smote" + std::to_string(s), synthetic, minority);
    }
    return out;
}

} // namespace droidlens
