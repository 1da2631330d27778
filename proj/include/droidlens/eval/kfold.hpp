#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "droidlens/core/error.hpp"
#include "droidlens/core/random.hpp"
#include "droidlens/dataset/dataset.hpp"

namespace droidlens {

struct Folds {
    std::vector<std::vector<std::size_t>> folds;  // row indices, ascending within a fold
    bool stratified = false;
    std::optional<std::string> warning;

    /// Every row not in fold `f`, ascending.
    std::vector<std::size_t> training_rows(std::size_t f) const {
        std::vector<std::size_t> rows;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g != f) rows.insert(rows.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(rows.begin(), rows.end());
        return rows;
    }
};

/// Seeded k-fold split. Rows are shuffled (per class when stratified), laid
/// end to end and dealt round-robin, so fold sizes and per-class counts each
/// differ by at most one. Stratification needs every class to have at least
/// k rows; otherwise a plain split is returned with a warning.
inline Folds kfold_indices(const std::vector<Label>& labels, std::size_t k, std::uint64_t seed, bool stratified = true) {
    const std::size_t n = labels.size();
    if (k < 2) throw InvalidArgument("kfold: k must be >= 2");
    if (k > n) throw InvalidArgument("kfold: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));

    Folds result;
    result.folds.resize(k);
    Rng rng(seed);
    std::vector<std::size_t> order;
    if (stratified) {
        std::vector<std::size_t> by_class[2];
        for (std::size_t i = 0; i < n; ++i) by_class[to_int(labels[i])].push_back(i);
        const std::size_t smallest = std::min(by_class[0].size(), by_class[1].size());
        if (smallest < k) {
            stratified = false;
            result.warning = "stratified k-fold needs >= " + std::to_string(k) +
                             " rows per class; smallest class has " + std::to_string(smallest) +
                             "; using an unstratified split";
        } else {
            for (auto& rows : by_class) {
                rng.shuffle(rows);
                order.insert(order.end(), rows.begin(), rows.end());
            }
        }
    }
    if (!stratified) {
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
    }
    result.stratified = stratified;
    for (std::size_t p = 0; p < n; ++p) result.folds[p % k].push_back(order[p]);
    for (auto& f : result.folds) std::sort(f.begin(), f.end());
    return result;
}

} // namespace droidlens
