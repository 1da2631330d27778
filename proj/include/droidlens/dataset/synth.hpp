#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "droidlens/core/error.hpp"
#include "droidlens/core/random.hpp"
#include "droidlens/dataset/dataset.hpp"

namespace droidlens {

struct BlobSpec {
    std::vector<std::vector<double>> centers;
    std::vector<Label> labels;  // one per center
    std::size_t per_center_count = 1;
    double noise_sigma = 0.0;
};

/// Gaussian blobs around each center, clamped at zero because features are
/// counts. Rows are grouped by center; ids are `blob<c>_<i>`.
inline Dataset synth_blobs(const BlobSpec& spec, std::uint64_t seed) {
    if (spec.centers.empty()) throw InvalidArgument("synth_blobs: no centers");
    if (spec.labels.size() != spec.centers.size()) throw InvalidArgument("synth_blobs: one label per center required");
    if (spec.per_center_count < 1) throw InvalidArgument("synth_blobs: per_center_count must be >= 1");
    if (!(spec.noise_sigma >= 0.0)) throw InvalidArgument("synth_blobs: noise_sigma must be >= 0");
    const std::size_t d = spec.centers.front().size();
    for (const auto& c : spec.centers) {
        if (c.size() != d) throw InvalidArgument("synth_blobs: centers differ in dimension");
    }

    Rng rng(seed);
    Dataset ds;
    ds.features = Matrix(0, d);
    std::vector<double> row(d);
    for (std::size_t c = 0; c < spec.centers.size(); ++c) {
        for (std::size_t i = 0; i < spec.per_center_count; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
                row[j] = std::max(0.0, spec.centers[c][j] + noise);
            }
            ds.add("blob" + std::to_string(c) + "_" + std::to_string(i), row, spec.labels[c]);
        }
    }
    return ds;
}

} // namespace droidlens
