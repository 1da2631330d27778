#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "droidlens/core/random.hpp"
#include "droidlens/dataset/dataset.hpp"
#include "droidlens/dataset/synth.hpp"

namespace testsupport {

using droidlens::Dataset;
using droidlens::Label;

inline std::vector<double> filled(std::size_t d, double v) { return std::vector<double>(d, v); }

/// Two well-separated blobs, benign around 20 and malware around 80 on every column.
inline Dataset two_blobs(std::size_t per_blob, double sigma, std::uint64_t seed, std::size_t d = 8) {
    droidlens::BlobSpec spec;
    spec.centers = {filled(d, 20.0), filled(d, 80.0)};
    spec.labels = {Label::benign, Label::malware};
    spec.per_center_count = per_blob;
    spec.noise_sigma = sigma;
    return droidlens::synth_blobs(spec, seed);
}

/// Two regions 1000 apart on column 0. Within each region the classes sit
/// 20 apart on column 1, with the orientation flipped between regions, so no
/// single hyperplane separates the classes but each region is separable.
inline Dataset four_blobs(std::size_t per_blob, std::uint64_t seed, std::size_t d = 256) {
    droidlens::BlobSpec spec;
    auto center = [&](double region, double side) {
        auto c = filled(d, 50.0);
        c[0] = 50.0 + region;
        c[1] = side;
        return c;
    };
    spec.centers = {center(0, 40), center(0, 60), center(1000, 40), center(1000, 60)};
    spec.labels = {Label::benign, Label::malware, Label::malware, Label::benign};
    spec.per_center_count = per_blob;
    spec.noise_sigma = 2.0;
    return droidlens::synth_blobs(spec, seed);
}

/// 60/40 benign/malware blobs that overlap slightly; `flip` of the labels
/// are then inverted at random.
inline Dataset classifier_blobs(std::uint64_t seed, double flip, std::size_t d = 16) {
    droidlens::BlobSpec benign;
    benign.centers = {filled(d, 40.0)};
    benign.labels = {Label::benign};
    benign.per_center_count = 120;
    benign.noise_sigma = 6.0;
    droidlens::BlobSpec malware = benign;
    malware.centers = {filled(d, 50.0)};
    malware.labels = {Label::malware};
    malware.per_center_count = 80;
    Dataset ds = droidlens::synth_blobs(benign, droidlens::derive_seed(seed, {1}));
    const Dataset m = droidlens::synth_blobs(malware, droidlens::derive_seed(seed, {2}));
    for (std::size_t i = 0; i < m.size(); ++i) ds.add("m" + m.ids[i], m.features.row(i), m.labels[i]);
    droidlens::Rng rng(droidlens::derive_seed(seed, {3}));
    for (auto& l : ds.labels) {
        if (rng.uniform() < flip) l = l == Label::malware ? Label::benign : Label::malware;
    }
    return ds;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("droidlens_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testsupport
