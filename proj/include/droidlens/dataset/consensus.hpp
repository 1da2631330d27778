#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "droidlens/core/error.hpp"
#include "droidlens/dataset/dataset.hpp"

namespace droidlens {

/// Per-engine verdicts for one sample, keyed by engine name.
struct ScanVerdicts {
    std::string file_hash;
    std::map<std::string, bool> engines;

    std::size_t detections() const noexcept {
        std::size_t n = 0;
        for (const auto& [name, detected] : engines) n += detected;
        return n;
    }
};

/// Malware iff at least `threshold` engines flag the sample. With the default
/// threshold a single detection is enough.
inline Label consensus_label(const ScanVerdicts& v, std::size_t threshold = 1) {
    if (threshold == 0) throw InvalidArgument("consensus threshold must be positive");
    if (v.engines.empty()) throw DataError("unknown label for " + v.file_hash + ": no engine verdicts");
    return v.detections() >= threshold ? Label::malware : Label::benign;
}

} // namespace droidlens
