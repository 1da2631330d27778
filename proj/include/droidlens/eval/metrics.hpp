#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "droidlens/dataset/csv.hpp"
#include "droidlens/dataset/dataset.hpp"

namespace droidlens {

/// Malware is the positive class.
struct ConfusionCounts {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }

    void record(Label truth, Label predicted) noexcept {
        if (truth == Label::malware) {
            (predicted == Label::malware ? tp : fn) += 1;
        } else {
            (predicted == Label::benign ? tn : fp) += 1;
        }
    }

    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
        tp += o.tp;
        tn += o.tn;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// nullopt marks a metric whose denominator is zero.
struct Metrics {
    std::optional<double> accuracy;
    std::optional<double> tpr;
    std::optional<double> tnr;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

inline std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline Metrics metrics(const ConfusionCounts& c) {
    return {ratio(c.tp + c.tn, c.total()), ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp)};
}

inline constexpr const char* kUndefinedMarker = "NA";

/// Full-precision fraction, or the undefined marker.
inline std::string format_metric(const std::optional<double>& v) { return v ? format_real(*v) : kUndefinedMarker; }

/// Percentage with two decimals, as in the report tables.
inline std::string format_percent(const std::optional<double>& v) {
    if (!v) return kUndefinedMarker;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
    return buf;
}

} // namespace droidlens
