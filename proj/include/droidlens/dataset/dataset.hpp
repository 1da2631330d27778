#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "droidlens/core/error.hpp"
#include "droidlens/core/matrix.hpp"

namespace droidlens {

inline constexpr std::size_t kOpcodeColumns = 256;

enum class Label : int { benign = 0, malware = 1 };

constexpr int to_int(Label l) noexcept { return static_cast<int>(l); }

inline Label label_from_int(long v) {
    if (v != 0 && v != 1) throw DataError("label must be 0 or 1, got " + std::to_string(v));
    return static_cast<Label>(v);
}

/// Feature matrix with per-row ids and binary labels. Rows are samples.
/// Ingested datasets have 256 opcode columns; the learning code accepts any
/// column count.
struct Dataset {
    std::vector<std::string> ids;
    Matrix features;
    std::vector<Label> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dims() const noexcept { return features.cols(); }
    bool empty() const noexcept { return labels.empty(); }

    void add(std::string id, std::span<const double> row, Label label) {
        ids.push_back(std::move(id));
        features.append_row(row);
        labels.push_back(label);
    }

    Dataset subset(std::span<const std::size_t> rows) const {
        Dataset out;
        out.features = features.select_rows(rows);
        if (rows.empty()) out.features = Matrix(0, features.cols());
        out.ids.reserve(rows.size());
        out.labels.reserve(rows.size());
        for (std::size_t r : rows) {
            out.ids.push_back(ids[r]);
            out.labels.push_back(labels[r]);
        }
        return out;
    }

    std::size_t count(Label l) const noexcept {
        std::size_t c = 0;
        for (Label x : labels) c += (x == l);
        return c;
    }

    /// Throws DataError when the shape or value invariants do not hold.
    void validate() const {
        if (ids.size() != labels.size() || features.rows() != labels.size()) {
            throw DataError("dataset: ids, feature rows and labels differ in length");
        }
        for (double v : features.values()) {
            if (!std::isfinite(v) || v < 0.0) throw DataError("dataset: feature values must be finite and >= 0");
        }
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

} // namespace droidlens
