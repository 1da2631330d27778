#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "droidlens/core/matrix.hpp"

namespace droidlens {

/// Per-feature z-scoring fitted on training rows. Features with zero spread
/// are dropped: they carry no weight in the linear models.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;          // population std-dev
    std::vector<std::size_t> active;    // columns with scale > 0

    static Standardizer fit(const Matrix& x) {
        Standardizer s;
        s.mean = column_means(x);
        s.scale.assign(x.cols(), 0.0);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const auto r = x.row(i);
            for (std::size_t j = 0; j < x.cols(); ++j) {
                const double d = r[j] - s.mean[j];
                s.scale[j] += d * d;
            }
        }
        for (std::size_t j = 0; j < x.cols(); ++j) {
            s.scale[j] = x.rows() ? std::sqrt(s.scale[j] / static_cast<double>(x.rows())) : 0.0;
            if (s.scale[j] > 0.0) s.active.push_back(j);
        }
        return s;
    }

    /// Standardized active columns only.
    Matrix transform(const Matrix& x) const {
        Matrix out(x.rows(), active.size());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const auto r = x.row(i);
            auto o = out.row(i);
            for (std::size_t a = 0; a < active.size(); ++a) {
                const std::size_t j = active[a];
                o[a] = (r[j] - mean[j]) / scale[j];
            }
        }
        return out;
    }

    /// Linear score b + w . z(x), with w indexed by active column.
    double score(std::span<const double> x, std::span<const double> weights, double bias) const {
        double z = bias;
        for (std::size_t a = 0; a < active.size(); ++a) {
            const std::size_t j = active[a];
            z += weights[a] * (x[j] - mean[j]) / scale[j];
        }
        return z;
    }
};

} // namespace droidlens
