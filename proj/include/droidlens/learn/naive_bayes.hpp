#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "droidlens/core/matrix.hpp"
#include "droidlens/dataset/dataset.hpp"
#include "droidlens/learn/classifier_spec.hpp"

namespace droidlens {

/// Gaussian naive Bayes; index 0 = benign, 1 = malware.
struct NaiveBayesModel {
    std::array<double, 2> log_prior{};
    std::array<std::vector<double>, 2> mean;
    std::array<std::vector<double>, 2> variance;
    double epsilon = 0.0;  // added to every variance
};

inline NaiveBayesModel fit_naive_bayes(const ClassifierSpec& spec, const Dataset& ds) {
    const std::size_t n = ds.size(), d = ds.dims();
    NaiveBayesModel m;

    // Smoothing scales with the largest feature variance over all rows.
    const auto all_mean = column_means(ds.features);
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = ds.features(i, j) - all_mean[j];
            v += diff * diff;
        }
        max_var = std::max(max_var, v / static_cast<double>(n));
    }
    const double smoothing = spec.param("var_smoothing");
    m.epsilon = max_var > 0.0 ? smoothing * max_var : smoothing;

    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (to_int(ds.labels[i]) == c) rows.push_back(i);
        }
        m.mean[c].assign(d, 0.0);
        m.variance[c].assign(d, 0.0);
        m.log_prior[c] = std::log(static_cast<double>(rows.size()) / static_cast<double>(n));
        if (rows.empty()) continue;
        for (std::size_t i : rows) {
            for (std::size_t j = 0; j < d; ++j) m.mean[c][j] += ds.features(i, j);
        }
        for (double& v : m.mean[c]) v /= static_cast<double>(rows.size());
        for (std::size_t i : rows) {
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = ds.features(i, j) - m.mean[c][j];
                m.variance[c][j] += diff * diff;
            }
        }
        for (double& v : m.variance[c]) v = v / static_cast<double>(rows.size()) + m.epsilon;
    }
    return m;
}

inline double naive_bayes_log_posterior(const NaiveBayesModel& m, std::span<const double> x, int c) {
    double lp = m.log_prior[c];
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double var = m.variance[c][j];
        const double diff = x[j] - m.mean[c][j];
        lp -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + diff * diff / var);
    }
    return lp;
}

inline Label predict_naive_bayes(const NaiveBayesModel& m, std::span<const double> x) {
    return naive_bayes_log_posterior(m, x, 1) > naive_bayes_log_posterior(m, x, 0) ? Label::malware : Label::benign;
}

} // namespace droidlens
