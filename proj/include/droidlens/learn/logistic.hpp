#pragma once

#include <cmath>
#include <vector>

#include "droidlens/core/matrix.hpp"
#include "droidlens/dataset/dataset.hpp"
#include "droidlens/learn/classifier_spec.hpp"
#include "droidlens/learn/standardizer.hpp"

namespace droidlens {

struct LogisticModel {
    Standardizer standardizer;
    std::vector<double> weights;  // per active column
    double bias = 0.0;
    std::vector<double> loss_history;  // objective at every accepted step
};

namespace logistic_detail {

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double objective(const Matrix& z, const std::vector<double>& y, const std::vector<double>& w, double b,
                        double lambda) {
    double loss = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double s = b;
        const auto r = z.row(i);
        for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * r[j];
        loss += softplus(s) - y[i] * s;
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return loss / static_cast<double>(z.rows()) + lambda * reg;
}

} // namespace logistic_detail

/// Mean log-loss plus lambda * |w|^2 by full-batch gradient descent. A step
/// that raises the objective is rejected and the step size halved.
inline LogisticModel fit_logistic(const ClassifierSpec& spec, const Dataset& ds) {
    using namespace logistic_detail;
    const double lambda = spec.param("lambda");
    double step = spec.param("step");
    const std::size_t max_iter = spec.count_param("max_iter");
    const double tol = spec.param("tol");

    LogisticModel m;
    m.standardizer = Standardizer::fit(ds.features);
    const Matrix z = m.standardizer.transform(ds.features);
    const std::size_t n = z.rows(), p = z.cols();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = ds.labels[i] == Label::malware ? 1.0 : 0.0;

    std::vector<double> w(p, 0.0), grad(p), trial(p);
    double b = 0.0;
    double loss = objective(z, y, w, b, lambda);
    m.loss_history.push_back(loss);

    for (std::size_t it = 0; it < max_iter; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = z.row(i);
            double s = b;
            for (std::size_t j = 0; j < p; ++j) s += w[j] * r[j];
            const double residual = sigmoid(s) - y[i];
            grad_b += residual;
            for (std::size_t j = 0; j < p; ++j) grad[j] += residual * r[j];
        }
        double norm2 = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            grad[j] = grad[j] / static_cast<double>(n) + 2.0 * lambda * w[j];
            norm2 += grad[j] * grad[j];
        }
        grad_b /= static_cast<double>(n);
        norm2 += grad_b * grad_b;
        if (std::sqrt(norm2) < tol) break;

        // Halve until the objective does not increase.
        while (true) {
            for (std::size_t j = 0; j < p; ++j) trial[j] = w[j] - step * grad[j];
            const double trial_b = b - step * grad_b;
            const double trial_loss = objective(z, y, trial, trial_b, lambda);
            if (trial_loss <= loss) {
                w.swap(trial);
                b = trial_b;
                loss = trial_loss;
                m.loss_history.push_back(loss);
                break;
            }
            step *= 0.5;
            if (step < 1e-12) break;
        }
        if (step < 1e-12) break;
    }
    m.weights = std::move(w);
    m.bias = b;
    return m;
}

inline Label predict_logistic(const LogisticModel& m, std::span<const double> x) {
    return m.standardizer.score(x, m.weights, m.bias) > 0.0 ? Label::malware : Label::benign;
}

} // namespace droidlens
