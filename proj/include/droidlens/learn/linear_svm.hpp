#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "droidlens/core/matrix.hpp"
#include "droidlens/core/random.hpp"
#include "droidlens/dataset/dataset.hpp"
#include "droidlens/learn/classifier_spec.hpp"
#include "droidlens/learn/standardizer.hpp"

namespace droidlens {

struct LinearSvmModel {
    Standardizer standardizer;
    std::vector<double> weights;  // per active column
    double bias = 0.0;
    std::vector<double> loss_history;  // objective of every accepted epoch
};

namespace svm_detail {

inline double objective(const Matrix& z, const std::vector<double>& y, const std::vector<double>& w, double lambda) {
    const std::size_t p = z.cols();
    double hinge = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const auto r = z.row(i);
        double s = w[p];
        for (std::size_t j = 0; j < p; ++j) s += w[j] * r[j];
        hinge += std::max(0.0, 1.0 - y[i] * s);
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return hinge / static_cast<double>(z.rows()) + lambda * reg;
}

} // namespace svm_detail

/// Hinge loss plus lambda * |w|^2 by stochastic sub-gradient descent with
/// step 1/(lambda t) and a projection onto the ball of radius 1/sqrt(lambda).
/// Rows are reshuffled every epoch from the spec seed. The bias is the weight
/// of a constant feature. The iterate kept at each epoch end is the best seen
/// so far, so the recorded objective never increases.
inline LinearSvmModel fit_linear_svm(const ClassifierSpec& spec, const Dataset& ds) {
    const double lambda = spec.param("lambda");
    const std::size_t epochs = spec.count_param("epochs");

    LinearSvmModel m;
    m.standardizer = Standardizer::fit(ds.features);
    const Matrix z = m.standardizer.transform(ds.features);
    const std::size_t n = z.rows(), p = z.cols();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = ds.labels[i] == Label::malware ? 1.0 : -1.0;

    std::vector<double> w(p + 1, 0.0);  // last slot: bias
    std::vector<double> best = w;
    double best_loss = svm_detail::objective(z, y, w, lambda);
    m.loss_history.push_back(best_loss);

    const double radius = 1.0 / std::sqrt(lambda);
    Rng rng(spec.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t t = 0;
    for (std::size_t e = 0; e < epochs; ++e) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const auto r = z.row(i);
            double s = w[p];
            for (std::size_t j = 0; j < p; ++j) s += w[j] * r[j];
            const double shrink = 1.0 - eta * lambda;
            for (double& v : w) v *= shrink;
            if (y[i] * s < 1.0) {
                for (std::size_t j = 0; j < p; ++j) w[j] += eta * y[i] * r[j];
                w[p] += eta * y[i];
            }
            double norm = 0.0;
            for (double v : w) norm += v * v;
            norm = std::sqrt(norm);
            if (norm > radius) {
                for (double& v : w) v *= radius / norm;
            }
        }
        const double loss = svm_detail::objective(z, y, w, lambda);
        if (loss <= best_loss) {
            best_loss = loss;
            best = w;
            m.loss_history.push_back(loss);
        }
    }
    m.bias = best[p];
    best.pop_back();
    m.weights = std::move(best);
    return m;
}

inline double svm_decision(const LinearSvmModel& m, std::span<const double> x) {
    return m.standardizer.score(x, m.weights, m.bias);
}

inline Label predict_linear_svm(const LinearSvmModel& m, std::span<const double> x) {
    return svm_decision(m, x) > 0.0 ? Label::malware : Label::benign;
}

} // namespace droidlens
