#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "droidlens/clustering/assignment.hpp"
#include "droidlens/clustering/kmeans.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/core/matrix.hpp"

namespace droidlens {

struct GmmOptions {
    std::size_t max_iter = 200;
    double tol = 1e-6;
    double reg_floor = 1e-6;
};

/// Diagonal-covariance Gaussian mixture.
struct GmmModel {
    std::vector<double> weights;
    Matrix means;
    Matrix variances;
    double log_likelihood = 0.0;  // mean per-sample log-likelihood at the final parameters
    std::vector<double> log_likelihood_history;
    std::size_t iterations = 0;
    bool converged = false;
};

struct GmmResult {
    GmmModel model;
    Assignment assignment;
};

namespace gmm_detail {

inline double log_sum_exp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

/// Per-row log responsibilities in `resp` (n x k); returns mean log-likelihood.
inline double e_step(const Matrix& x, const GmmModel& m, Matrix& resp) {
    const std::size_t n = x.rows(), d = x.cols(), k = m.weights.size();
    std::vector<double> log_norm(k);
    for (std::size_t c = 0; c < k; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += std::log(2.0 * std::numbers::pi * m.variances(c, j));
        log_norm[c] = std::log(m.weights[c]) - 0.5 * s;
    }
    double total = 0.0;
    std::vector<double> lp(k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = x.row(i);
        for (std::size_t c = 0; c < k; ++c) {
            double q = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = xi[j] - m.means(c, j);
                q += diff * diff / m.variances(c, j);
            }
            lp[c] = log_norm[c] - 0.5 * q;
        }
        const double lse = log_sum_exp(lp);
        total += lse;
        for (std::size_t c = 0; c < k; ++c) resp(i, c) = lp[c] - lse;
    }
    return total / static_cast<double>(n);
}

/// Weights, means and floored variances from log responsibilities.
inline void m_step(const Matrix& x, const Matrix& log_resp, double reg_floor, GmmModel& m) {
    const std::size_t n = x.rows(), d = x.cols(), k = log_resp.cols();
    constexpr double kTiny = 10.0 * std::numeric_limits<double>::epsilon();
    std::vector<double> nk(k, 0.0);
    Matrix means(k, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            const double r = std::exp(log_resp(i, c));
            nk[c] += r;
            auto mc = means.row(c);
            const auto xi = x.row(i);
            for (std::size_t j = 0; j < d; ++j) mc[j] += r * xi[j];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        nk[c] += kTiny;
        for (double& v : means.row(c)) v /= nk[c];
    }
    Matrix vars(k, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = x.row(i);
        for (std::size_t c = 0; c < k; ++c) {
            const double r = std::exp(log_resp(i, c));
            auto vc = vars.row(c);
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = xi[j] - means(c, j);
                vc[j] += r * diff * diff;
            }
        }
    }
    double total = 0.0;
    for (double v : nk) total += v;
    m.weights.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        m.weights[c] = nk[c] / total;
        for (double& v : vars.row(c)) v = std::max(v / nk[c], reg_floor);
    }
    m.means = std::move(means);
    m.variances = std::move(vars);
}

} // namespace gmm_detail

/// Posterior component probabilities for each row (n x k).
inline Matrix gmm_responsibilities(const Matrix& x, const GmmModel& model) {
    if (x.cols() != model.means.cols()) throw InvalidArgument("gmm_responsibilities: dimension mismatch");
    Matrix resp(x.rows(), model.weights.size());
    gmm_detail::e_step(x, model, resp);
    for (std::size_t i = 0; i < resp.rows(); ++i) {
        for (double& v : resp.row(i)) v = std::exp(v);
    }
    return resp;
}

/// EM for a diagonal Gaussian mixture, started from a k-means partition.
inline GmmResult gmm(const Matrix& x, std::size_t k, std::uint64_t seed, const GmmOptions& opt = {}) {
    if (k < 1 || k > x.rows()) {
        throw InvalidArgument("gmm: k = " + std::to_string(k) + " outside [1, " + std::to_string(x.rows()) + "]");
    }
    if (!(opt.reg_floor > 0.0)) throw InvalidArgument("gmm: reg_floor must be > 0");
    require_finite(x, "gmm");
    const std::size_t n = x.rows();

    const KMeansResult init = kmeans(x, k, seed);
    Matrix log_resp(n, k, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) log_resp(i, static_cast<std::size_t>(init.assignment.labels[i])) = 0.0;

    GmmResult result;
    GmmModel& m = result.model;
    gmm_detail::m_step(x, log_resp, opt.reg_floor, m);

    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        const double ll = gmm_detail::e_step(x, m, log_resp);
        m.log_likelihood_history.push_back(ll);
        m.iterations = it + 1;
        if (ll - prev < opt.tol) {
            m.converged = true;
            break;
        }
        prev = ll;
        gmm_detail::m_step(x, log_resp, opt.reg_floor, m);
    }
    m.log_likelihood = gmm_detail::e_step(x, m, log_resp);

    result.assignment.k = k;
    result.assignment.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = log_resp.row(i);
        result.assignment.labels[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
    }
    return result;
}

} // namespace droidlens
