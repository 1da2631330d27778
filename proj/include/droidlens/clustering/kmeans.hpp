#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "droidlens/clustering/assignment.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/core/matrix.hpp"
#include "droidlens/core/random.hpp"

namespace droidlens {

struct KMeansOptions {
    std::size_t max_iter = 300;
    double tol = 1e-6;
    std::size_t n_init = 1;  // independent k-means++ restarts; lowest SSE wins
};

struct KMeansModel {
    Matrix centroids;
    double sse = 0.0;
    std::size_t iterations = 0;
    std::vector<double> sse_history;  // SSE after every assignment step
};

struct KMeansResult {
    KMeansModel model;
    Assignment assignment;
};

/// Nearest centroid by Euclidean distance, ties to the lowest index.
inline std::size_t nearest_centroid(std::span<const double> x, const Matrix& centroids, double* dist2 = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(x, centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    if (dist2) *dist2 = best_d;
    return best;
}

inline std::size_t assign_cluster(std::span<const double> x, const KMeansModel& model) {
    if (model.centroids.rows() == 0) throw InvalidArgument("assign_cluster: model not fitted");
    if (x.size() != model.centroids.cols()) {
        throw InvalidArgument("assign_cluster: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                              std::to_string(model.centroids.cols()) + ")");
    }
    return nearest_centroid(x, model.centroids);
}

namespace detail {

inline Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows();
    Matrix centers(0, x.cols());
    centers.append_row(x.row(rng.index(n)));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), centers.row(0));
    while (centers.rows() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (target < acc) {
                    pick = i;
                    break;
                }
            }
            while (d2[pick] == 0.0 && pick > 0) --pick;  // guard against rounding at the tail
        } else {
            pick = rng.index(n);
        }
        centers.append_row(x.row(pick));
        const auto c = centers.row(centers.rows() - 1);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x.row(i), c));
    }
    return centers;
}

inline double assign_all(const Matrix& x, const Matrix& centroids, std::vector<int>& labels) {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double d2 = 0.0;
        labels[i] = static_cast<int>(nearest_centroid(x.row(i), centroids, &d2));
        sse += d2;
    }
    return sse;
}

inline KMeansResult lloyd(const Matrix& x, std::size_t k, Rng& rng, const KMeansOptions& opt) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    KMeansResult result;
    Matrix centroids = kmeans_plus_plus(x, k, rng);
    std::vector<int> labels(n, 0);
    std::vector<double>& history = result.model.sse_history;

    std::size_t iter = 0;
    while (iter < opt.max_iter) {
        history.push_back(assign_all(x, centroids, labels));
        ++iter;

        Matrix next(k, d, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(labels[i]);
            ++counts[c];
            auto dst = next.row(c);
            const auto src = x.row(i);
            for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
        std::vector<std::size_t> empty;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                empty.push_back(c);
                continue;
            }
            for (double& v : next.row(c)) v /= static_cast<double>(counts[c]);
        }
        if (!empty.empty()) {
            // Reseed each empty centroid to the point farthest from its own centroid.
            std::vector<double> far(n);
            for (std::size_t i = 0; i < n; ++i) {
                far[i] = squared_distance(x.row(i), next.row(static_cast<std::size_t>(labels[i])));
            }
            for (std::size_t c : empty) {
                std::size_t best = n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (far[i] > 0.0 && (best == n || far[i] > far[best])) best = i;
                }
                if (best == n) {
                    auto src = centroids.row(c);
                    std::copy(src.begin(), src.end(), next.row(c).begin());
                    continue;
                }
                const auto p = x.row(best);
                std::copy(p.begin(), p.end(), next.row(c).begin());
                far[best] = 0.0;
            }
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, squared_distance(centroids.row(c), next.row(c)));
        centroids = std::move(next);
        if (std::sqrt(shift) < opt.tol) break;
    }
    const double sse = assign_all(x, centroids, labels);
    history.push_back(sse);

    result.model.centroids = std::move(centroids);
    result.model.sse = sse;
    result.model.iterations = iter;
    result.assignment.labels = std::move(labels);
    result.assignment.k = k;
    return result;
}

} // namespace detail

/// Lloyd's algorithm from k-means++ seeds.
inline KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& opt = {}) {
    if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
    if (k > x.rows()) {
        throw InvalidArgument("kmeans: k = " + std::to_string(k) + " exceeds n = " + std::to_string(x.rows()));
    }
    require_finite(x, "kmeans");
    const std::size_t restarts = std::max<std::size_t>(1, opt.n_init);
    KMeansResult best;
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, {r}));
        KMeansResult run = detail::lloyd(x, k, rng, opt);
        if (r == 0 || run.model.sse < best.model.sse) best = std::move(run);
    }
    return best;
}

/// Best-of-`restarts` SSE for every k in `ks`; the numeric curve behind an elbow plot.
inline std::vector<std::pair<std::size_t, double>> sse_curve(const Matrix& x, std::span<const std::size_t> ks,
                                                             std::uint64_t seed, std::size_t restarts = 10) {
    std::vector<std::pair<std::size_t, double>> curve;
    for (std::size_t k : ks) {
        KMeansOptions opt;
        opt.n_init = restarts;
        curve.emplace_back(k, kmeans(x, k, derive_seed(seed, {k}), opt).model.sse);
    }
    return curve;
}

} // namespace droidlens
