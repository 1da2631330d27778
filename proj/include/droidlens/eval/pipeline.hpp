#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "droidlens/clustering/kmeans.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/core/random.hpp"
#include "droidlens/dataset/dataset.hpp"
#include "droidlens/eval/kfold.hpp"
#include "droidlens/eval/metrics.hpp"
#include "droidlens/learn/classifier.hpp"
#include "droidlens/learn/smote.hpp"
#include "droidlens/learn/standardizer.hpp"

namespace droidlens {

enum class PipelineKind { plain, clustered };
/// leakfree clusters each fold's training rows; paper clusters all rows once, up front.
enum class Protocol { leakfree, paper };
/// pooled sums confusion counts over folds; fold_mean averages per-fold metrics.
enum class Aggregation { pooled, fold_mean };

inline const char* to_string(PipelineKind k) { return k == PipelineKind::plain ? "plain" : "clustered"; }
inline const char* to_string(Protocol p) { return p == Protocol::leakfree ? "leakfree" : "paper"; }
inline const char* to_string(Aggregation a) { return a == Aggregation::pooled ? "pooled" : "fold_mean"; }

/// Hooks that see which original rows feed each fitting step; used to check
/// that held-out rows never reach clustering, SMOTE or training.
class PipelineObserver {
public:
    virtual ~PipelineObserver() = default;
    /// `fold` is nullopt when clustering runs before the folds (paper protocol).
    virtual void on_cluster_fit(std::optional<std::size_t> /*fold*/, std::span<const std::size_t> /*rows*/) {}
    virtual void on_train(std::size_t /*fold*/, std::size_t /*cluster*/, std::span<const std::size_t> /*rows*/) {}
    virtual void on_test(std::size_t /*fold*/, std::span<const std::size_t> /*rows*/) {}
};

struct PipelineOptions {
    std::size_t cv_folds = 10;
    std::uint64_t seed = 42;
    bool stratified = true;
    std::size_t cluster_k = 2;
    std::size_t kmeans_restarts = 10;
    bool standardize_clustering = false;
    bool smote = true;
    std::size_t smote_k = 5;
    Protocol protocol = Protocol::leakfree;
    Aggregation aggregation = Aggregation::pooled;
    PipelineObserver* observer = nullptr;
};

struct ClassifierResult {
    ClassifierSpec spec;
    ConfusionCounts pooled;
    std::vector<ConfusionCounts> per_fold;
    Metrics metrics;
};

struct EvalReport {
    PipelineKind kind = PipelineKind::plain;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    Aggregation aggregation = Aggregation::pooled;
    std::vector<ClassifierResult> results;
    std::vector<std::string> notes;  // fallbacks taken along the way
};

namespace pipeline_detail {

inline std::uint64_t fit_seed(const PipelineOptions& opt, const ClassifierSpec& spec, std::size_t fold, std::size_t cluster) {
    return derive_seed(opt.seed, {5, spec.seed, fold, cluster});
}

inline void require_both_classes(const Dataset& ds) {
    if (ds.count(Label::malware) == 0 || ds.count(Label::benign) == 0) {
        throw InvalidArgument("pipeline: both classes must be present");
    }
}

inline Metrics aggregate(const ClassifierResult& r, Aggregation agg) {
    if (agg == Aggregation::pooled) return metrics(r.pooled);
    auto mean_of = [&](auto member) -> std::optional<double> {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& c : r.per_fold) {
            if (const auto v = metrics(c).*member) {
                sum += *v;
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    };
    return {mean_of(&Metrics::accuracy), mean_of(&Metrics::tpr), mean_of(&Metrics::tnr)};
}

inline EvalReport start_report(PipelineKind kind, const std::vector<ClassifierSpec>& specs, const PipelineOptions& opt) {
    if (specs.empty()) throw InvalidArgument("pipeline: no classifiers given");
    EvalReport report;
    report.kind = kind;
    report.folds = opt.cv_folds;
    report.seed = opt.seed;
    report.aggregation = opt.aggregation;
    for (const auto& s : specs) {
        ClassifierResult r;
        r.spec = s;
        r.per_fold.resize(opt.cv_folds);
        report.results.push_back(std::move(r));
    }
    return report;
}

inline void finish_report(EvalReport& report) {
    for (auto& r : report.results) {
        for (const auto& c : r.per_fold) r.pooled += c;
        r.metrics = aggregate(r, report.aggregation);
    }
}

inline Folds make_folds(const Dataset& ds, const PipelineOptions& opt, EvalReport& report) {
    Folds folds = kfold_indices(ds.labels, opt.cv_folds, derive_seed(opt.seed, {1}), opt.stratified);
    if (folds.warning) report.notes.push_back(*folds.warning);
    return folds;
}

/// k-means over (optionally standardized) features; routes rows to clusters.
struct ClusterRouter {
    std::optional<Standardizer> scaler;
    KMeansModel model;

    static ClusterRouter fit(const Matrix& x, const PipelineOptions& opt, std::uint64_t seed) {
        ClusterRouter r;
        KMeansOptions km;
        km.n_init = opt.kmeans_restarts;
        if (opt.standardize_clustering) {
            r.scaler = Standardizer::fit(x);
            r.model = kmeans(r.scaler->transform(x), opt.cluster_k, seed, km).model;
        } else {
            r.model = kmeans(x, opt.cluster_k, seed, km).model;
        }
        return r;
    }

    std::vector<double> project(std::span<const double> x) const {
        if (!scaler) return {x.begin(), x.end()};
        std::vector<double> out;
        for (std::size_t j : scaler->active) out.push_back((x[j] - scaler->mean[j]) / scaler->scale[j]);
        return out;
    }

    std::size_t route(std::span<const double> x) const { return assign_cluster(project(x), model); }

    /// Nearest centroid among clusters flagged usable.
    std::size_t route_among(std::span<const double> x, const std::vector<bool>& usable) const {
        const auto p = project(x);
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < model.centroids.rows(); ++c) {
            if (!usable[c]) continue;
            const double d = squared_distance(p, model.centroids.row(c));
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        return best;
    }
};

} // namespace pipeline_detail

/// k-fold evaluation of every spec on the whole dataset, no clustering.
inline EvalReport run_plain_pipeline(const Dataset& ds, const std::vector<ClassifierSpec>& specs,
                                     const PipelineOptions& opt = {}) {
    using namespace pipeline_detail;
    require_both_classes(ds);
    EvalReport report = start_report(PipelineKind::plain, specs, opt);
    const Folds folds = make_folds(ds, opt, report);
    for (std::size_t f = 0; f < opt.cv_folds; ++f) {
        const auto train_rows = folds.training_rows(f);
        const auto& test_rows = folds.folds[f];
        if (opt.observer) {
            opt.observer->on_test(f, test_rows);
            opt.observer->on_train(f, 0, train_rows);
        }
        const Dataset train = ds.subset(train_rows);
        for (std::size_t s = 0; s < specs.size(); ++s) {
            ClassifierSpec spec = specs[s];
            spec.seed = fit_seed(opt, specs[s], f, 0);
            ClassifierModel model;
            try {
                model = fit(spec, train);
            } catch (const Error& e) {
                throw Error("fold " + std::to_string(f + 1) + ", " + std::string(to_string(spec.kind)) + ": " + e.what());
            }
            for (std::size_t r : test_rows) {
                report.results[s].per_fold[f].record(ds.labels[r], predict(model, ds.features.row(r)));
            }
        }
    }
    finish_report(report);
    return report;
}

/// Cluster-then-classify: per fold, k-means partitions the training rows,
/// each cluster's rows are SMOTE-balanced and get their own classifier, and
/// each test row is scored by the model of the cluster it routes to.
inline EvalReport run_clustered_pipeline(const Dataset& ds, const std::vector<ClassifierSpec>& specs,
                                         const PipelineOptions& opt = {}) {
    using namespace pipeline_detail;
    require_both_classes(ds);
    if (opt.cluster_k < 1) throw InvalidArgument("pipeline: cluster_k must be >= 1");
    if (ds.size() < opt.cluster_k * 2) {
        throw InvalidArgument("pipeline: need at least 2 rows per cluster (n = " + std::to_string(ds.size()) + ")");
    }
    EvalReport report = start_report(PipelineKind::clustered, specs, opt);
    const Folds folds = make_folds(ds, opt, report);
    const std::size_t k = opt.cluster_k;

    std::optional<ClusterRouter> global;
    if (opt.protocol == Protocol::paper) {
        std::vector<std::size_t> all(ds.size());
        std::iota(all.begin(), all.end(), 0);
        if (opt.observer) opt.observer->on_cluster_fit(std::nullopt, all);
        global = ClusterRouter::fit(ds.features, opt, derive_seed(opt.seed, {3}));
    }

    for (std::size_t f = 0; f < opt.cv_folds; ++f) {
        const auto train_rows = folds.training_rows(f);
        const auto& test_rows = folds.folds[f];
        if (opt.observer) opt.observer->on_test(f, test_rows);

        ClusterRouter router;
        if (global) {
            router = *global;
        } else {
            if (opt.observer) opt.observer->on_cluster_fit(f, train_rows);
            router = ClusterRouter::fit(ds.features.select_rows(train_rows), opt, derive_seed(opt.seed, {2, f}));
        }

        std::vector<std::vector<std::size_t>> members(k);
        for (std::size_t r : train_rows) members[router.route(ds.features.row(r))].push_back(r);

        std::vector<std::vector<ClassifierModel>> models(k);
        std::vector<bool> usable(k, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (members[c].empty()) {
                report.notes.push_back("fold " + std::to_string(f + 1) + ": cluster " + std::to_string(c) +
                                       " has no training rows; its test rows use the nearest non-empty cluster");
                continue;
            }
            usable[c] = true;
            if (opt.observer) opt.observer->on_train(f, c, members[c]);
            Dataset train = ds.subset(members[c]);
            if (opt.smote) {
                const std::size_t minority = std::min(train.count(Label::malware), train.count(Label::benign));
                if (minority >= 2) {
                    train = smote_balance(train, opt.smote_k, derive_seed(opt.seed, {4, f, c}));
                } else if (minority == 1) {
                    report.notes.push_back("fold " + std::to_string(f + 1) + ": cluster " + std::to_string(c) +
                                           " has a single minority row; SMOTE skipped");
                }
            }
            for (const auto& base : specs) {
                ClassifierSpec spec = base;
                spec.seed = fit_seed(opt, base, f, c);
                try {
                    models[c].push_back(fit(spec, train));
                } catch (const Error& e) {
                    throw Error("fold " + std::to_string(f + 1) + ", cluster " + std::to_string(c) + ", " +
                                std::string(to_string(spec.kind)) + ": " + e.what());
                }
            }
        }

        for (std::size_t r : test_rows) {
            const auto x = ds.features.row(r);
            std::size_t c = router.route(x);
            if (!usable[c]) c = router.route_among(x, usable);
            for (std::size_t s = 0; s < specs.size(); ++s) {
                report.results[s].per_fold[f].record(ds.labels[r], predict(models[c][s], x));
            }
        }
    }
    finish_report(report);
    return report;
}

} // namespace droidlens
