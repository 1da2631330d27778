#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "droidlens/eval/cluster_compare.hpp"
#include "droidlens/eval/kfold.hpp"
#include "droidlens/eval/metrics.hpp"
#include "droidlens/eval/pipeline.hpp"
#include "droidlens/eval/report.hpp"
#include "support/fixtures.hpp"

using namespace droidlens;

namespace {

ConfusionCounts counts(std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
    ConfusionCounts c;
    c.tp = tp;
    c.tn = tn;
    c.fp = fp;
    c.fn = fn;
    return c;
}

std::vector<Label> balanced_labels(std::size_t n0, std::size_t n1) {
    std::vector<Label> y(n0, Label::benign);
    y.insert(y.end(), n1, Label::malware);
    return y;
}

void expect_partition(const Folds& folds, std::size_t n, const std::vector<Label>& y) {
    std::vector<int> seen(n, 0);
    std::size_t lo = n, hi = 0;
    for (const auto& f : folds.folds) {
        EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
        for (std::size_t r : f) ++seen[r];
    }
    EXPECT_LE(hi - lo, 1u);
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    if (folds.stratified) {
        for (Label l : {Label::benign, Label::malware}) {
            std::size_t clo = n, chi = 0;
            for (const auto& f : folds.folds) {
                const auto c = static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [&](std::size_t r) { return y[r] == l; }));
                clo = std::min(clo, c);
                chi = std::max(chi, c);
            }
            EXPECT_LE(chi - clo, 1u);
        }
    }
}

std::vector<ClassifierSpec> only(ClassifierKind k, std::uint64_t seed = 42) { return {make_spec(k, {}, seed)}; }

// Records every row that reaches a fitting step and fails on any overlap with
// the fold's held-out rows.
class LeakDetector : public PipelineObserver {
public:
    std::map<std::size_t, std::set<std::size_t>> test_rows;
    std::size_t cluster_fits = 0, global_fits = 0, train_calls = 0, leaks = 0;

    void on_test(std::size_t fold, std::span<const std::size_t> rows) override {
        test_rows[fold].insert(rows.begin(), rows.end());
    }
    void on_cluster_fit(std::optional<std::size_t> fold, std::span<const std::size_t> rows) override {
        if (!fold) {
            ++global_fits;
            return;
        }
        ++cluster_fits;
        check(*fold, rows);
    }
    void on_train(std::size_t fold, std::size_t, std::span<const std::size_t> rows) override {
        ++train_calls;
        check(fold, rows);
    }

private:
    void check(std::size_t fold, std::span<const std::size_t> rows) {
        for (std::size_t r : rows) leaks += test_rows[fold].count(r);
    }
};

}  // namespace

TEST(Metrics, Examples) {
    const auto m = metrics(counts(9, 9, 1, 1));
    EXPECT_DOUBLE_EQ(*m.accuracy, 0.9);
    EXPECT_DOUBLE_EQ(*m.tpr, 0.9);
    EXPECT_DOUBLE_EQ(*m.tnr, 0.9);
    const auto perfect = metrics(counts(4, 6, 0, 0));
    EXPECT_EQ(*perfect.accuracy, 1.0);
    EXPECT_EQ(*perfect.tpr, 1.0);
    EXPECT_EQ(*perfect.tnr, 1.0);
    const auto benign_only = metrics(counts(0, 5, 0, 0));
    EXPECT_EQ(*benign_only.accuracy, 1.0);
    EXPECT_FALSE(benign_only.tpr);
    EXPECT_EQ(format_metric(benign_only.tpr), "NA");
    EXPECT_FALSE(metrics(ConfusionCounts{}).accuracy);
}

TEST(Metrics, RecordAndAccumulate) {
    ConfusionCounts c;
    c.record(Label::malware, Label::malware);
    c.record(Label::malware, Label::benign);
    c.record(Label::benign, Label::malware);
    c.record(Label::benign, Label::benign);
    c.record(Label::benign, Label::benign);
    EXPECT_EQ(c, counts(1, 2, 1, 1));
    c += counts(1, 1, 1, 1);
    EXPECT_EQ(c.total(), 9u);
}

TEST(Metrics, RandomCountsMatchRationalArithmetic) {
    Rng r(11);
    for (int i = 0; i < 1000; ++i) {
        const auto c = counts(r.index(50), r.index(50), r.index(50), r.index(50));
        const auto m = metrics(c);
        const std::uint64_t total = c.tp + c.tn + c.fp + c.fn;
        if (total) {
            EXPECT_NEAR(*m.accuracy, static_cast<long double>(c.tp + c.tn) / total, 1e-12);
        }
        if (c.tp + c.fn) {
            EXPECT_NEAR(*m.tpr, static_cast<long double>(c.tp) / (c.tp + c.fn), 1e-12);
        } else {
            EXPECT_FALSE(m.tpr);
        }
        if (c.tn + c.fp) {
            EXPECT_NEAR(*m.tnr, static_cast<long double>(c.tn) / (c.tn + c.fp), 1e-12);
        } else {
            EXPECT_FALSE(m.tnr);
        }
    }
}

TEST(KFold, Examples) {
    const auto ten = kfold_indices(balanced_labels(5, 5), 10, 1, false);
    ASSERT_EQ(ten.folds.size(), 10u);
    for (const auto& f : ten.folds) EXPECT_EQ(f.size(), 1u);

    const auto eleven = kfold_indices(balanced_labels(6, 5), 10, 1, false);
    std::vector<std::size_t> sizes;
    for (const auto& f : eleven.folds) sizes.push_back(f.size());
    std::sort(sizes.begin(), sizes.end());
    EXPECT_EQ(sizes, (std::vector<std::size_t>{1, 1, 1, 1, 1, 1, 1, 1, 1, 2}));

    const auto y = balanced_labels(50, 50);
    const auto strat = kfold_indices(y, 10, 7);
    ASSERT_TRUE(strat.stratified);
    for (const auto& f : strat.folds) {
        EXPECT_EQ(std::count_if(f.begin(), f.end(), [&](std::size_t r) { return y[r] == Label::malware; }), 5);
        EXPECT_EQ(f.size(), 10u);
    }
}

TEST(KFold, Errors) {
    EXPECT_THROW(kfold_indices(balanced_labels(2, 2), 5, 1), InvalidArgument);
    EXPECT_THROW(kfold_indices(balanced_labels(2, 2), 1, 1), InvalidArgument);
}

TEST(KFold, StratificationFallsBackWithWarning) {
    const auto folds = kfold_indices(balanced_labels(20, 3), 5, 1);
    EXPECT_FALSE(folds.stratified);
    EXPECT_TRUE(folds.warning);
    expect_partition(folds, 23, balanced_labels(20, 3));
}

TEST(KFold, PartitionPropertySearch) {
    Rng r(5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + r.index(120);
        const std::size_t k = 2 + r.index(std::min<std::size_t>(n - 1, 15));
        std::vector<Label> y(n);
        const double p = r.uniform();
        for (auto& l : y) l = r.uniform() < p ? Label::malware : Label::benign;
        const auto folds = kfold_indices(y, k, trial, trial % 3 != 0);
        ASSERT_EQ(folds.folds.size(), k);
        expect_partition(folds, n, y);
        const auto train = folds.training_rows(0);
        EXPECT_EQ(train.size() + folds.folds[0].size(), n);
    }
}

TEST(KFold, SeedControlsShuffle) {
    const auto y = balanced_labels(30, 30);
    EXPECT_EQ(kfold_indices(y, 5, 3).folds, kfold_indices(y, 5, 3).folds);
    EXPECT_NE(kfold_indices(y, 5, 3).folds, kfold_indices(y, 5, 4).folds);
}

TEST(PlainPipeline, SeparableBlobsPerfect) {
    const Dataset ds = testsupport::two_blobs(30, 3.0, 1);
    for (std::size_t k : {2u, 10u}) {
        PipelineOptions opt;
        opt.cv_folds = k;
        const auto report = run_plain_pipeline(ds, only(ClassifierKind::logistic_regression), opt);
        EXPECT_EQ(*report.results[0].metrics.accuracy, 1.0) << "k=" << k;
        EXPECT_EQ(report.results[0].pooled.total(), ds.size());
        EXPECT_EQ(report.kind, PipelineKind::plain);
    }
}

TEST(PlainPipeline, ShuffledLabelsStayNearChance) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Dataset ds = testsupport::two_blobs(100, 3.0, seed);
        Rng r(seed + 100);
        r.shuffle(ds.labels);
        PipelineOptions opt;
        opt.seed = seed;
        const auto report = run_plain_pipeline(ds, only(ClassifierKind::gaussian_nb), opt);
        const double acc = *report.results[0].metrics.accuracy;
        EXPECT_GE(acc, 0.35);
        EXPECT_LE(acc, 0.65);
    }
}

TEST(PlainPipeline, MetricsRecomputableFromCounts) {
    const Dataset ds = testsupport::classifier_blobs(1, 0.2, 6);
    std::vector<ClassifierSpec> specs;
    for (ClassifierKind k : kAllClassifiers) {
        specs.push_back(make_spec(k, k == ClassifierKind::random_forest ? Hyperparameters{{"n_trees", 10}} : Hyperparameters{}));
    }
    PipelineOptions opt;
    opt.cv_folds = 5;
    const auto report = run_plain_pipeline(ds, specs, opt);
    ASSERT_EQ(report.results.size(), 5u);
    for (const auto& r : report.results) {
        ConfusionCounts sum;
        for (const auto& c : r.per_fold) sum += c;
        EXPECT_EQ(sum, r.pooled);
        const auto m = metrics(sum);
        EXPECT_NEAR(*r.metrics.accuracy, *m.accuracy, 1e-12);
        EXPECT_NEAR(*r.metrics.tpr, *m.tpr, 1e-12);
        EXPECT_NEAR(*r.metrics.tnr, *m.tnr, 1e-12);
    }
}

TEST(PlainPipeline, RequiresBothClasses) {
    Dataset ds = testsupport::two_blobs(10, 1.0, 1);
    std::fill(ds.labels.begin(), ds.labels.end(), Label::benign);
    EXPECT_THROW(run_plain_pipeline(ds, only(ClassifierKind::decision_tree)), InvalidArgument);
    EXPECT_THROW(run_plain_pipeline(testsupport::two_blobs(10, 1.0, 1), {}), InvalidArgument);
}

TEST(FoldMean, AveragesPerFoldMetrics) {
    const Dataset ds = testsupport::classifier_blobs(2, 0.2, 4);
    PipelineOptions opt;
    opt.cv_folds = 4;
    opt.aggregation = Aggregation::fold_mean;
    const auto report = run_plain_pipeline(ds, only(ClassifierKind::decision_tree), opt);
    double sum = 0;
    for (const auto& c : report.results[0].per_fold) sum += *metrics(c).accuracy;
    EXPECT_NEAR(*report.results[0].metrics.accuracy, sum / 4, 1e-12);
}

TEST(ClusteredPipeline, BeatsPlainOnFourBlobs) {
    const Dataset ds = testsupport::four_blobs(30, 3, 8);
    PipelineOptions opt;
    opt.seed = 3;
    const auto plain = run_plain_pipeline(ds, only(ClassifierKind::logistic_regression), opt);
    const auto clustered = run_clustered_pipeline(ds, only(ClassifierKind::logistic_regression), opt);
    EXPECT_GE(*clustered.results[0].metrics.accuracy - *plain.results[0].metrics.accuracy, 0.10);
    EXPECT_GE(*clustered.results[0].metrics.accuracy, 0.95);
}

TEST(ClusteredPipeline, SingleClassClusterUsesConstantModel) {
    // region A is all benign, region B mixed
    Dataset ds;
    Rng r(4);
    for (int i = 0; i < 30; ++i) ds.add("a" + std::to_string(i), std::vector<double>{r.normal(), r.normal()}, Label::benign);
    for (int i = 0; i < 30; ++i) {
        ds.add("b" + std::to_string(i), std::vector<double>{1000 + r.normal(), (i % 2 ? 5.0 : -5.0) + r.normal()},
               i % 2 ? Label::malware : Label::benign);
    }
    PipelineOptions opt;
    opt.cv_folds = 5;
    const auto report = run_clustered_pipeline(ds, only(ClassifierKind::logistic_regression), opt);
    EXPECT_EQ(report.results[0].pooled.total(), 60u);
    EXPECT_GE(*report.results[0].metrics.accuracy, 0.95);
}

TEST(ClusteredPipeline, ReductionIdentityWithOneCluster) {
    const Dataset ds = testsupport::classifier_blobs(8, 0.2, 6);
    std::vector<ClassifierSpec> specs;
    for (ClassifierKind k : kAllClassifiers) {
        specs.push_back(make_spec(k, k == ClassifierKind::random_forest ? Hyperparameters{{"n_trees", 10}} : Hyperparameters{}));
    }
    for (std::uint64_t seed : {1u, 42u}) {
        PipelineOptions opt;
        opt.seed = seed;
        opt.cluster_k = 1;
        opt.smote = false;
        const auto plain = report_to_csv(run_plain_pipeline(ds, specs, opt));
        EXPECT_EQ(report_to_csv(run_clustered_pipeline(ds, specs, opt)), plain);
        opt.protocol = Protocol::paper;
        EXPECT_EQ(report_to_csv(run_clustered_pipeline(ds, specs, opt)), plain);
    }
}

TEST(ClusteredPipeline, HeldOutRowsNeverReachFitting) {
    const Dataset ds = testsupport::four_blobs(15, 2, 6);
    LeakDetector leakfree;
    PipelineOptions opt;
    opt.cv_folds = 5;
    opt.observer = &leakfree;
    run_clustered_pipeline(ds, only(ClassifierKind::gaussian_nb), opt);
    EXPECT_EQ(leakfree.leaks, 0u);
    EXPECT_EQ(leakfree.cluster_fits, 5u);
    EXPECT_EQ(leakfree.global_fits, 0u);
    EXPECT_GE(leakfree.train_calls, 5u);

    LeakDetector paper;
    opt.observer = &paper;
    opt.protocol = Protocol::paper;
    run_clustered_pipeline(ds, only(ClassifierKind::gaussian_nb), opt);
    EXPECT_EQ(paper.global_fits, 1u);
    EXPECT_EQ(paper.cluster_fits, 0u);
    EXPECT_EQ(paper.leaks, 0u);

    LeakDetector plain;
    opt.observer = &plain;
    run_plain_pipeline(ds, only(ClassifierKind::gaussian_nb), opt);
    EXPECT_EQ(plain.leaks, 0u);
    EXPECT_EQ(plain.train_calls, 5u);
}

TEST(ClusteredPipeline, DeterministicAndValidated) {
    const Dataset ds = testsupport::four_blobs(10, 1, 4);
    PipelineOptions opt;
    opt.cv_folds = 4;
    opt.cluster_k = 2;
    const auto a = report_to_csv(run_clustered_pipeline(ds, only(ClassifierKind::random_forest), opt));
    EXPECT_EQ(a, report_to_csv(run_clustered_pipeline(ds, only(ClassifierKind::random_forest), opt)));
    opt.cluster_k = 0;
    EXPECT_THROW(run_clustered_pipeline(ds, only(ClassifierKind::gaussian_nb), opt), InvalidArgument);
    opt.cluster_k = 30;
    EXPECT_THROW(run_clustered_pipeline(ds, only(ClassifierKind::gaussian_nb), opt), InvalidArgument);
}

TEST(CompareClusterings, TwoBlobsPickKMeansTwo) {
    const Dataset ds = testsupport::two_blobs(30, 2.0, 3, 4);
    ClusterCompareConfig cfg;
    cfg.eps = {1e-6, 15.0, 30.0, 200.0};
    const auto table = compare_clusterings(ds.features, cfg, 1);
    ASSERT_EQ(table.rows.size(), 20u);
    std::optional<double> best_kmeans;
    std::string best_param;
    for (const auto& r : table.rows) {
        if (r.algorithm != "k-means") continue;
        ASSERT_TRUE(r.calinski_harabasz);
        if (!best_kmeans || *r.calinski_harabasz > *best_kmeans) {
            best_kmeans = r.calinski_harabasz;
            best_param = r.parameter;
        }
    }
    EXPECT_EQ(best_param, "k=2");
    ASSERT_NE(table.winner(), nullptr);
    EXPECT_EQ(table.winner()->n_clusters, 2u);
    for (const auto& r : table.rows) {
        if (r.algorithm == "DBSCAN") continue;
        EXPECT_TRUE(r.calinski_harabasz && std::isfinite(*r.calinski_harabasz)) << r.algorithm << " " << r.parameter;
        EXPECT_TRUE(r.silhouette) << r.algorithm << " " << r.parameter;
    }
}

TEST(CompareClusterings, DegenerateDbscanRowsMarkedUndefined) {
    const Dataset ds = testsupport::two_blobs(20, 2.0, 3, 4);
    ClusterCompareConfig cfg;
    cfg.ks = {2};
    cfg.eps = {1e-6};
    const auto table = compare_clusterings(ds.features, cfg, 1);
    const auto& row = table.rows.back();
    EXPECT_EQ(row.algorithm, "DBSCAN");
    EXPECT_EQ(row.n_clusters, 0u);
    EXPECT_FALSE(row.calinski_harabasz);
    EXPECT_FALSE(row.silhouette);
    EXPECT_EQ(row.noise_fraction, 1.0);
    EXPECT_NE(comparison_to_csv(table).find("NA"), std::string::npos);
    cfg.ks.clear();
    cfg.eps.clear();
    EXPECT_THROW(compare_clusterings(ds.features, cfg, 1), InvalidArgument);
}

TEST(Reports, FormatsCarryTableHeadings) {
    const Dataset ds = testsupport::two_blobs(20, 2.0, 1);
    PipelineOptions opt;
    opt.cv_folds = 2;
    const auto plain = run_plain_pipeline(ds, only(ClassifierKind::decision_tree), opt);
    const auto clustered = run_clustered_pipeline(ds, only(ClassifierKind::decision_tree), opt);
    const auto csv = report_to_csv(plain);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "classifier,fold,tp,tn,fp,fn,accuracy,tpr,tnr");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    const auto text = report_to_text(plain);
    for (const char* h : {"Classifier", "Accuracy", "Recall/TPR", "Specificity/TNR", "Decision Tree"}) {
        EXPECT_NE(text.find(h), std::string::npos) << h;
    }
    EXPECT_NE(report_to_markdown(clustered).find("With clustering"), std::string::npos);
    EXPECT_NE(compare_summary_markdown(plain, clustered).find("|"), std::string::npos);

    ClusterCompareConfig cfg;
    cfg.ks = {2};
    cfg.eps = {5.0};
    const auto table = compare_clusterings(ds.features, cfg, 1);
    const auto t = comparison_to_text(table);
    for (const char* h : {"No of Clusters", "Calinski Harabaz Score", "Silhouette Score"}) {
        EXPECT_NE(t.find(h), std::string::npos) << h;
    }
    EXPECT_EQ(elbow_to_csv({{1, 10.0}, {2, 2.5}}), "k,sse\n1,10\n2,2.5\n");
}
