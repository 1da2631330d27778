#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "droidlens/dataset/csv.hpp"
#include "droidlens/eval/cluster_compare.hpp"
#include "droidlens/eval/metrics.hpp"
#include "droidlens/eval/pipeline.hpp"

namespace droidlens {

/// Fixed-width text table; the first column is left-aligned, the rest right-aligned.
inline std::string format_text_table(const std::vector<std::string>& header,
                                     const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string pad(width[c] - cells[c].size(), ' ');
            if (c) out += "  ";
            out += c == 0 ? cells[c] + pad : pad + cells[c];
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };
    std::string out = line(header);
    std::size_t total = 0;
    for (std::size_t w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    for (const auto& r : rows) out += line(r);
    return out;
}

inline std::string format_markdown_table(const std::vector<std::string>& header,
                                         const std::vector<std::vector<std::string>>& rows) {
    auto line = [](const std::vector<std::string>& cells) {
        std::string out = "|";
        for (const auto& c : cells) out += " " + c + " |";
        return out + "\n";
    };
    std::string out = line(header);
    out += "|";
    for (std::size_t c = 0; c < header.size(); ++c) out += c == 0 ? " --- |" : " ---: |";
    out += "\n";
    for (const auto& r : rows) out += line(r);
    return out;
}

inline const std::vector<std::string>& metric_headers() {
    static const std::vector<std::string> h{"Classifier", "Accuracy", "Recall/TPR", "Specificity/TNR"};
    return h;
}

/// One row per classifier, metrics as percentages.
inline std::vector<std::vector<std::string>> metric_rows(const EvalReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.results) {
        rows.push_back({std::string(display_name(r.spec.kind)), format_percent(r.metrics.accuracy),
                        format_percent(r.metrics.tpr), format_percent(r.metrics.tnr)});
    }
    return rows;
}

/// `classifier,fold,tp,tn,fp,fn,accuracy,tpr,tnr`; the `all` row per
/// classifier carries pooled counts and the reported metrics, followed by one
/// row per fold.
inline std::string report_to_csv(const EvalReport& report) {
    std::string out = "classifier,fold,tp,tn,fp,fn,accuracy,tpr,tnr\n";
    auto emit = [&](const ClassifierResult& r, const std::string& fold, const ConfusionCounts& c, const Metrics& m) {
        out += std::string(to_string(r.spec.kind)) + "," + fold + "," + std::to_string(c.tp) + "," +
               std::to_string(c.tn) + "," + std::to_string(c.fp) + "," + std::to_string(c.fn) + "," +
               format_metric(m.accuracy) + "," + format_metric(m.tpr) + "," + format_metric(m.tnr) + "\n";
    };
    for (const auto& r : report.results) {
        emit(r, "all", r.pooled, r.metrics);
        for (std::size_t f = 0; f < r.per_fold.size(); ++f) emit(r, std::to_string(f + 1), r.per_fold[f], metrics(r.per_fold[f]));
    }
    return out;
}

inline std::string report_to_text(const EvalReport& report) {
    return format_text_table(metric_headers(), metric_rows(report));
}

inline std::string report_to_markdown(const EvalReport& report) {
    std::string title = report.kind == PipelineKind::plain ? "Without clustering" : "With clustering";
    return "## " + title + "\n\n" + format_markdown_table(metric_headers(), metric_rows(report));
}

/// Side-by-side summary of the two pipelines with the per-metric difference.
inline std::string compare_summary_markdown(const EvalReport& plain, const EvalReport& clustered) {
    std::string out = "# Plain vs clustered detection\n\n";
    out += std::to_string(plain.folds) + "-fold cross-validation, seed " + std::to_string(plain.seed) + ", " +
           to_string(plain.aggregation) + " aggregation. Metrics in percent; " + kUndefinedMarker +
           " marks an undefined metric.\n\n";
    out += report_to_markdown(plain) + "\n" + report_to_markdown(clustered) + "\n";
    out += "## Difference (clustered - plain)\n\n";
    std::vector<std::vector<std::string>> rows;
    auto diff = [](const std::optional<double>& a, const std::optional<double>& b) -> std::optional<double> {
        if (!a || !b) return std::nullopt;
        return *b - *a;
    };
    for (std::size_t i = 0; i < plain.results.size() && i < clustered.results.size(); ++i) {
        const auto& p = plain.results[i].metrics;
        const auto& c = clustered.results[i].metrics;
        rows.push_back({std::string(display_name(plain.results[i].spec.kind)), format_percent(diff(p.accuracy, c.accuracy)),
                        format_percent(diff(p.tpr, c.tpr)), format_percent(diff(p.tnr, c.tnr))});
    }
    out += format_markdown_table(metric_headers(), rows);
    std::vector<std::string> notes = plain.notes;
    notes.insert(notes.end(), clustered.notes.begin(), clustered.notes.end());
    if (!notes.empty()) {
        out += "\n## Notes\n\n";
        for (const auto& n : notes) out += "- " + n + "\n";
    }
    return out;
}

inline std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : kUndefinedMarker; }

inline std::string comparison_to_csv(const ComparisonTable& t) {
    std::string out = "algorithm,parameter,n_clusters,calinski_harabasz,silhouette,noise_fraction,winner\n";
    for (const auto& r : t.rows) {
        out += r.algorithm + "," + r.parameter + "," + std::to_string(r.n_clusters) + "," +
               optional_real(r.calinski_harabasz) + "," + optional_real(r.silhouette) + "," +
               format_real(r.noise_fraction) + "," + (r.winner ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string comparison_to_text(const ComparisonTable& t) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : t.rows) {
        char ch[40] = "NA", sil[40] = "NA";
        if (r.calinski_harabasz) std::snprintf(ch, sizeof ch, "%.2f", *r.calinski_harabasz);
        if (r.silhouette) std::snprintf(sil, sizeof sil, "%.4f", *r.silhouette);
        rows.push_back({r.algorithm, r.parameter, std::to_string(r.n_clusters), ch, sil, r.winner ? "*" : ""});
    }
    return format_text_table({"Algorithm", "Parameter", "No of Clusters", "Calinski Harabaz Score", "Silhouette Score", "Best"},
                             rows);
}

inline std::string elbow_to_csv(const std::vector<std::pair<std::size_t, double>>& curve) {
    std::string out = "k,sse\n";
    for (const auto& [k, sse] : curve) out += std::to_string(k) + "," + format_real(sse) + "\n";
    return out;
}

} // namespace droidlens
