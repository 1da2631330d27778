#pragma once

#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "droidlens/cli/config.hpp"
#include "droidlens/clustering/kmeans.hpp"
#include "droidlens/core/error.hpp"
#include "droidlens/dataset/consensus.hpp"
#include "droidlens/dataset/csv.hpp"
#include "droidlens/dataset/oracle.hpp"
#include "droidlens/dex/histogram.hpp"
#include "droidlens/eval/cluster_compare.hpp"
#include "droidlens/eval/pipeline.hpp"
#include "droidlens/eval/report.hpp"

namespace droidlens::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Diagnostics go to stderr; with --log they are also appended, timestamped,
/// to the log file. Timestamps never reach report outputs.
class Logger {
public:
    explicit Logger(std::ostream& err) : err_(err) {}

    void open(const std::filesystem::path& path) {
        file_.open(path, std::ios::app);
        if (!file_) throw DataError("cannot open log file " + path.string());
    }

    void info(const std::string& msg) { log("info", msg, false); }
    void warn(const std::string& msg) { log("warning", msg, true); }
    void error(const std::string& msg) { log("error", msg, true); }

private:
    void log(const char* level, const std::string& msg, bool to_stderr) {
        if (to_stderr) err_ << "droidlens: " << level << ": " << msg << "\n";
        if (file_) {
            const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
            char stamp[32];
            std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
            file_ << stamp << " " << level << " " << msg << "\n";
        }
    }

    std::ostream& err_;
    std::ofstream file_;
};

/// "1..10" or "2,3,5".
inline std::vector<std::size_t> parse_k_list(const std::string& text) {
    auto number = [&](const std::string& s) -> std::size_t {
        std::size_t v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || v == 0) {
            throw UsageError("bad k value '" + s + "' in '" + text + "'");
        }
        return v;
    };
    std::vector<std::size_t> ks;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const std::size_t lo = number(text.substr(0, dots)), hi = number(text.substr(dots + 2));
        if (lo > hi) throw UsageError("empty k range '" + text + "'");
        for (std::size_t k = lo; k <= hi; ++k) ks.push_back(k);
        return ks;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) ks.push_back(number(item));
    if (ks.empty()) throw UsageError("empty k list");
    return ks;
}

namespace app_detail {

inline void require_input(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw DataError("input not found: " + p.string());
}

inline void require_output(const std::filesystem::path& p) {
    const auto parent = p.parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
        throw DataError("output directory does not exist: " + parent.string());
    }
}

inline Matrix clustering_features(const Dataset& ds, bool standardize) {
    return standardize ? standardize_columns(ds.features) : ds.features;
}

struct PipelineFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> cv_k;
    std::optional<std::size_t> cluster_k;
    bool smote = false;
    bool no_smote = false;
    std::string protocol;
    bool paper_protocol = false;
    std::string aggregation;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration");
        cmd->add_option("--seed", seed, "Master seed (overrides config)");
        cmd->add_option("--cv-k", cv_k, "Number of cross-validation folds");
        cmd->add_option("--cluster-k", cluster_k, "Number of k-means clusters");
        cmd->add_flag("--smote", smote, "Balance each cluster's training rows with SMOTE");
        cmd->add_flag("--no-smote", no_smote, "Disable SMOTE");
        cmd->add_option("--protocol", protocol, "leakfree or paper");
        cmd->add_flag("--paper-protocol", paper_protocol, "Cluster all rows before splitting into folds");
        cmd->add_option("--aggregation", aggregation, "pooled or fold_mean");
    }

    RunConfig resolve() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (seed) c.seed = *seed;
        if (cv_k) c.cv_k = *cv_k;
        if (cluster_k) c.cluster_k = *cluster_k;
        if (smote && no_smote) throw UsageError("--smote and --no-smote are exclusive");
        if (smote) c.smote = true;
        if (no_smote) c.smote = false;
        if (!protocol.empty()) c.protocol = parse_protocol(protocol);
        if (paper_protocol) c.protocol = Protocol::paper;
        if (!aggregation.empty()) c.aggregation = parse_aggregation(aggregation);
        if (c.cv_k < 2) throw UsageError("--cv-k must be >= 2");
        if (c.cluster_k < 1) throw UsageError("--cluster-k must be >= 1");
        return c;
    }
};

} // namespace app_detail

/// Entry point behind the `droidlens` binary. Exit codes: 0 success,
/// 1 data or processing error, 2 usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace app_detail;
    CLI::App app{"Opcode-frequency Android malware triage: extraction, labeling, clustering and evaluation"};
    app.name("droidlens");
    app.require_subcommand(1);
    std::string log_path;
    app.add_option("--log", log_path, "Append timestamped diagnostics to this file");

    // extract
    auto* extract = app.add_subcommand("extract", "Opcode histograms for every .dex file in a directory");
    std::string dex_dir, extract_out;
    std::optional<int> extract_label;
    bool verify_checksum = false, skip_invalid = false;
    extract->add_option("dex-dir", dex_dir, "Directory of .dex files")->required();
    extract->add_option("-o,--output", extract_out, "Output features CSV")->required();
    extract->add_option("--label", extract_label, "Label for every row (0 benign, 1 malware)");
    extract->add_flag("--verify-checksum", verify_checksum, "Reject files whose adler32 checksum is stale");
    extract->add_flag("--skip-invalid", skip_invalid, "Skip malformed files instead of failing");

    // label
    auto* label = app.add_subcommand("label", "Label rows by scanner consensus");
    std::string label_in, label_out, oracle;
    std::size_t threshold = 1;
    double rpm = 4.0;
    bool drop_unknown = false;
    label->add_option("features", label_in, "Features CSV whose ids are SHA-256 digests")->required();
    label->add_option("--oracle", oracle, "Report service URL or fixture directory")->required();
    label->add_option("-o,--output", label_out, "Output labeled CSV")->required();
    label->add_option("--threshold", threshold, "Detections needed to call a sample malware")->capture_default_str();
    label->add_option("--rpm", rpm, "Requests per minute against an HTTP oracle")->capture_default_str();
    label->add_flag("--drop-unknown", drop_unknown, "Drop rows the oracle has no verdicts for");

    // cluster-compare
    auto* compare_cl = app.add_subcommand("cluster-compare", "Score five clustering algorithms over parameter grids");
    std::string cc_in, cc_out, cc_k = "2..5", cc_linkage = "ward";
    std::vector<double> cc_eps{5000, 10000, 15000, 20000};
    std::size_t cc_min_pts = 5, cc_branching = 50, cc_restarts = 10;
    std::optional<double> cc_threshold;
    std::uint64_t cc_seed = 42;
    bool cc_standardize = false;
    compare_cl->add_option("dataset", cc_in, "Labeled CSV")->required();
    compare_cl->add_option("-o,--output", cc_out, "Output comparison CSV")->required();
    compare_cl->add_option("--k", cc_k, "Cluster counts, e.g. 2..5 or 2,3,4")->capture_default_str();
    compare_cl->add_option("--eps", cc_eps, "DBSCAN radii")->delimiter(',');
    compare_cl->add_option("--min-pts", cc_min_pts, "DBSCAN core-point threshold")->capture_default_str();
    compare_cl->add_option("--linkage", cc_linkage, "ward, complete or average")->capture_default_str();
    compare_cl->add_option("--birch-threshold", cc_threshold, "BIRCH radius threshold (default 0.05 x data radius)");
    compare_cl->add_option("--branching", cc_branching, "BIRCH branching factor")->capture_default_str();
    compare_cl->add_option("--restarts", cc_restarts, "k-means restarts")->capture_default_str();
    compare_cl->add_option("--seed", cc_seed, "Seed")->capture_default_str();
    compare_cl->add_flag("--standardize", cc_standardize, "Z-score features before clustering");

    // elbow
    auto* elbow = app.add_subcommand("elbow", "k-means SSE for a range of k");
    std::string elbow_in, elbow_out, elbow_k = "1..10";
    std::size_t elbow_restarts = 10;
    std::uint64_t elbow_seed = 42;
    bool elbow_standardize = false;
    elbow->add_option("dataset", elbow_in, "Labeled CSV")->required();
    elbow->add_option("-o,--output", elbow_out, "Output CSV (k,sse)")->required();
    elbow->add_option("--k", elbow_k, "Cluster counts, e.g. 1..10")->capture_default_str();
    elbow->add_option("--restarts", elbow_restarts, "k-means restarts per k")->capture_default_str();
    elbow->add_option("--seed", elbow_seed, "Seed")->capture_default_str();
    elbow->add_flag("--standardize", elbow_standardize, "Z-score features before clustering");

    // eval
    auto* eval = app.add_subcommand("eval", "Cross-validated evaluation of one pipeline");
    std::string eval_mode, eval_in, eval_out, eval_md;
    PipelineFlags eval_flags;
    eval->add_option("pipeline", eval_mode, "plain or clustered")->required()->check(CLI::IsMember({"plain", "clustered"}));
    eval->add_option("dataset", eval_in, "Labeled CSV")->required();
    eval->add_option("-o,--output", eval_out, "Output report CSV (report printed only when omitted)");
    eval->add_option("--markdown", eval_md, "Also write a markdown table here");
    eval_flags.add_to(eval);

    // compare
    auto* compare = app.add_subcommand("compare", "Plain vs clustered side by side");
    std::string compare_in, compare_out;
    PipelineFlags compare_flags;
    compare->add_option("dataset", compare_in, "Labeled CSV")->required();
    compare->add_option("-o,--output", compare_out, "Output markdown summary")->required();
    compare_flags.add_to(compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return kExitOk;
        err << app.help();
        return kExitUsage;
    }

    Logger log(err);
    try {
        if (!log_path.empty()) log.open(log_path);

        if (*extract) {
            require_input(dex_dir);
            require_output(extract_out);
            if (extract_label && *extract_label != 0 && *extract_label != 1) throw UsageError("--label must be 0 or 1");
            if (!extract_label) log.warn("no --label given; rows are written as 0 (benign) until labeled");
            dex::ExtractOptions opt;
            opt.parse.verify_checksum = verify_checksum;
            opt.skip_invalid = skip_invalid;
            const auto result = dex::extract_directory(dex_dir, opt);
            for (const auto& s : result.skipped) log.warn("skipped " + s);
            Dataset ds;
            ds.features = Matrix(0, kOpcodeColumns);
            std::vector<double> row(kOpcodeColumns);
            const Label l = extract_label ? label_from_int(*extract_label) : Label::benign;
            for (const auto& [id, hist] : result.histograms) {
                for (std::size_t j = 0; j < kOpcodeColumns; ++j) row[j] = static_cast<double>(hist.counts[j]);
                ds.add(id, row, l);
            }
            write_dataset(ds, extract_out);
            log.info("extracted " + std::to_string(ds.size()) + " samples to " + extract_out);
        } else if (*label) {
            require_input(label_in);
            require_output(label_out);
            const Dataset in = read_dataset(label_in);
            auto source = make_oracle(oracle, rpm);
            Dataset labeled;
            labeled.features = Matrix(0, kOpcodeColumns);
            for (std::size_t i = 0; i < in.size(); ++i) {
                const auto verdicts = source->lookup(in.ids[i]);
                if (!verdicts || verdicts->engines.empty()) {
                    if (drop_unknown) {
                        log.warn("no verdicts for " + in.ids[i] + "; row dropped");
                        continue;
                    }
                    throw DataError("no verdicts for " + in.ids[i] + " (use --drop-unknown to skip)");
                }
                labeled.add(in.ids[i], in.features.row(i), consensus_label(*verdicts, threshold));
            }
            write_dataset(labeled, label_out);
            log.info("labeled " + std::to_string(labeled.size()) + " of " + std::to_string(in.size()) + " rows");
        } else if (*compare_cl) {
            require_input(cc_in);
            require_output(cc_out);
            ClusterCompareConfig cfg;
            cfg.ks = parse_k_list(cc_k);
            cfg.eps = cc_eps;
            cfg.min_pts = cc_min_pts;
            cfg.linkage = parse_linkage(cc_linkage);
            cfg.birch_threshold = cc_threshold;
            cfg.birch_branching = cc_branching;
            cfg.kmeans_restarts = cc_restarts;
            const Dataset ds = read_dataset(cc_in);
            const auto table = compare_clusterings(clustering_features(ds, cc_standardize), cfg, cc_seed);
            write_file_atomically(cc_out, comparison_to_csv(table));
            out << comparison_to_text(table);
        } else if (*elbow) {
            require_input(elbow_in);
            require_output(elbow_out);
            const auto ks = parse_k_list(elbow_k);
            const Dataset ds = read_dataset(elbow_in);
            const auto curve = sse_curve(clustering_features(ds, elbow_standardize), ks, elbow_seed, elbow_restarts);
            write_file_atomically(elbow_out, elbow_to_csv(curve));
            out << elbow_to_csv(curve);
        } else if (*eval) {
            require_input(eval_in);
            if (!eval_flags.config_path.empty()) require_input(eval_flags.config_path);
            if (!eval_out.empty()) require_output(eval_out);
            if (!eval_md.empty()) require_output(eval_md);
            const RunConfig cfg = eval_flags.resolve();
            const Dataset ds = read_dataset(eval_in);
            const auto report = eval_mode == "plain" ? run_plain_pipeline(ds, cfg.specs(), cfg.pipeline_options())
                                                     : run_clustered_pipeline(ds, cfg.specs(), cfg.pipeline_options());
            for (const auto& n : report.notes) log.warn(n);
            if (!eval_out.empty()) write_file_atomically(eval_out, report_to_csv(report));
            if (!eval_md.empty()) write_file_atomically(eval_md, report_to_markdown(report));
            out << report_to_text(report);
        } else if (*compare) {
            require_input(compare_in);
            if (!compare_flags.config_path.empty()) require_input(compare_flags.config_path);
            require_output(compare_out);
            const RunConfig cfg = compare_flags.resolve();
            const Dataset ds = read_dataset(compare_in);
            const auto plain = run_plain_pipeline(ds, cfg.specs(), cfg.pipeline_options());
            const auto clustered = run_clustered_pipeline(ds, cfg.specs(), cfg.pipeline_options());
            const std::string summary = compare_summary_markdown(plain, clustered);
            write_file_atomically(compare_out, summary);
            out << summary;
        }
        return kExitOk;
    } catch (const UsageError& e) {
        log.error(e.what());
        err << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        log.error(e.what());
        return kExitDataError;
    }
}

} // namespace droidlens::cli
