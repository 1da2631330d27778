#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "droidlens/core/error.hpp"

namespace droidlens {

enum class ClassifierKind { logistic_regression, gaussian_nb, linear_svm, decision_tree, random_forest };

/// Table order: LR, NB, SVM, DT, RF.
inline constexpr std::array<ClassifierKind, 5> kAllClassifiers = {
    ClassifierKind::logistic_regression, ClassifierKind::gaussian_nb, ClassifierKind::linear_svm,
    ClassifierKind::decision_tree, ClassifierKind::random_forest};

inline std::string_view to_string(ClassifierKind k) {
    switch (k) {
    case ClassifierKind::logistic_regression: return "logistic_regression";
    case ClassifierKind::gaussian_nb: return "gaussian_nb";
    case ClassifierKind::linear_svm: return "linear_svm";
    case ClassifierKind::decision_tree: return "decision_tree";
    case ClassifierKind::random_forest: return "random_forest";
    }
    return "?";
}

/// Human-readable name used in report tables.
inline std::string_view display_name(ClassifierKind k) {
    switch (k) {
    case ClassifierKind::logistic_regression: return "Logistic Regression";
    case ClassifierKind::gaussian_nb: return "Naive Bayes";
    case ClassifierKind::linear_svm: return "Support Vector Machines";
    case ClassifierKind::decision_tree: return "Decision Trees";
    case ClassifierKind::random_forest: return "Random Forest";
    }
    return "?";
}

inline ClassifierKind parse_classifier_kind(std::string_view s) {
    for (ClassifierKind k : kAllClassifiers) {
        if (to_string(k) == s) return k;
    }
    throw UsageError("unknown classifier kind '" + std::string(s) + "'");
}

using Hyperparameters = std::map<std::string, double, std::less<>>;

/// Every accepted key with its default, per kind.
inline Hyperparameters default_hyperparameters(ClassifierKind k) {
    switch (k) {
    case ClassifierKind::logistic_regression:
        return {{"lambda", 1e-4}, {"step", 1.0}, {"max_iter", 1000}, {"tol", 1e-6}};
    case ClassifierKind::gaussian_nb:
        return {{"var_smoothing", 1e-9}};
    case ClassifierKind::linear_svm:
        return {{"lambda", 1e-4}, {"epochs", 200}};
    case ClassifierKind::decision_tree:
        return {{"min_samples_split", 2}, {"max_depth", 0}};
    case ClassifierKind::random_forest:
        return {{"n_trees", 100}, {"max_features", 0}, {"min_samples_split", 2}, {"max_depth", 0}, {"n_jobs", 1}};
    }
    return {};
}

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::logistic_regression;
    Hyperparameters params;  // complete: defaults merged with overrides
    std::uint64_t seed = 42;

    double param(std::string_view key) const {
        const auto it = params.find(key);
        if (it == params.end()) throw InvalidArgument("missing hyperparameter " + std::string(key));
        return it->second;
    }

    std::size_t count_param(std::string_view key) const { return static_cast<std::size_t>(param(key)); }
};

/// Defaults for `kind` overridden by `overrides`; unknown keys and
/// out-of-range values are rejected.
inline ClassifierSpec make_spec(ClassifierKind kind, const Hyperparameters& overrides = {}, std::uint64_t seed = 42) {
    ClassifierSpec spec{kind, default_hyperparameters(kind), seed};
    for (const auto& [key, value] : overrides) {
        auto it = spec.params.find(key);
        if (it == spec.params.end()) {
            throw UsageError("unknown hyperparameter '" + key + "' for " + std::string(to_string(kind)));
        }
        if (!std::isfinite(value)) throw UsageError("hyperparameter '" + key + "' must be finite");
        it->second = value;
    }
    for (const auto& [key, value] : spec.params) {
        const bool integral = key == "max_iter" || key == "epochs" || key == "min_samples_split" ||
                              key == "max_depth" || key == "n_trees" || key == "max_features" || key == "n_jobs";
        if (integral && (value < 0 || value != std::floor(value))) {
            throw UsageError("hyperparameter '" + key + "' must be a non-negative integer");
        }
        if (!integral && !(value > 0.0)) throw UsageError("hyperparameter '" + key + "' must be positive");
    }
    if (spec.params.contains("n_trees") && spec.param("n_trees") < 1) throw UsageError("n_trees must be >= 1");
    if (spec.params.contains("epochs") && spec.param("epochs") < 1) throw UsageError("epochs must be >= 1");
    if (spec.params.contains("n_jobs") && spec.param("n_jobs") < 1) throw UsageError("n_jobs must be >= 1");
    if (spec.params.contains("min_samples_split") && spec.param("min_samples_split") < 2) {
        throw UsageError("min_samples_split must be >= 2");
    }
    return spec;
}

} // namespace droidlens
