#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "droidlens/core/error.hpp"
#include "droidlens/core/matrix.hpp"
#include "droidlens/dataset/dataset.hpp"
#include "droidlens/learn/classifier_spec.hpp"
#include "droidlens/learn/decision_tree.hpp"
#include "droidlens/learn/linear_svm.hpp"
#include "droidlens/learn/logistic.hpp"
#include "droidlens/learn/naive_bayes.hpp"
#include "droidlens/learn/random_forest.hpp"

namespace droidlens {

using ModelParameters =
    std::variant<std::monostate, LogisticModel, NaiveBayesModel, LinearSvmModel, TreeModel, ForestModel>;

/// A fitted classifier of any kind. `constant` is set when training saw a
/// single class; such a model always emits that class.
struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::logistic_regression;
    std::size_t dims = 0;
    std::optional<Label> constant;
    ModelParameters params;
};

inline ClassifierModel fit(const ClassifierSpec& spec, const Dataset& ds) {
    if (ds.empty()) throw InvalidArgument("fit: empty dataset");
    if (ds.features.rows() != ds.size()) throw InvalidArgument("fit: feature rows differ from label count");
    require_finite(ds.features, "fit");

    ClassifierModel model;
    model.kind = spec.kind;
    model.dims = ds.dims();
    const std::size_t n_malware = ds.count(Label::malware);
    if (n_malware == 0 || n_malware == ds.size()) {
        model.constant = n_malware ? Label::malware : Label::benign;
        return model;
    }
    switch (spec.kind) {
    case ClassifierKind::logistic_regression: model.params = fit_logistic(spec, ds); break;
    case ClassifierKind::gaussian_nb: model.params = fit_naive_bayes(spec, ds); break;
    case ClassifierKind::linear_svm: model.params = fit_linear_svm(spec, ds); break;
    case ClassifierKind::decision_tree: model.params = fit_decision_tree(spec, ds); break;
    case ClassifierKind::random_forest: model.params = fit_random_forest(spec, ds); break;
    }
    return model;
}

inline Label predict(const ClassifierModel& model, std::span<const double> x) {
    if (x.size() != model.dims) {
        throw InvalidArgument("predict: expected " + std::to_string(model.dims) + " features, got " +
                              std::to_string(x.size()));
    }
    if (model.constant) return *model.constant;
    return std::visit(
        [&](const auto& p) -> Label {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LogisticModel>) return predict_logistic(p, x);
            else if constexpr (std::is_same_v<T, NaiveBayesModel>) return predict_naive_bayes(p, x);
            else if constexpr (std::is_same_v<T, LinearSvmModel>) return predict_linear_svm(p, x);
            else if constexpr (std::is_same_v<T, TreeModel>) return predict_tree(p, x);
            else if constexpr (std::is_same_v<T, ForestModel>) return predict_forest(p, x);
            else throw InvalidArgument("predict: model not fitted");
        },
        model.params);
}

/// One prediction per row, in row order.
inline std::vector<Label> predict_batch(const ClassifierModel& model, const Matrix& x) {
    std::vector<Label> out;
    out.reserve(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict(model, x.row(i)));
    return out;
}

} // namespace droidlens
