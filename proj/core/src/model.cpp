#include "taxeval/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "taxeval/errors.hpp"
#include "taxeval/rng.hpp"

namespace taxeval {

std::string model_kind_name(ModelKind kind) {
    return kind == ModelKind::lasso ? "lasso" : "random_forest";
}

Eigen::VectorXd FittedModel::predict_log(const FeatureMatrix& matrix) const {
    if (matrix.column_names() != schema) {
        throw SchemaMismatch("feature matrix does not match the fitted schema");
    }
    if (kind == ModelKind::lasso) return lasso_predict(lasso, matrix.values);
    return forest_predict(forest, matrix.values);
}

namespace {

double param_or(const std::map<std::string, double>& params, const std::string& name,
                double fallback) {
    auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
}

Eigen::VectorXd log_prices(std::span<const SaleRecord> rows) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = std::log(rows[i].sale_price);
    return y;
}

bool any_weights(std::span<const SaleRecord> rows) {
    return std::any_of(rows.begin(), rows.end(),
                       [](const SaleRecord& r) { return r.sample_weight.has_value(); });
}

Eigen::VectorXd weights_of(std::span<const SaleRecord> rows) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        w(static_cast<Eigen::Index>(i)) = rows[i].sample_weight.value_or(1.0);
    }
    return w;
}

} // namespace

FittedModel train_avm(ModelKind kind, std::span<const SaleRecord> rows,
                      std::span<const std::string> feature_names, const PipelineConfig& config,
                      const std::map<std::string, double>& params, std::uint64_t seed) {
    FittedModel model;
    model.kind = kind;
    model.preprocessing = Preprocessor::fit(rows, feature_names, config);

    const FeatureMatrix X = model.preprocessing.transform(rows);
    model.schema = X.column_names();
    const Eigen::VectorXd y = log_prices(rows);

    const bool weighted = any_weights(rows);
    const Eigen::VectorXd w = weighted ? weights_of(rows) : Eigen::VectorXd();

    if (kind == ModelKind::lasso) {
        const double lambda = param_or(params, "lambda", 1e-3);
        model.lasso = fit_lasso(X.values, y, lambda, weighted ? &w : nullptr, config.lasso_tol,
                                config.lasso_max_sweeps);
    } else {
        ForestConfig fc;
        fc.n_trees = config.forest_trees;
        fc.min_leaf = static_cast<int>(param_or(params, "min_leaf", config.forest_min_leaf));
        fc.max_depth = static_cast<int>(param_or(params, "max_depth", config.forest_max_depth));
        const double frac = param_or(params, "feature_fraction", config.forest_feature_fraction);
        fc.mtry = frac > 0.0
                      ? std::max(1, static_cast<int>(std::ceil(frac * static_cast<double>(X.cols()))))
                      : 0;
        fc.seed = seed;
        model.forest = fit_random_forest(X.values, y, fc, weighted ? &w : nullptr);
    }
    return model;
}

std::vector<double> predict_assessments(const FittedModel& model,
                                        std::span<const SaleRecord> rows) {
    const FeatureMatrix X = model.preprocessing.transform(rows);
    const Eigen::VectorXd log_pred = model.predict_log(X);
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[i] = std::exp(log_pred(static_cast<Eigen::Index>(i)));
    }
    return out;
}

std::vector<ParamSpec> default_search_space(ModelKind kind) {
    if (kind == ModelKind::lasso) {
        return {{"lambda", 1e-4, 1.0, true, false}};
    }
    return {{"max_depth", 3.0, 16.0, false, true},
            {"min_leaf", 2.0, 20.0, false, true},
            {"feature_fraction", 0.25, 1.0, false, false}};
}

TuneResult tune_model(ModelKind kind, std::span<const SaleRecord> train_rows,
                      std::span<const std::string> feature_names, const PipelineConfig& config,
                      std::uint64_t seed) {
    const int folds = std::max(2, config.cv_folds);
    if (train_rows.size() < static_cast<std::size_t>(folds)) {
        throw EmptyInput("tune_model: fewer rows than folds");
    }

    // seeded random partition of the training rows
    std::vector<std::size_t> perm(train_rows.size());
    std::iota(perm.begin(), perm.end(), 0);
    RngStream shuffle_rng = RngStream::substream(seed, 0xCF, 0);
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[shuffle_rng.uniform_index(i)]);
    }
    std::vector<int> fold_of(train_rows.size());
    for (std::size_t i = 0; i < perm.size(); ++i) fold_of[perm[i]] = static_cast<int>(i % folds);

    const std::vector<std::string> features(feature_names.begin(), feature_names.end());

    TuneObjective objective = [&, features](const std::map<std::string, double>& params) {
        double total_abs_err = 0.0;
        std::size_t total_n = 0;
        for (int f = 0; f < folds; ++f) {
            std::vector<SaleRecord> fit_rows, holdout;
            for (std::size_t i = 0; i < train_rows.size(); ++i) {
                (fold_of[i] == f ? holdout : fit_rows).push_back(train_rows[i]);
            }
            if (holdout.empty() || fit_rows.empty()) continue;
            const FittedModel m = train_avm(kind, fit_rows, features, config, params, seed);
            const FeatureMatrix X = m.preprocessing.transform(holdout);
            const Eigen::VectorXd pred = m.predict_log(X);
            for (std::size_t i = 0; i < holdout.size(); ++i) {
                total_abs_err +=
                    std::abs(pred(static_cast<Eigen::Index>(i)) - std::log(holdout[i].sale_price));
            }
            total_n += holdout.size();
        }
        return total_abs_err / static_cast<double>(total_n);
    };

    return tune_minimize(default_search_space(kind), objective, config.tuner_budget, seed);
}

} // namespace taxeval
