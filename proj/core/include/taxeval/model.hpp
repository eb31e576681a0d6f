#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "taxeval/domain.hpp"
#include "taxeval/forest.hpp"
#include "taxeval/lasso.hpp"
#include "taxeval/preprocess.hpp"
#include "taxeval/tuner.hpp"

namespace taxeval {

enum class ModelKind { lasso, random_forest };

std::string model_kind_name(ModelKind kind);

/// A trained counterfactual AVM: fitted preprocessing plus learned
/// parameters. The target convention is log sale price throughout;
/// assessments come back through exp().
struct FittedModel {
    ModelKind kind = ModelKind::lasso;
    Preprocessor preprocessing;
    LassoFit lasso;
    ForestFit forest;
    std::vector<std::string> schema; // model-ready column names

    Eigen::VectorXd predict_log(const FeatureMatrix& matrix) const;
};

/// Fits a model of the given kind on the rows, with hyperparameters taken
/// from `params` (falling back to PipelineConfig defaults). Recognized
/// params: "lambda" (lasso); "max_depth", "min_leaf", "feature_fraction"
/// (forest).
FittedModel train_avm(ModelKind kind, std::span<const SaleRecord> rows,
                      std::span<const std::string> feature_names, const PipelineConfig& config,
                      const std::map<std::string, double>& params, std::uint64_t seed);

/// Predicted assessed values (currency) for rows conforming to the fitted
/// schema. Throws SchemaMismatch otherwise.
std::vector<double> predict_assessments(const FittedModel& model,
                                        std::span<const SaleRecord> rows);

/// Search space per model kind (lambda on a log scale; forest shape knobs).
std::vector<ParamSpec> default_search_space(ModelKind kind);

/// Minimizes k-fold cross-validated MAE between predicted and actual log
/// sale price over the tuner budget. Folds are seeded random partitions of
/// the given (training) rows; preprocessing is refit inside every fold.
TuneResult tune_model(ModelKind kind, std::span<const SaleRecord> train_rows,
                      std::span<const std::string> feature_names, const PipelineConfig& config,
                      std::uint64_t seed);

} // namespace taxeval
