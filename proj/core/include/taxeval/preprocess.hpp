#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taxeval/domain.hpp"
#include "taxeval/feature_matrix.hpp"
#include "taxeval/mice.hpp"

namespace taxeval {

struct PipelineConfig {
    double category_floor = 0.05;         // one-hot categories need >= this share
    double missing_drop_threshold = 0.50; // drop columns missing for more than this share
    double winsor_lo = 0.01;
    double winsor_hi = 0.99;
    int mice_iterations = 5;
    int cv_folds = 5;
    int tuner_budget = 16;
    std::uint64_t seed = 0;

    // model defaults, overridable by the tuner
    double lasso_tol = 1e-7;
    std::size_t lasso_max_sweeps = 100000;
    int forest_trees = 200;
    int forest_min_leaf = 5;
    int forest_max_depth = 0;            // 0 = unbounded
    double forest_feature_fraction = 0.0; // 0 = ceil(p/3) features per split
};

/// Train/test row split: test is the panel's most recent calendar year,
/// train is everything before it.
struct SplitPlan {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    int test_year = 0;
};

/// Throws SingleYearPanel when the panel spans fewer than two years.
SplitPlan chronological_split(const CountyPanel& panel);

/// Fitted one-hot encoding: retained categories of one raw feature, in
/// lexicographic order. Categories below the floor are dropped; rows keep
/// zeros across retained indicators. Missing raw values propagate as missing
/// indicators (imputed later).
struct OneHotSpec {
    std::string source;
    std::vector<std::string> categories;
};
OneHotSpec one_hot_fit(const std::string& source,
                       std::span<const std::optional<std::string>> fit_values,
                       double category_floor);

/// Returns true when a column whose missing share exceeds the threshold must
/// be dropped ("more than", so exactly the threshold is kept).
bool drop_sparse_feature(double missing_fraction, double threshold);

/// Fitted winsor + z-score state for one numeric column. Bounds are the
/// nearest-rank order statistics at the given percentiles; mean/sd come from
/// the clamped fitting values. Returns nullopt for zero-variance columns
/// (caller drops the column with a warning).
struct WinsorStandardizeSpec {
    double lo_bound = 0.0;
    double hi_bound = 0.0;
    double mean = 0.0;
    double sd = 1.0;
};
std::optional<WinsorStandardizeSpec> winsor_standardize_fit(std::span<const double> fit_values,
                                                            double lo_pct, double hi_pct);
double winsor_standardize_apply(const WinsorStandardizeSpec& spec, double value);

/// Nearest-rank empirical quantile (the ceil(p*n)-th order statistic).
double quantile_nearest_rank(std::span<const double> values, double p);

/// Convenience form of the clamp-then-z-score stage over a whole matrix;
/// columns that come back zero-variance are reported, not transformed.
struct WinsorizeResult {
    Eigen::MatrixXd values;
    std::vector<WinsorStandardizeSpec> specs;
    std::vector<std::size_t> zero_variance_columns;
};
WinsorizeResult winsorize_then_standardize(const Eigen::MatrixXd& matrix, double lo_pct,
                                           double hi_pct);

/// The six sale-timing features: year index, Q2/Q3/Q4 indicators,
/// month-of-quarter (1..3), and days since the panel window opened.
std::map<std::string, FeatureValue> time_of_sale_features(const Date& sale_date,
                                                          const YearRange& window);
std::vector<std::string> time_of_sale_feature_names();

/// Fits the full preprocessing pipeline on training rows only and replays it
/// on arbitrary rows: classify features, one-hot encode categoricals (5%
/// floor), drop sparse columns (>50% missing), chained imputation, winsorize
/// and standardize numerics. Transform output never contains missing values.
class Preprocessor {
public:
    static Preprocessor fit(std::span<const SaleRecord> train_rows,
                            std::span<const std::string> feature_names,
                            const PipelineConfig& config);

    /// Throws SchemaMismatch when a fitted input feature is structurally
    /// absent from the given rows.
    FeatureMatrix transform(std::span<const SaleRecord> rows) const;

    const std::vector<std::string>& input_features() const { return input_features_; }
    const std::vector<ColumnMeta>& output_columns() const { return output_meta_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    struct PlannedColumn {
        std::string source;
        bool from_categorical = false;
        std::string category; // indicator category, empty for numeric
    };

    std::vector<std::string> input_features_;    // raw features the pipeline consumes
    std::vector<bool> input_is_categorical_;
    std::vector<OneHotSpec> one_hot_;            // per categorical input
    std::vector<PlannedColumn> planned_;         // columns entering imputation
    std::vector<bool> planned_is_indicator_;
    MiceModel mice_;
    std::vector<std::optional<WinsorStandardizeSpec>> winsor_; // per planned column; nullopt for indicators
    std::vector<bool> keep_;                     // post zero-variance filtering
    std::vector<ColumnMeta> output_meta_;
    std::vector<std::string> warnings_;

    Eigen::MatrixXd assemble(std::span<const SaleRecord> rows, bool structural_check) const;
};

} // namespace taxeval
