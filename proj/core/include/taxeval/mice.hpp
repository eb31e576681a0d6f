#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace taxeval {

/// Fitted chained-equation imputation state: per-column linear regressions
/// (numeric) or modes (indicator columns), plus the mean/mode initialization.
/// Refitting never happens at transform time; the stored regressions are
/// replayed so test rows only ever see training-derived parameters.
struct MiceModel {
    int iterations = 5;
    std::vector<bool> is_indicator;
    std::vector<double> init; // training mean (numeric) or mode (indicator)
    struct ColumnModel {
        bool fitted = false;
        double intercept = 0.0;
        Eigen::VectorXd coef; // over all other columns, in column order
    };
    std::vector<ColumnModel> columns;
};

/// Fits the chained imputation on `matrix` (NaN marks missing) and fills it
/// in place. Observed entries are never altered. Deterministic; the seed is
/// reserved for stochastic column models and unused by the linear/mode ones.
/// Throws AllMissingColumn when a column has no observed value.
MiceModel mice_fit(Eigen::MatrixXd& matrix, const std::vector<bool>& is_indicator, int iterations,
                   std::uint64_t seed);

/// Replays a fitted model on new rows with missing entries.
void mice_apply(const MiceModel& model, Eigen::MatrixXd& matrix);

/// One-shot convenience: fit on the matrix and return the completed copy.
Eigen::MatrixXd mice_impute(Eigen::MatrixXd matrix, const std::vector<bool>& is_indicator,
                            int iterations, std::uint64_t seed);

} // namespace taxeval
