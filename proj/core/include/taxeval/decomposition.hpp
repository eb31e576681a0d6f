#pragma once

#include <vector>

namespace taxeval {

/// Aligned log-scale predictions and log sale prices.
struct LogPredictionSet {
    std::vector<double> predictions; // log predicted price
    std::vector<double> truth;       // log sale price
};

/// The three terms whose half-sum equals the change in cov(prediction, truth)
/// between two models, and therefore (up to the shared var of log price) the
/// change in the regression-based fairness metric.
///
/// All moments in this module use the population (1/n) convention; the
/// identity total == cov_delta is exact only under one consistent convention.
struct DecompositionTerms {
    double d_variance = 0.0;     // var2 - var1 of predictions
    double d_sq_mean_bias = 0.0; // (bias2)^2 - (bias1)^2, the change in squared mean bias
    double d_mse = 0.0;          // -(mse2 - mse1)
    double total = 0.0;          // half of their sum
    double cov_delta = 0.0;      // cov(pred2, truth) - cov(pred1, truth)
};

/// Covariance of predictions with truth computed via the MSE expansion
///   cov = (var_pred + mean_bias^2 - mse + var_truth) / 2,
/// which must equal the direct sample covariance.
double covariance_via_mse(const LogPredictionSet& set);

/// Decomposes the fairness change between two models sharing a truth vector.
DecompositionTerms decompose_fairness_delta(const LogPredictionSet& model1,
                                            const LogPredictionSet& model2);

} // namespace taxeval
