#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace taxeval {

struct LassoFit {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    std::size_t sweeps = 0;
    bool converged = false;
};

/// Coordinate-descent minimizer of
///   (1/(2W)) * sum_i w_i (y_i - b0 - x_i'b)^2 + lambda * sum_j |b_j|
/// with an unpenalized intercept, W = sum of weights (n when unweighted).
/// Converged when the largest coefficient change in a sweep drops below tol;
/// throws NonConvergence past max_sweeps. Weights are normalized by their
/// max internally, so a constant weight vector reproduces the unweighted
/// fit exactly.
LassoFit fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   const Eigen::VectorXd* weights = nullptr, double tol = 1e-7,
                   std::size_t max_sweeps = 100000);

/// Smallest lambda at which every coefficient is zero (the max absolute
/// weighted covariate/centered-response correlation).
double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd* weights = nullptr);

double lasso_predict_row(const LassoFit& fit, const Eigen::RowVectorXd& row);
Eigen::VectorXd lasso_predict(const LassoFit& fit, const Eigen::MatrixXd& X);

} // namespace taxeval
