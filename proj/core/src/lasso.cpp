#include "taxeval/lasso.hpp"

#include <cmath>

#include "taxeval/errors.hpp"

namespace taxeval {

namespace {

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

Eigen::VectorXd normalized_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd* weights) {
    if (!weights) return Eigen::VectorXd::Ones(X.rows());
    if (weights->size() != X.rows()) throw LengthMismatch("lasso weights vs rows");
    const double max_w = weights->maxCoeff();
    if (!(max_w > 0.0)) throw Error("lasso: weights must be positive");
    return *weights / max_w; // constant weights become exactly 1.0
}

} // namespace

LassoFit fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   const Eigen::VectorXd* weights, double tol, std::size_t max_sweeps) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) throw LengthMismatch("lasso y vs rows");
    if (n == 0) throw EmptyInput("fit_lasso");

    const Eigen::VectorXd w = normalized_weights(X, weights);
    const double w_total = w.sum();

    // per-coordinate curvature (1/W) sum_i w_i x_ij^2
    Eigen::VectorXd curvature(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        curvature(j) = X.col(j).cwiseAbs2().dot(w) / w_total;
    }

    LassoFit fit;
    fit.coefficients = Eigen::VectorXd::Zero(p);
    fit.intercept = y.dot(w) / w_total;
    Eigen::VectorXd residual = y.array() - fit.intercept;

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;

        for (Eigen::Index j = 0; j < p; ++j) {
            if (curvature(j) == 0.0) continue; // all-zero column
            const double partial =
                (X.col(j).cwiseProduct(w)).dot(residual) / w_total + curvature(j) * fit.coefficients(j);
            const double updated = soft_threshold(partial, lambda) / curvature(j);
            const double change = updated - fit.coefficients(j);
            if (change != 0.0) {
                residual -= X.col(j) * change;
                fit.coefficients(j) = updated;
                max_change = std::max(max_change, std::abs(change));
            }
        }

        // recentre the unpenalized intercept
        const double shift = residual.dot(w) / w_total;
        if (shift != 0.0) {
            fit.intercept += shift;
            residual.array() -= shift;
            max_change = std::max(max_change, std::abs(shift));
        }

        if (max_change < tol) {
            fit.sweeps = sweep + 1;
            fit.converged = true;
            return fit;
        }
    }
    throw NonConvergence(max_sweeps);
}

double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd* weights) {
    const Eigen::VectorXd w = normalized_weights(X, weights);
    const double w_total = w.sum();
    const double y_mean = y.dot(w) / w_total;
    const Eigen::VectorXd centered = y.array() - y_mean;

    double lambda_max = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        lambda_max = std::max(lambda_max,
                              std::abs((X.col(j).cwiseProduct(w)).dot(centered)) / w_total);
    }
    return lambda_max;
}

double lasso_predict_row(const LassoFit& fit, const Eigen::RowVectorXd& row) {
    return fit.intercept + row.dot(fit.coefficients);
}

Eigen::VectorXd lasso_predict(const LassoFit& fit, const Eigen::MatrixXd& X) {
    return (X * fit.coefficients).array() + fit.intercept;
}

} // namespace taxeval
