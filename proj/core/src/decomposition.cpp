#include "taxeval/decomposition.hpp"

#include <cmath>
#include <cstddef>

#include "taxeval/errors.hpp"

namespace taxeval {

namespace {

struct Moments {
    double mean_pred, mean_truth, var_pred, var_truth, mse, cov;
};

// population (1/n) moments throughout
Moments moments_of(const LogPredictionSet& set) {
    const std::size_t n = set.predictions.size();
    if (n != set.truth.size()) {
        throw LengthMismatch("predictions " + std::to_string(n) + " vs truth " +
                             std::to_string(set.truth.size()));
    }
    if (n < 2) throw LengthMismatch("need n >= 2, got " + std::to_string(n));

    Moments m{0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        m.mean_pred += set.predictions[i];
        m.mean_truth += set.truth[i];
    }
    m.mean_pred /= static_cast<double>(n);
    m.mean_truth /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dp = set.predictions[i] - m.mean_pred;
        const double dt = set.truth[i] - m.mean_truth;
        const double e = set.predictions[i] - set.truth[i];
        m.var_pred += dp * dp;
        m.var_truth += dt * dt;
        m.cov += dp * dt;
        m.mse += e * e;
    }
    m.var_pred /= static_cast<double>(n);
    m.var_truth /= static_cast<double>(n);
    m.cov /= static_cast<double>(n);
    m.mse /= static_cast<double>(n);
    return m;
}

} // namespace

double covariance_via_mse(const LogPredictionSet& set) {
    const Moments m = moments_of(set);
    const double bias = m.mean_pred - m.mean_truth;
    return 0.5 * (m.var_pred + bias * bias - m.mse + m.var_truth);
}

DecompositionTerms decompose_fairness_delta(const LogPredictionSet& model1,
                                            const LogPredictionSet& model2) {
    if (model1.truth != model2.truth) throw TruthMismatch();

    const Moments m1 = moments_of(model1);
    const Moments m2 = moments_of(model2);
    const double bias1 = m1.mean_pred - m1.mean_truth;
    const double bias2 = m2.mean_pred - m2.mean_truth;

    DecompositionTerms t;
    t.d_variance = m2.var_pred - m1.var_pred;
    t.d_sq_mean_bias = bias2 * bias2 - bias1 * bias1;
    t.d_mse = -(m2.mse - m1.mse);
    t.total = 0.5 * (t.d_variance + t.d_sq_mean_bias + t.d_mse);
    t.cov_delta = m2.cov - m1.cov;
    return t;
}

} // namespace taxeval
