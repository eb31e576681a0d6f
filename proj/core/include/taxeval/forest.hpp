#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace taxeval {

struct ForestConfig {
    int n_trees = 200;
    int min_leaf = 5;
    int max_depth = 0;  // 0 = unbounded
    int mtry = 0;       // features per split; 0 = ceil(p/3)
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Flat binary regression tree; leaves have feature == -1.
struct ForestNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf prediction (weighted mean)
};

struct ForestFit {
    std::vector<std::vector<ForestNode>> trees;
    // OOB prediction per training row (caller's row order); NaN when a row
    // was in-bag for every tree
    std::vector<double> oob_predictions;
};

/// Bagged CART regression trees with per-split feature subsampling.
/// Deterministic given the seed and invariant to training-row permutation
/// (rows are canonically ordered internally before any draw). Weights scale
/// bootstrap inclusion odds and leaf means; normalizing by the max weight
/// makes any constant weight vector bit-identical to the unweighted fit.
ForestFit fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const ForestConfig& config,
                            const Eigen::VectorXd* weights = nullptr);

double forest_predict_row(const ForestFit& fit, const Eigen::RowVectorXd& row);
Eigen::VectorXd forest_predict(const ForestFit& fit, const Eigen::MatrixXd& X);

} // namespace taxeval
