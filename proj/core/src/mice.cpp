#include "taxeval/mice.hpp"

#include <cmath>
#include <string>

#include "taxeval/errors.hpp"

namespace taxeval {

namespace {

bool missing(double v) { return std::isnan(v); }

double column_mode01(const Eigen::MatrixXd& m, Eigen::Index col) {
    // indicator columns hold 0/1 (possibly NaN); mode over observed entries
    std::size_t ones = 0, zeros = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double v = m(i, col);
        if (missing(v)) continue;
        (v >= 0.5 ? ones : zeros) += 1;
    }
    return ones > zeros ? 1.0 : 0.0;
}

// least-squares fit of column `col` on all other columns, over rows where
// `col` was originally observed
MiceModel::ColumnModel fit_column(const Eigen::MatrixXd& m,
                                  const std::vector<char>& observed_mask, Eigen::Index col) {
    const Eigen::Index p = m.cols();
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (observed_mask[static_cast<std::size_t>(i)]) rows.push_back(i);
    }

    Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), p); // other cols + intercept
    Eigen::VectorXd target(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Eigen::Index out_c = 0;
        for (Eigen::Index c = 0; c < p; ++c) {
            if (c == col) continue;
            design(static_cast<Eigen::Index>(r), out_c++) = m(rows[r], c);
        }
        design(static_cast<Eigen::Index>(r), p - 1) = 1.0;
        target(static_cast<Eigen::Index>(r)) = m(rows[r], col);
    }

    Eigen::VectorXd solution = design.colPivHouseholderQr().solve(target);
    MiceModel::ColumnModel cm;
    cm.fitted = true;
    cm.coef = solution.head(p - 1);
    cm.intercept = solution(p - 1);
    return cm;
}

double predict_column(const MiceModel::ColumnModel& cm, const Eigen::MatrixXd& m, Eigen::Index row,
                      Eigen::Index col) {
    double value = cm.intercept;
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c == col) continue;
        value += cm.coef(k++) * m(row, c);
    }
    return value;
}

} // namespace

MiceModel mice_fit(Eigen::MatrixXd& matrix, const std::vector<bool>& is_indicator, int iterations,
                   std::uint64_t /*seed*/) {
    const Eigen::Index n = matrix.rows();
    const Eigen::Index p = matrix.cols();

    MiceModel model;
    model.iterations = iterations;
    model.is_indicator = is_indicator;
    model.init.resize(static_cast<std::size_t>(p));
    model.columns.resize(static_cast<std::size_t>(p));

    // per-column observed masks; initialize missing cells with mean/mode
    std::vector<std::vector<char>> observed(static_cast<std::size_t>(p),
                                            std::vector<char>(static_cast<std::size_t>(n), 0));
    std::vector<bool> any_missing(static_cast<std::size_t>(p), false);
    for (Eigen::Index c = 0; c < p; ++c) {
        double sum = 0.0;
        std::size_t count = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!missing(matrix(i, c))) {
                observed[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = 1;
                sum += matrix(i, c);
                ++count;
            } else {
                any_missing[static_cast<std::size_t>(c)] = true;
            }
        }
        if (count == 0) throw AllMissingColumn("column " + std::to_string(c));
        model.init[static_cast<std::size_t>(c)] =
            is_indicator[static_cast<std::size_t>(c)] ? column_mode01(matrix, c) : sum / static_cast<double>(count);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!observed[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]) {
                matrix(i, c) = model.init[static_cast<std::size_t>(c)];
            }
        }
    }

    if (p < 2) return model; // single column: mean/mode fill is all there is

    for (int it = 0; it < iterations; ++it) {
        for (Eigen::Index c = 0; c < p; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            if (!any_missing[uc]) continue;
            if (is_indicator[uc]) continue; // indicators stay at their mode
            MiceModel::ColumnModel cm = fit_column(matrix, observed[uc], c);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!observed[uc][static_cast<std::size_t>(i)]) {
                    matrix(i, c) = predict_column(cm, matrix, i, c);
                }
            }
            model.columns[uc] = std::move(cm);
        }
    }

    // columns fully observed in training still need a model for test-time
    // gaps; fit them once against the completed matrix
    for (Eigen::Index c = 0; c < p; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        if (model.columns[uc].fitted || is_indicator[uc]) continue;
        model.columns[uc] = fit_column(matrix, observed[uc], c);
    }
    return model;
}

void mice_apply(const MiceModel& model, Eigen::MatrixXd& matrix) {
    const Eigen::Index n = matrix.rows();
    const Eigen::Index p = matrix.cols();
    if (static_cast<std::size_t>(p) != model.init.size()) {
        throw LengthMismatch("mice_apply: matrix has " + std::to_string(p) + " columns, model has " +
                             std::to_string(model.init.size()));
    }

    std::vector<std::vector<char>> was_missing(static_cast<std::size_t>(p),
                                               std::vector<char>(static_cast<std::size_t>(n), 0));
    for (Eigen::Index c = 0; c < p; ++c) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (missing(matrix(i, c))) {
                was_missing[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = 1;
                matrix(i, c) = model.init[static_cast<std::size_t>(c)];
            }
        }
    }
    if (p < 2) return;

    for (int it = 0; it < model.iterations; ++it) {
        for (Eigen::Index c = 0; c < p; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            if (model.is_indicator[uc] || !model.columns[uc].fitted) continue;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (was_missing[uc][static_cast<std::size_t>(i)]) {
                    matrix(i, c) = predict_column(model.columns[uc], matrix, i, c);
                }
            }
        }
    }
}

Eigen::MatrixXd mice_impute(Eigen::MatrixXd matrix, const std::vector<bool>& is_indicator,
                            int iterations, std::uint64_t seed) {
    mice_fit(matrix, is_indicator, iterations, seed);
    return matrix;
}

} // namespace taxeval
