#include "taxeval/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "taxeval/errors.hpp"
#include "taxeval/rng.hpp"

namespace taxeval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Frame {
    int node = 0;
    std::vector<int> rows; // canonical row ids, with bootstrap multiplicity
    int depth = 0;
};

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double weighted_mean(const std::vector<int>& rows, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w) {
    double num = 0.0, den = 0.0;
    for (int r : rows) {
        num += w(r) * y(r);
        den += w(r);
    }
    return num / den;
}

double node_sse(const std::vector<int>& rows, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    double sw = 0.0, swy = 0.0, swyy = 0.0;
    for (int r : rows) {
        sw += w(r);
        swy += w(r) * y(r);
        swyy += w(r) * y(r) * y(r);
    }
    return swyy - swy * swy / sw;
}

SplitChoice best_split(const std::vector<int>& rows, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const std::vector<int>& candidate_features, int min_leaf,
                       double parent_sse) {
    SplitChoice best;
    const std::size_t n = rows.size();
    std::vector<int> order;

    for (int f : candidate_features) {
        order = rows;
        // (value, canonical id) order keeps summation order deterministic
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (X(a, f) != X(b, f)) return X(a, f) < X(b, f);
            return a < b;
        });
        if (X(order.front(), f) == X(order.back(), f)) continue; // constant in node

        double sw_left = 0.0, swy_left = 0.0, swyy_left = 0.0;
        double sw_all = 0.0, swy_all = 0.0, swyy_all = 0.0;
        for (int r : order) {
            sw_all += w(r);
            swy_all += w(r) * y(r);
            swyy_all += w(r) * y(r) * y(r);
        }

        for (std::size_t i = 0; i + 1 < n; ++i) {
            const int r = order[i];
            sw_left += w(r);
            swy_left += w(r) * y(r);
            swyy_left += w(r) * y(r) * y(r);

            const double x_here = X(r, f);
            const double x_next = X(order[i + 1], f);
            if (x_here == x_next) continue; // split only between distinct values
            if (i + 1 < static_cast<std::size_t>(min_leaf) ||
                n - (i + 1) < static_cast<std::size_t>(min_leaf)) {
                continue;
            }

            const double sw_right = sw_all - sw_left;
            const double sse_left = swyy_left - swy_left * swy_left / sw_left;
            const double sse_right =
                (swyy_all - swyy_left) - (swy_all - swy_left) * (swy_all - swy_left) / sw_right;
            const double gain = parent_sse - sse_left - sse_right;
            // strict improvement; ties keep the earlier (feature, threshold)
            if (gain > best.gain + 1e-12 || (!best.found && gain > 0.0)) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (x_here + x_next);
                best.gain = gain;
            }
        }
    }
    return best;
}

std::vector<int> sample_features(int p, int mtry, RngStream& rng) {
    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    if (mtry >= p) return all;
    // partial Fisher-Yates, then ascending so tie-breaks are canonical
    for (int i = 0; i < mtry; ++i) {
        const auto j = i + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(p - i)));
        std::swap(all[i], all[j]);
    }
    all.resize(mtry);
    std::sort(all.begin(), all.end());
    return all;
}

} // namespace

ForestFit fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const ForestConfig& config, const Eigen::VectorXd* weights) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) throw LengthMismatch("forest y vs rows");
    if (n == 0) throw EmptyInput("fit_random_forest");

    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    if (weights) {
        if (weights->size() != n) throw LengthMismatch("forest weights vs rows");
        w = *weights / weights->maxCoeff(); // constant weights -> exactly 1.0
    }

    // canonical row order: fits are invariant to input-row permutation
    std::vector<int> canon(static_cast<std::size_t>(n));
    std::iota(canon.begin(), canon.end(), 0);
    std::sort(canon.begin(), canon.end(), [&](int a, int b) {
        for (Eigen::Index c = 0; c < p; ++c) {
            if (X(a, c) != X(b, c)) return X(a, c) < X(b, c);
        }
        if (y(a) != y(b)) return y(a) < y(b);
        return w(a) < w(b);
    });

    Eigen::MatrixXd Xc(n, p);
    Eigen::VectorXd yc(n), wc(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Xc.row(i) = X.row(canon[static_cast<std::size_t>(i)]);
        yc(i) = y(canon[static_cast<std::size_t>(i)]);
        wc(i) = w(canon[static_cast<std::size_t>(i)]);
    }

    // inverse-CDF sampler over cumulative weights
    std::vector<double> cumw(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        acc += wc(i);
        cumw[static_cast<std::size_t>(i)] = acc;
    }
    const double w_total = acc;

    const int mtry = config.mtry > 0 ? std::min<int>(config.mtry, static_cast<int>(p))
                                     : static_cast<int>((p + 2) / 3);

    ForestFit fit;
    fit.trees.resize(static_cast<std::size_t>(config.n_trees));
    std::vector<double> oob_sum(static_cast<std::size_t>(n), 0.0);
    std::vector<int> oob_count(static_cast<std::size_t>(n), 0);

    for (int t = 0; t < config.n_trees; ++t) {
        RngStream rng = RngStream::substream(config.seed, 0xF0 + static_cast<std::uint64_t>(t), 0);

        std::vector<int> bag;
        std::vector<char> inbag(static_cast<std::size_t>(n), 0);
        if (config.bootstrap) {
            bag.reserve(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                const double u = rng.uniform01() * w_total;
                const auto it = std::upper_bound(cumw.begin(), cumw.end(), u);
                const int row = static_cast<int>(std::min<std::ptrdiff_t>(
                    it - cumw.begin(), static_cast<std::ptrdiff_t>(n - 1)));
                bag.push_back(row);
                inbag[static_cast<std::size_t>(row)] = 1;
            }
            std::sort(bag.begin(), bag.end()); // sorted bootstrap draws
        } else {
            bag.resize(static_cast<std::size_t>(n));
            std::iota(bag.begin(), bag.end(), 0);
            std::fill(inbag.begin(), inbag.end(), 1);
        }

        std::vector<ForestNode>& nodes = fit.trees[static_cast<std::size_t>(t)];
        nodes.emplace_back();
        std::vector<Frame> stack;
        stack.push_back({0, std::move(bag), 0});

        while (!stack.empty()) {
            Frame frame = std::move(stack.back());
            stack.pop_back();
            ForestNode& node = nodes[static_cast<std::size_t>(frame.node)];
            node.value = weighted_mean(frame.rows, yc, wc);

            const bool depth_capped = config.max_depth > 0 && frame.depth >= config.max_depth;
            if (depth_capped || frame.rows.size() < 2 * static_cast<std::size_t>(config.min_leaf) ||
                frame.rows.size() < 2) {
                continue;
            }
            const double parent_sse = node_sse(frame.rows, yc, wc);
            if (parent_sse <= 0.0) continue; // pure node

            const std::vector<int> features = sample_features(static_cast<int>(p), mtry, rng);
            const SplitChoice split =
                best_split(frame.rows, Xc, yc, wc, features, config.min_leaf, parent_sse);
            if (!split.found) continue;

            std::vector<int> left_rows, right_rows;
            for (int r : frame.rows) {
                (Xc(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
            }

            const int left_id = static_cast<int>(nodes.size());
            nodes.emplace_back();
            const int right_id = static_cast<int>(nodes.size());
            nodes.emplace_back();
            ForestNode& parent = nodes[static_cast<std::size_t>(frame.node)];
            parent.feature = split.feature;
            parent.threshold = split.threshold;
            parent.left = left_id;
            parent.right = right_id;

            stack.push_back({right_id, std::move(right_rows), frame.depth + 1});
            stack.push_back({left_id, std::move(left_rows), frame.depth + 1});
        }

        for (Eigen::Index i = 0; i < n; ++i) {
            if (inbag[static_cast<std::size_t>(i)]) continue;
            const ForestNode* cur = &nodes[0];
            while (cur->feature >= 0) {
                cur = &nodes[static_cast<std::size_t>(Xc(i, cur->feature) <= cur->threshold
                                                          ? cur->left
                                                          : cur->right)];
            }
            oob_sum[static_cast<std::size_t>(i)] += cur->value;
            oob_count[static_cast<std::size_t>(i)] += 1;
        }
    }

    fit.oob_predictions.assign(static_cast<std::size_t>(n), kNaN);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (oob_count[static_cast<std::size_t>(i)] > 0) {
            // map canonical position back to the caller's row id
            fit.oob_predictions[static_cast<std::size_t>(canon[static_cast<std::size_t>(i)])] =
                oob_sum[static_cast<std::size_t>(i)] / oob_count[static_cast<std::size_t>(i)];
        }
    }
    return fit;
}

double forest_predict_row(const ForestFit& fit, const Eigen::RowVectorXd& row) {
    double sum = 0.0;
    for (const auto& nodes : fit.trees) {
        const ForestNode* cur = &nodes[0];
        while (cur->feature >= 0) {
            cur = &nodes[static_cast<std::size_t>(row(cur->feature) <= cur->threshold ? cur->left
                                                                                      : cur->right)];
        }
        sum += cur->value;
    }
    return sum / static_cast<double>(fit.trees.size());
}

Eigen::VectorXd forest_predict(const ForestFit& fit, const Eigen::MatrixXd& X) {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = forest_predict_row(fit, X.row(i));
    return out;
}

} // namespace taxeval
