#include "taxeval/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "taxeval/errors.hpp"
#include "taxeval/rng.hpp"

namespace taxeval {

namespace {

double sample_sd(std::span<const double> v) {
    const std::size_t n = v.size();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (static_cast<double>(n) - 1.0));
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    p = std::clamp(p, 0.0, 1.0);
    const double h = (static_cast<double>(n) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Shared tail of both bootstrap variants: turn the outer statistics and
// studentized pivots into a CI and a two-sided p-value.
MetricDelta finish_bootstrap(const std::string& name, double estimate,
                             std::vector<double>& outer_stats, std::vector<double>& pivots,
                             const BootstrapSettings& settings) {
    const double se = sample_sd(outer_stats);
    if (!(se > 0.0)) {
        const bool all_zero = estimate == 0.0 &&
                              std::all_of(outer_stats.begin(), outer_stats.end(),
                                          [](double v) { return v == 0.0; });
        if (all_zero) {
            // a perfectly null delta: dataB identical to dataA
            return {name, 0.0, 0.0, 0.0, 1.0, settings};
        }
        throw DegenerateStatistic();
    }

    std::sort(pivots.begin(), pivots.end());
    const double alpha = 1.0 - settings.level;
    const double t_hi = quantile_sorted(pivots, 1.0 - alpha / 2.0);
    const double t_lo = quantile_sorted(pivots, alpha / 2.0);

    MetricDelta out;
    out.statistic = name;
    out.estimate = estimate;
    out.ci_low = estimate - se * t_hi;
    out.ci_high = estimate - se * t_lo;
    out.settings = settings;

    // smallest level at which the pivot CI excludes zero
    const double t0 = estimate / se;
    const double b = static_cast<double>(pivots.size());
    double le = 0.0, ge = 0.0;
    for (double t : pivots) {
        if (t <= t0) le += 1.0;
        if (t >= t0) ge += 1.0;
    }
    out.p_value = std::min(1.0, 2.0 * std::min(le + 1.0, ge + 1.0) / (b + 1.0));
    return out;
}

double studentize(double stat, double center, std::span<const double> inner_stats) {
    const double se = sample_sd(inner_stats);
    if (se > 0.0) return (stat - center) / se;
    // flat inner distribution: pivot is 0 when the replicate agrees with the
    // point estimate, +/-huge otherwise so it lands in a tail
    if (stat == center) return 0.0;
    return stat > center ? 1e300 : -1e300;
}

void draw_with_replacement(RngStream& rng, std::size_t n, std::vector<std::size_t>& out) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.uniform_index(n);
}

} // namespace

MetricDelta studentized_bootstrap_delta(const std::string& name, const PairedStatistic& stat,
                                        std::size_t n, const BootstrapSettings& settings) {
    if (n == 0) throw EmptyInput("studentized_bootstrap_delta");
    if (settings.outer < 199) throw Error("bootstrap outer replicates must be >= 199");

    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    const double estimate = stat(identity);

    std::vector<double> outer_stats(settings.outer);
    std::vector<double> pivots(settings.outer);
    std::vector<std::size_t> idx, inner_idx;
    std::vector<double> inner_stats(settings.inner);

    for (std::size_t r = 0; r < settings.outer; ++r) {
        RngStream rng = RngStream::substream(settings.seed, 1 + r, 0);
        draw_with_replacement(rng, n, idx);
        outer_stats[r] = stat(idx);

        for (std::size_t j = 0; j < settings.inner; ++j) {
            RngStream inner_rng = RngStream::substream(settings.seed, 1 + r, 1 + j);
            inner_idx.resize(n);
            for (std::size_t i = 0; i < n; ++i) inner_idx[i] = idx[inner_rng.uniform_index(n)];
            inner_stats[j] = stat(inner_idx);
        }
        pivots[r] = studentize(outer_stats[r], estimate, inner_stats);
    }
    return finish_bootstrap(name, estimate, outer_stats, pivots, settings);
}

MetricDelta studentized_bootstrap_delta(const std::string& name, const TwoSampleStatistic& stat,
                                        std::size_t n_a, std::size_t n_b,
                                        const BootstrapSettings& settings) {
    if (n_a == 0 || n_b == 0) throw EmptyInput("studentized_bootstrap_delta");
    if (settings.outer < 199) throw Error("bootstrap outer replicates must be >= 199");

    std::vector<std::size_t> id_a(n_a), id_b(n_b);
    std::iota(id_a.begin(), id_a.end(), 0);
    std::iota(id_b.begin(), id_b.end(), 0);
    const double estimate = stat(id_a, id_b);

    std::vector<double> outer_stats(settings.outer);
    std::vector<double> pivots(settings.outer);
    std::vector<std::size_t> idx_a, idx_b, in_a, in_b;
    std::vector<double> inner_stats(settings.inner);

    for (std::size_t r = 0; r < settings.outer; ++r) {
        RngStream rng = RngStream::substream(settings.seed, 1 + r, 0);
        draw_with_replacement(rng, n_a, idx_a);
        draw_with_replacement(rng, n_b, idx_b);
        outer_stats[r] = stat(idx_a, idx_b);

        for (std::size_t j = 0; j < settings.inner; ++j) {
            RngStream inner_rng = RngStream::substream(settings.seed, 1 + r, 1 + j);
            in_a.resize(n_a);
            for (std::size_t i = 0; i < n_a; ++i) in_a[i] = idx_a[inner_rng.uniform_index(n_a)];
            in_b.resize(n_b);
            for (std::size_t i = 0; i < n_b; ++i) in_b[i] = idx_b[inner_rng.uniform_index(n_b)];
            inner_stats[j] = stat(in_a, in_b);
        }
        pivots[r] = studentize(outer_stats[r], estimate, inner_stats);
    }
    return finish_bootstrap(name, estimate, outer_stats, pivots, settings);
}

BhResult benjamini_hochberg(std::span<const double> p_values, double alpha) {
    const std::size_t m = p_values.size();
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error("benjamini_hochberg: p-value outside [0,1]");
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    // step-up: largest k with p(k) <= k*alpha/m rejects ranks 1..k
    std::size_t reject_upto = 0;
    for (std::size_t k = m; k >= 1; --k) {
        if (p_values[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) {
            reject_upto = k;
            break;
        }
    }

    BhResult result;
    result.rejected.assign(m, false);
    result.adjusted_p.assign(m, 1.0);
    for (std::size_t k = 0; k < reject_upto; ++k) result.rejected[order[k]] = true;

    double running = 1.0;
    for (std::size_t k = m; k >= 1; --k) {
        const double adj = p_values[order[k - 1]] * static_cast<double>(m) / static_cast<double>(k);
        running = std::min(running, adj);
        result.adjusted_p[order[k - 1]] = running;
        if (k == 1) break;
    }
    return result;
}

std::string pareto_class_name(ParetoClass c) {
    switch (c) {
        case ParetoClass::joint_gain: return "joint_gain";
        case ParetoClass::tradeoff: return "tradeoff";
        case ParetoClass::mixed_insignificant: return "mixed_insignificant";
    }
    return "unknown";
}

namespace {

struct Direction {
    bool improving = false;
    bool crossed_zero = false;
};

Direction improvement_of(const DirectedDelta& d) {
    const double after = d.baseline + d.delta.estimate;
    Direction out;
    switch (d.kind) {
        case MetricKind::mape:
        case MetricKind::rmse:
        case MetricKind::mae:
            out.improving = d.delta.estimate < 0.0;
            break;
        case MetricKind::prd:
            out.improving = std::abs(after - 1.0) < std::abs(d.baseline - 1.0);
            break;
        case MetricKind::log_coefficient:
        case MetricKind::suits_index:
            out.crossed_zero = (d.baseline < 0.0 && after > 0.0) || (d.baseline > 0.0 && after < 0.0);
            out.improving = !out.crossed_zero && std::abs(after) < std::abs(d.baseline);
            break;
    }
    return out;
}

} // namespace

ParetoOutcome pareto_classify(const std::string& county_id, const DirectedDelta& accuracy,
                              const DirectedDelta& fairness, bool accuracy_bh_significant,
                              bool fairness_bh_significant) {
    const Direction acc = improvement_of(accuracy);
    const Direction fair = improvement_of(fairness);

    ParetoOutcome out;
    out.county_id = county_id;
    out.accuracy = accuracy.delta;
    out.fairness = fairness.delta;
    out.accuracy_significant = accuracy_bh_significant;
    out.fairness_significant = fairness_bh_significant;
    out.accuracy_improving = acc.improving;
    out.fairness_improving = fair.improving;
    out.fairness_crossed_zero = fair.crossed_zero;

    if (accuracy_bh_significant && fairness_bh_significant) {
        if (acc.improving && fair.improving) {
            out.classification = ParetoClass::joint_gain;
        } else if (acc.improving != fair.improving) {
            out.classification = ParetoClass::tradeoff;
        } else {
            out.classification = ParetoClass::mixed_insignificant;
        }
    } else {
        out.classification = ParetoClass::mixed_insignificant;
    }
    return out;
}

std::vector<std::size_t> quantile_bin_labels(std::span<const double> x, std::size_t n_bins) {
    const std::size_t n = x.size();
    if (n_bins == 0) throw Error("quantile_bin_labels: n_bins must be >= 1");
    n_bins = std::min(n_bins, n); // fewer points than bins: reduce

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // stable rank: ties resolved by original index
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    std::vector<std::size_t> labels(n);
    for (std::size_t rank = 0; rank < n; ++rank) {
        labels[order[rank]] = rank * n_bins / n;
    }
    return labels;
}

BinnedSeries quantile_binscatter(std::span<const double> x, std::span<const double> y,
                                 std::size_t n_bins) {
    if (x.size() != y.size()) throw LengthMismatch("binscatter x vs y");
    if (x.empty()) throw EmptyInput("quantile_binscatter");

    const auto labels = quantile_bin_labels(x, n_bins);
    const std::size_t used = *std::max_element(labels.begin(), labels.end()) + 1;

    BinnedSeries series;
    series.bins.assign(used, Bin{});
    for (std::size_t b = 0; b < used; ++b) series.bins[b].key = static_cast<double>(b);
    for (std::size_t i = 0; i < x.size(); ++i) {
        Bin& bin = series.bins[labels[i]];
        bin.x_mean += x[i];
        bin.mean += y[i];
        bin.count += 1;
    }
    for (Bin& bin : series.bins) {
        bin.x_mean /= static_cast<double>(bin.count);
        bin.mean /= static_cast<double>(bin.count);
    }
    return series;
}

namespace {

double mape_points(std::span<const double> pred, std::span<const double> truth,
                   std::span<const std::size_t> idx) {
    double sum = 0.0;
    for (std::size_t i : idx) sum += std::abs(pred[i] - truth[i]) / truth[i];
    return sum / static_cast<double>(idx.size()) * 100.0;
}

Bin percentile_bootstrap_bin(const std::function<double(std::span<const std::size_t>)>& stat,
                             const std::vector<std::size_t>& members,
                             const BootstrapSettings& settings, std::uint64_t stream_tag) {
    Bin bin;
    bin.count = members.size();
    std::vector<std::size_t> identity = members;
    bin.mean = stat(identity);

    std::vector<double> reps(settings.outer);
    std::vector<std::size_t> draw(members.size());
    for (std::size_t r = 0; r < settings.outer; ++r) {
        RngStream rng = RngStream::substream(settings.seed, stream_tag, r);
        for (std::size_t i = 0; i < members.size(); ++i) {
            draw[i] = members[rng.uniform_index(members.size())];
        }
        reps[r] = stat(draw);
    }
    std::sort(reps.begin(), reps.end());
    const double alpha = 1.0 - settings.level;
    bin.ci_low = quantile_sorted(reps, alpha / 2.0);
    bin.ci_high = quantile_sorted(reps, 1.0 - alpha / 2.0);
    bin.has_ci = true;
    return bin;
}

} // namespace

QuintileImpact quintile_impact(std::span<const double> sale_price,
                               std::span<const double> baseline_pred,
                               std::span<const double> alt_pred,
                               const BootstrapSettings& settings,
                               std::span<const std::size_t> quintile_labels) {
    const std::size_t n = sale_price.size();
    if (baseline_pred.size() != n || alt_pred.size() != n) {
        throw LengthMismatch("quintile_impact inputs");
    }
    if (n == 0) throw EmptyInput("quintile_impact");

    std::vector<std::size_t> labels;
    if (quintile_labels.empty()) {
        labels = quantile_bin_labels(sale_price, 5);
    } else {
        labels.assign(quintile_labels.begin(), quintile_labels.end());
    }
    const std::size_t used = *std::max_element(labels.begin(), labels.end()) + 1;

    std::vector<std::vector<std::size_t>> members(used);
    for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(i);

    QuintileImpact impact;
    impact.mape_delta.x_name = "sale_price_quintile";
    impact.mape_delta.y_name = "mape_delta";
    impact.price_delta.x_name = "sale_price_quintile";
    impact.price_delta.y_name = "predicted_price_delta";

    auto mape_stat = [&](std::span<const std::size_t> idx) {
        return mape_points(alt_pred, sale_price, idx) - mape_points(baseline_pred, sale_price, idx);
    };
    auto price_stat = [&](std::span<const std::size_t> idx) {
        double sum = 0.0;
        for (std::size_t i : idx) sum += alt_pred[i] - baseline_pred[i];
        return sum / static_cast<double>(idx.size());
    };

    for (std::size_t q = 0; q < used; ++q) {
        if (members[q].empty()) continue;
        Bin m = percentile_bootstrap_bin(mape_stat, members[q], settings, 0x51 + 2 * q);
        Bin p = percentile_bootstrap_bin(price_stat, members[q], settings, 0x52 + 2 * q);
        double price_mean = 0.0;
        for (std::size_t i : members[q]) price_mean += sale_price[i];
        price_mean /= static_cast<double>(members[q].size());
        m.key = p.key = static_cast<double>(q + 1);
        m.x_mean = p.x_mean = price_mean;
        impact.mape_delta.bins.push_back(m);
        impact.price_delta.bins.push_back(p);
    }
    return impact;
}

BinnedSeries group_delta_curve(std::span<const double> attribute, std::span<const double> delta,
                               std::size_t n_bins, int poly_degree) {
    if (attribute.size() != delta.size()) throw LengthMismatch("group_delta_curve inputs");
    if (attribute.empty()) throw EmptyInput("group_delta_curve");

    BinnedSeries series = quantile_binscatter(attribute, delta, n_bins);
    for (Bin& bin : series.bins) bin.key = bin.x_mean; // attribute-bin midpoint role

    // least-squares polynomial on the raw points
    const auto n = static_cast<Eigen::Index>(attribute.size());
    if (n >= poly_degree + 1) {
        Eigen::MatrixXd design(n, poly_degree + 1);
        Eigen::VectorXd target(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double pow = 1.0;
            for (int d = 0; d <= poly_degree; ++d) {
                design(i, d) = pow;
                pow *= attribute[static_cast<std::size_t>(i)];
            }
            target(i) = delta[static_cast<std::size_t>(i)];
        }
        Eigen::VectorXd coef = design.colPivHouseholderQr().solve(target);
        series.fit_coefficients.assign(coef.data(), coef.data() + coef.size());
    }
    return series;
}

double quantile_interpolated(std::span<const double> values, double p) {
    if (values.empty()) throw EmptyInput("quantile_interpolated");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, p);
}

std::vector<std::size_t> censor_for_display(std::span<const double> values, double lo_pct,
                                            double hi_pct) {
    std::vector<std::size_t> kept;
    if (values.empty()) return kept;
    const double lo = quantile_interpolated(values, lo_pct);
    const double hi = quantile_interpolated(values, hi_pct);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= lo && values[i] <= hi) kept.push_back(i);
    }
    return kept;
}

} // namespace taxeval
