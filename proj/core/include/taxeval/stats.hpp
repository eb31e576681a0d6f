#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "taxeval/metrics.hpp"

namespace taxeval {

struct BootstrapSettings {
    std::size_t outer = 999;
    std::size_t inner = 100;
    double level = 0.95;
    std::uint64_t seed = 0;
};

/// A (statistic, CI, p-value) triple for a model-B-minus-model-A change.
struct MetricDelta {
    std::string statistic;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0; // two-sided, from inverting the studentized pivot
    BootstrapSettings settings;
};

/// Statistic over a resample: receives row indices into the shared test set
/// (paired mode) and returns the model-B-minus-model-A delta.
using PairedStatistic = std::function<double(std::span<const std::size_t>)>;

/// Statistic over two independently resampled index sets.
using TwoSampleStatistic =
    std::function<double(std::span<const std::size_t>, std::span<const std::size_t>)>;

/// Studentized bootstrap CI and p-value for a paired delta statistic.
/// Each outer resample's statistic is standardized by an inner-bootstrap
/// standard error; the CI inverts the pivot distribution. Deterministic
/// given settings.seed. Requires outer >= 199.
MetricDelta studentized_bootstrap_delta(const std::string& name, const PairedStatistic& stat,
                                        std::size_t n, const BootstrapSettings& settings);

/// Independent-resampling variant: rows of the two samples resample separately.
MetricDelta studentized_bootstrap_delta(const std::string& name, const TwoSampleStatistic& stat,
                                        std::size_t n_a, std::size_t n_b,
                                        const BootstrapSettings& settings);

struct BhResult {
    std::vector<bool> rejected;
    std::vector<double> adjusted_p; // monotone in p-value rank
};

/// Benjamini-Hochberg step-up rule at level alpha.
BhResult benjamini_hochberg(std::span<const double> p_values, double alpha);

enum class ParetoClass { joint_gain, tradeoff, mixed_insignificant };

std::string pareto_class_name(ParetoClass c);

/// A metric delta together with what it takes to judge improvement:
/// the metric kind and the baseline (model A) value.
struct DirectedDelta {
    MetricKind kind;
    double baseline = 0.0;
    MetricDelta delta;
};

struct ParetoOutcome {
    std::string county_id;
    MetricDelta accuracy;
    MetricDelta fairness;
    bool accuracy_significant = false; // post-BH
    bool fairness_significant = false;
    bool accuracy_improving = false;
    bool fairness_improving = false;
    bool fairness_crossed_zero = false; // sign flip flagged, not counted as a gain
    ParetoClass classification = ParetoClass::mixed_insignificant;
};

/// joint_gain iff both deltas BH-significant and both improving; tradeoff iff
/// both significant and the directions oppose; everything else is
/// mixed_insignificant. Improvement directions: error metrics fall; prd moves
/// toward 1; log_coefficient / suits_index move toward 0 without crossing it.
ParetoOutcome pareto_classify(const std::string& county_id, const DirectedDelta& accuracy,
                              const DirectedDelta& fairness, bool accuracy_bh_significant,
                              bool fairness_bh_significant);

struct Bin {
    double key = 0.0;    // quantile index, quintile, or attribute-bin mean
    double x_mean = 0.0; // mean of the binned x within the bin
    double mean = 0.0;   // mean of y within the bin
    std::size_t count = 0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool has_ci = false;
};

struct BinnedSeries {
    std::string x_name;
    std::string y_name;
    std::vector<Bin> bins;
    std::vector<double> fit_coefficients; // ascending powers; empty if no fit
};

/// Equal-count quantile bins of x (stable-rank tie assignment), per-bin mean
/// of y. Bins are reduced to n when there are fewer points than bins.
BinnedSeries quantile_binscatter(std::span<const double> x, std::span<const double> y,
                                 std::size_t n_bins = 100);

/// Stable-rank equal-count bin label per point (0 .. n_bins-1).
std::vector<std::size_t> quantile_bin_labels(std::span<const double> x, std::size_t n_bins);

/// Per sale-price-quintile changes in MAPE (points) and mean predicted price,
/// with percentile-bootstrap CIs. Quintiles come from `quintile_labels` when
/// provided (values 0..4), else from stable-rank quintiles of sale_price.
struct QuintileImpact {
    BinnedSeries mape_delta;
    BinnedSeries price_delta;
};
QuintileImpact quintile_impact(std::span<const double> sale_price,
                               std::span<const double> baseline_pred,
                               std::span<const double> alt_pred,
                               const BootstrapSettings& settings,
                               std::span<const std::size_t> quintile_labels = {});

/// Binned means of a per-block-group delta against a block-group attribute,
/// plus a least-squares polynomial fit (degree `poly_degree`) on the raw points.
BinnedSeries group_delta_curve(std::span<const double> attribute, std::span<const double> delta,
                               std::size_t n_bins, int poly_degree = 2);

/// Indices of points kept for plot emission: drops (not clamps) values outside
/// the [lo_pct, hi_pct] quantiles (linear-interpolation quantiles, inclusive
/// bounds). Analysis outputs are never censored.
std::vector<std::size_t> censor_for_display(std::span<const double> values, double lo_pct = 0.02,
                                            double hi_pct = 0.98);

/// Linear-interpolation (type-7) quantile of unsorted data, p in [0,1].
double quantile_interpolated(std::span<const double> values, double p);

} // namespace taxeval
