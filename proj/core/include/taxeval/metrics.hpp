#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "taxeval/domain.hpp"

namespace taxeval {

/// Accuracy of assessments against sale prices. Percent values are in
/// points (7.5 means 7.5%).
struct AccuracyReport {
    double mape = 0.0; // percent
    double rmse = 0.0; // currency
    double mae = 0.0;  // currency
    std::size_t n = 0;
};

struct SlopeFit {
    double slope = 0.0;
    double std_error = 0.0;
};

/// The three regressivity metrics of the ratio study. Negative
/// log_coefficient / suits_index and prd above 1.03 indicate regressivity.
struct RegressivityReport {
    double log_coefficient = 0.0;
    double log_coefficient_se = 0.0;
    double suits_index = 0.0;
    double prd = 1.0;
    std::size_t n = 0;
};

enum class MetricKind { mape, rmse, mae, log_coefficient, suits_index, prd };

std::string metric_name(MetricKind kind);
std::optional<MetricKind> metric_kind_from_name(const std::string& name);

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

struct RegressivityFlag {
    MetricKind kind;
    double value = 0.0;
    bool is_regressive = false;
    std::string rule; // threshold rule applied
};

/// Statutory vs effective tax rate comparison; the two percent errors are
/// equal by construction when assessments carry no exemptions.
struct EtrComparison {
    double statutory_rate = 0.0;
    double effective_rate = 0.0;
    double assessment_pct_error = 0.0; // signed percent
    double rate_pct_error = 0.0;       // signed percent
};

// All means below are weight-weighted when observations carry weights
// (absent weights count as 1).

/// mean(|A - S| / S) * 100
double mape(std::span<const RatioObservation> obs);
/// sqrt(mean((A - S)^2))
double rmse(std::span<const RatioObservation> obs);
/// mean(|A - S|)
double mae(std::span<const RatioObservation> obs);

AccuracyReport accuracy_report(std::span<const RatioObservation> obs);

/// OLS (WLS when weighted) of log(A/S) on log(S); slope and classical
/// standard error. Requires n >= 3 and positive variance in log(S).
SlopeFit log_coefficient(std::span<const RatioObservation> obs);

/// Lorenz-style proportionality index: sort ascending by price, accumulate
/// percent shares of price (x) and assessed value (y), take the trapezoidal
/// area under the curve anchored at (0,0), and return 1 - area/5000.
/// Zero is proportional; negative is regressive.
double suits_index(std::span<const RatioObservation> obs);

/// Mean ratio over (mean assessed / mean price). Above 1.03 flags regressivity.
double prd(std::span<const RatioObservation> obs);

RegressivityReport regressivity_report(std::span<const RatioObservation> obs);

/// Applies the threshold rule for the given metric. log_coefficient and
/// suits_index need a confidence interval to establish "significantly
/// below zero"; prd is a strict cutoff and ignores the interval.
RegressivityFlag classify_regressive(MetricKind kind, double value,
                                     std::optional<Interval> ci = std::nullopt);

/// effective rate = statutory * assessed / price; also reports the
/// assessment percent error and the rate percent error, which coincide.
EtrComparison etr_comparison(double assessed, double price, double statutory_rate);

} // namespace taxeval
