#include "taxeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "taxeval/errors.hpp"

namespace taxeval {

namespace {

double weight_of(const RatioObservation& o) { return o.weight ? *o.weight : 1.0; }

void require_nonempty(std::span<const RatioObservation> obs, const char* op) {
    if (obs.empty()) throw EmptyInput(op);
}

} // namespace

std::string metric_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::mape: return "mape";
        case MetricKind::rmse: return "rmse";
        case MetricKind::mae: return "mae";
        case MetricKind::log_coefficient: return "log_coefficient";
        case MetricKind::suits_index: return "suits_index";
        case MetricKind::prd: return "prd";
    }
    return "unknown";
}

std::optional<MetricKind> metric_kind_from_name(const std::string& name) {
    for (MetricKind kind : {MetricKind::mape, MetricKind::rmse, MetricKind::mae,
                            MetricKind::log_coefficient, MetricKind::suits_index, MetricKind::prd}) {
        if (metric_name(kind) == name) return kind;
    }
    return std::nullopt;
}

double mape(std::span<const RatioObservation> obs) {
    require_nonempty(obs, "mape");
    double num = 0.0, den = 0.0;
    for (const auto& o : obs) {
        const double w = weight_of(o);
        num += w * std::abs(o.assessed - o.price) / o.price;
        den += w;
    }
    return num / den * 100.0;
}

double rmse(std::span<const RatioObservation> obs) {
    require_nonempty(obs, "rmse");
    double num = 0.0, den = 0.0;
    for (const auto& o : obs) {
        const double w = weight_of(o);
        const double e = o.assessed - o.price;
        num += w * e * e;
        den += w;
    }
    return std::sqrt(num / den);
}

double mae(std::span<const RatioObservation> obs) {
    require_nonempty(obs, "mae");
    double num = 0.0, den = 0.0;
    for (const auto& o : obs) {
        const double w = weight_of(o);
        num += w * std::abs(o.assessed - o.price);
        den += w;
    }
    return num / den;
}

AccuracyReport accuracy_report(std::span<const RatioObservation> obs) {
    return {mape(obs), rmse(obs), mae(obs), obs.size()};
}

SlopeFit log_coefficient(std::span<const RatioObservation> obs) {
    if (obs.size() < 3) throw EmptyInput("log_coefficient needs n >= 3");

    const std::size_t n = obs.size();
    double wsum = 0.0, xbar = 0.0, ybar = 0.0;
    for (const auto& o : obs) {
        const double w = weight_of(o);
        wsum += w;
        xbar += w * std::log(o.price);
        ybar += w * std::log(o.ratio);
    }
    xbar /= wsum;
    ybar /= wsum;

    double sxx = 0.0, sxy = 0.0;
    for (const auto& o : obs) {
        const double w = weight_of(o);
        const double dx = std::log(o.price) - xbar;
        const double dy = std::log(o.ratio) - ybar;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
    }
    if (!(sxx > 0.0)) throw DegenerateRegressor("log(price) has zero variance");

    const double slope = sxy / sxx;
    double rss = 0.0;
    for (const auto& o : obs) {
        const double w = weight_of(o);
        const double resid = (std::log(o.ratio) - ybar) - slope * (std::log(o.price) - xbar);
        rss += w * resid * resid;
    }
    const double sigma2 = rss / (static_cast<double>(n) - 2.0);
    return {slope, std::sqrt(sigma2 / sxx)};
}

double suits_index(std::span<const RatioObservation> obs) {
    if (obs.size() < 2) throw EmptyInput("suits_index needs n >= 2");

    std::vector<std::size_t> order(obs.size());
    std::iota(order.begin(), order.end(), 0);
    // ascending by price; ties keep input order
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return obs[a].price < obs[b].price; });

    double price_total = 0.0, assessed_total = 0.0;
    for (const auto& o : obs) {
        const double w = weight_of(o);
        price_total += w * o.price;
        assessed_total += w * o.assessed;
    }

    // cumulative percent shares, trapezoid from the (0,0) anchor
    double area = 0.0;
    double x_prev = 0.0, y_prev = 0.0;
    double price_cum = 0.0, assessed_cum = 0.0;
    for (std::size_t idx : order) {
        const double w = weight_of(obs[idx]);
        price_cum += w * obs[idx].price;
        assessed_cum += w * obs[idx].assessed;
        const double x = price_cum / price_total * 100.0;
        const double y = assessed_cum / assessed_total * 100.0;
        area += 0.5 * (y + y_prev) * (x - x_prev);
        x_prev = x;
        y_prev = y;
    }
    return 1.0 - area / 5000.0;
}

double prd(std::span<const RatioObservation> obs) {
    require_nonempty(obs, "prd");
    double wsum = 0.0, ratio_mean = 0.0, assessed_mean = 0.0, price_mean = 0.0;
    for (const auto& o : obs) {
        const double w = weight_of(o);
        wsum += w;
        ratio_mean += w * o.ratio;
        assessed_mean += w * o.assessed;
        price_mean += w * o.price;
    }
    ratio_mean /= wsum;
    assessed_mean /= wsum;
    price_mean /= wsum;
    return ratio_mean / (assessed_mean / price_mean);
}

RegressivityReport regressivity_report(std::span<const RatioObservation> obs) {
    const SlopeFit lc = log_coefficient(obs);
    return {lc.slope, lc.std_error, suits_index(obs), prd(obs), obs.size()};
}

RegressivityFlag classify_regressive(MetricKind kind, double value, std::optional<Interval> ci) {
    switch (kind) {
        case MetricKind::log_coefficient:
        case MetricKind::suits_index: {
            // flagged when significantly below zero: the interval must exclude 0
            const bool significant = ci && ci->high < 0.0;
            return {kind, value, value < 0.0 && significant, "<0 (significantly)"};
        }
        case MetricKind::prd:
            return {kind, value, value > 1.03, "> 1.03 (strictly)"};
        default:
            throw Error("classify_regressive: " + metric_name(kind) + " is not a regressivity metric");
    }
}

EtrComparison etr_comparison(double assessed, double price, double statutory_rate) {
    if (!(assessed > 0.0) || !(price > 0.0) || !(statutory_rate > 0.0)) {
        throw Error("etr_comparison: inputs must be positive");
    }
    const double effective = statutory_rate * assessed / price;
    return {statutory_rate, effective, (assessed - price) / price * 100.0,
            (effective - statutory_rate) / statutory_rate * 100.0};
}

} // namespace taxeval
