#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "taxeval/errors.hpp"
#include "taxeval/rng.hpp"
#include "taxeval/stats.hpp"

using namespace taxeval;

namespace {

// brute-force step-up rule: try every k from m down, reject ranks 1..k at the
// largest k whose order statistic clears k*alpha/m
std::vector<bool> bh_oracle(const std::vector<double>& p, double alpha) {
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<bool> rejected(m, false);
    for (std::size_t k = m; k >= 1; --k) {
        if (p[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) {
            for (std::size_t i = 0; i < k; ++i) rejected[order[i]] = true;
            break;
        }
        if (k == 1) break;
    }
    return rejected;
}

MetricDelta mean_delta_paired(const std::vector<double>& a, const std::vector<double>& b,
                              const BootstrapSettings& settings) {
    PairedStatistic stat = [&](std::span<const std::size_t> idx) {
        double sum = 0.0;
        for (std::size_t i : idx) sum += b[i] - a[i];
        return sum / static_cast<double>(idx.size());
    };
    return studentized_bootstrap_delta("mean_delta", stat, a.size(), settings);
}

} // namespace

TEST_SUITE("stats") {

TEST_CASE("benjamini-hochberg worked example rejects the first two") {
    const std::vector<double> p = {0.01, 0.02, 0.04, 0.2};
    const BhResult r = benjamini_hochberg(p, 0.05);
    CHECK(r.rejected == std::vector<bool>{true, true, false, false});
}

TEST_CASE("benjamini-hochberg extremes") {
    const std::vector<double> zeros = {0.0, 0.0, 0.0};
    const std::vector<double> ones = {1.0, 1.0, 1.0};
    CHECK(benjamini_hochberg(zeros, 0.05).rejected == std::vector<bool>{true, true, true});
    CHECK(benjamini_hochberg(ones, 0.05).rejected == std::vector<bool>{false, false, false});
    CHECK_THROWS_AS(benjamini_hochberg(std::vector<double>{1.2}, 0.05), Error);
}

TEST_CASE("adjusted p-values are monotone in p-value rank") {
    RngStream rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 1 + rng.uniform_index(20);
        std::vector<double> p(m);
        for (double& x : p) x = rng.uniform01();
        const BhResult r = benjamini_hochberg(p, 0.05);

        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
        for (std::size_t k = 1; k < m; ++k) {
            CHECK(r.adjusted_p[order[k]] >= r.adjusted_p[order[k - 1]]);
        }
        for (double adj : r.adjusted_p) {
            CHECK(adj >= 0.0);
            CHECK(adj <= 1.0);
        }
    }
}

TEST_CASE("benjamini-hochberg matches the brute-force oracle") {
    RngStream rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = 1 + rng.uniform_index(20);
        std::vector<double> p(m);
        for (double& x : p) {
            // cluster mass near the decision boundary to stress the rule
            x = rng.uniform01() < 0.5 ? rng.uniform(0.0, 0.1) : rng.uniform01();
        }
        const double alpha = rng.uniform(0.01, 0.2);
        CHECK(benjamini_hochberg(p, alpha).rejected == bh_oracle(p, alpha));
    }
}

TEST_CASE("identical data gives a null delta with p of one") {
    RngStream rng(13);
    std::vector<double> a(80);
    for (double& x : a) x = rng.normal();
    BootstrapSettings settings;
    settings.outer = 199;
    settings.inner = 20;
    settings.seed = 7;
    const MetricDelta d = mean_delta_paired(a, a, settings);
    CHECK(d.estimate == 0.0);
    CHECK(d.ci_low == 0.0);
    CHECK(d.ci_high == 0.0);
    CHECK(d.p_value == 1.0);
}

TEST_CASE("constant nonzero delta is degenerate") {
    std::vector<double> a(50, 3.0), b(50, 3.5);
    BootstrapSettings settings;
    settings.outer = 199;
    settings.inner = 20;
    settings.seed = 7;
    CHECK_THROWS_AS(mean_delta_paired(a, b, settings), DegenerateStatistic);
}

TEST_CASE("bootstrap is deterministic for a fixed seed") {
    RngStream rng(14);
    std::vector<double> a(120), b(120);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = a[i] + 0.3 + 0.4 * rng.normal();
    }
    BootstrapSettings settings;
    settings.outer = 199;
    settings.inner = 25;
    settings.seed = 99;
    const MetricDelta d1 = mean_delta_paired(a, b, settings);
    const MetricDelta d2 = mean_delta_paired(a, b, settings);
    CHECK(d1.ci_low == d2.ci_low);
    CHECK(d1.ci_high == d2.ci_high);
    CHECK(d1.p_value == d2.p_value);

    settings.seed = 100;
    const MetricDelta d3 = mean_delta_paired(a, b, settings);
    CHECK(d1.ci_low != d3.ci_low);
}

TEST_CASE("independent-mode CI covers a detectable shift and excludes zero") {
    RngStream rng(15);
    const std::size_t n = 400;
    std::vector<double> a(n), b(n);
    const double shift = 5.0 / std::sqrt(static_cast<double>(n)); // 5 sd of the mean
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal() + shift;
    }
    TwoSampleStatistic stat = [&](std::span<const std::size_t> ia,
                                  std::span<const std::size_t> ib) {
        double ma = 0.0, mb = 0.0;
        for (std::size_t i : ia) ma += a[i];
        for (std::size_t i : ib) mb += b[i];
        return mb / static_cast<double>(ib.size()) - ma / static_cast<double>(ia.size());
    };
    BootstrapSettings settings;
    settings.outer = 399;
    settings.inner = 30;
    settings.seed = 21;
    const MetricDelta d = studentized_bootstrap_delta("shift", stat, n, n, settings);
    CHECK(d.ci_low <= shift);
    CHECK(d.ci_high >= shift * 0.2); // the interval sits around the estimate
    CHECK(d.ci_low > 0.0);           // excludes zero
    CHECK(d.p_value < 0.05);
}

TEST_CASE("pareto classification on the spec cases") {
    MetricDelta acc{"mape_delta", -2.0, -3.0, -1.0, 0.001, {}};
    MetricDelta fair_gain{"prd_delta", -0.02, -0.03, -0.01, 0.002, {}};
    MetricDelta fair_loss{"prd_delta", 0.02, 0.01, 0.03, 0.002, {}};

    const ParetoOutcome joint = pareto_classify(
        "c1", {MetricKind::mape, 14.0, acc}, {MetricKind::prd, 1.08, fair_gain}, true, true);
    CHECK(joint.classification == ParetoClass::joint_gain);

    const ParetoOutcome tradeoff = pareto_classify(
        "c2", {MetricKind::mape, 14.0, acc}, {MetricKind::prd, 1.08, fair_loss}, true, true);
    CHECK(tradeoff.classification == ParetoClass::tradeoff);

    const ParetoOutcome insig = pareto_classify(
        "c3", {MetricKind::mape, 14.0, acc}, {MetricKind::prd, 1.08, fair_gain}, true, false);
    CHECK(insig.classification == ParetoClass::mixed_insignificant);
}

TEST_CASE("slope-style metrics improve toward zero and flag crossings") {
    MetricDelta toward{"lc_delta", 0.03, 0.02, 0.04, 0.001, {}};
    const ParetoOutcome improving = pareto_classify(
        "c", {MetricKind::mape, 10.0, MetricDelta{"m", -1.0, -2.0, -0.5, 0.001, {}}},
        {MetricKind::log_coefficient, -0.05, toward}, true, true);
    CHECK(improving.fairness_improving);
    CHECK_FALSE(improving.fairness_crossed_zero);
    CHECK(improving.classification == ParetoClass::joint_gain);

    MetricDelta overshoot{"lc_delta", 0.08, 0.06, 0.10, 0.001, {}};
    const ParetoOutcome crossed = pareto_classify(
        "c", {MetricKind::mape, 10.0, MetricDelta{"m", -1.0, -2.0, -0.5, 0.001, {}}},
        {MetricKind::log_coefficient, -0.05, overshoot}, true, true);
    CHECK(crossed.fairness_crossed_zero);
    CHECK_FALSE(crossed.fairness_improving); // flagged, not auto-counted as a gain
}

TEST_CASE("classification is symmetric in the two metric arguments") {
    RngStream rng(16);
    for (int trial = 0; trial < 100; ++trial) {
        MetricDelta a{"a", rng.normal(), 0, 0, rng.uniform01(), {}};
        MetricDelta b{"b", rng.normal(), 0, 0, rng.uniform01(), {}};
        const DirectedDelta da{MetricKind::mape, 10.0, a};
        const DirectedDelta db{MetricKind::rmse, 20.0, b};
        const bool sig_a = rng.uniform01() < 0.5;
        const bool sig_b = rng.uniform01() < 0.5;
        const ParetoOutcome fwd = pareto_classify("x", da, db, sig_a, sig_b);
        const ParetoOutcome rev = pareto_classify("x", db, da, sig_b, sig_a);
        CHECK(fwd.classification == rev.classification);
    }
}

TEST_CASE("binscatter with one point per bin") {
    std::vector<double> x(100), y(100);
    RngStream rng(17);
    for (std::size_t i = 0; i < 100; ++i) {
        x[i] = rng.uniform01();
        y[i] = 2.0 * x[i];
    }
    const BinnedSeries s = quantile_binscatter(x, y, 100);
    REQUIRE(s.bins.size() == 100);
    for (const Bin& b : s.bins) CHECK(b.count == 1);
    for (std::size_t i = 1; i < s.bins.size(); ++i) CHECK(s.bins[i].mean > s.bins[i - 1].mean);
}

TEST_CASE("binscatter bin counts partition the data") {
    RngStream rng(18);
    std::vector<double> x(237), y(237);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
    }
    const BinnedSeries s = quantile_binscatter(x, y, 100);
    std::size_t total = 0;
    for (const Bin& b : s.bins) total += b.count;
    CHECK(total == x.size());
}

TEST_CASE("duplicate x values get deterministic stable-rank bins") {
    const std::vector<double> x = {1.0, 1.0, 1.0, 1.0};
    const std::vector<double> y = {10.0, 20.0, 30.0, 40.0};
    const auto labels = quantile_bin_labels(x, 2);
    // stable rank: earlier input index gets the earlier rank
    CHECK(labels == std::vector<std::size_t>{0, 0, 1, 1});
    const auto again = quantile_bin_labels(x, 2);
    CHECK(labels == again);
}

TEST_CASE("fewer points than bins reduces the bin count") {
    const std::vector<double> x = {3.0, 1.0, 2.0};
    const std::vector<double> y = {30.0, 10.0, 20.0};
    const BinnedSeries s = quantile_binscatter(x, y, 100);
    CHECK(s.bins.size() == 3);
}

TEST_CASE("quintile impact is zero when models agree") {
    RngStream rng(19);
    std::vector<double> price(200), pred(200);
    for (std::size_t i = 0; i < price.size(); ++i) {
        price[i] = std::exp(11.0 + rng.normal(0.0, 0.4));
        pred[i] = price[i] * (1.0 + 0.1 * rng.normal());
    }
    BootstrapSettings settings;
    settings.outer = 199;
    settings.seed = 3;
    const QuintileImpact qi = quintile_impact(price, pred, pred, settings);
    REQUIRE(qi.mape_delta.bins.size() == 5);
    for (const Bin& b : qi.mape_delta.bins) CHECK(b.mean == 0.0);
    for (const Bin& b : qi.price_delta.bins) CHECK(b.mean == 0.0);
}

TEST_CASE("perturbing only the bottom quintile moves only bin one") {
    RngStream rng(20);
    const std::size_t n = 500;
    std::vector<double> price(n), base(n), alt(n);
    for (std::size_t i = 0; i < n; ++i) {
        price[i] = std::exp(11.0 + rng.normal(0.0, 0.5));
        base[i] = price[i];
        alt[i] = price[i];
    }
    const auto labels = quantile_bin_labels(price, 5);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == 0) alt[i] = base[i] * 0.9; // lower predictions in Q1 only
    }
    BootstrapSettings settings;
    settings.outer = 199;
    settings.seed = 4;
    const QuintileImpact qi = quintile_impact(price, base, alt, settings);
    CHECK(qi.price_delta.bins[0].mean < 0.0);
    for (std::size_t q = 1; q < 5; ++q) CHECK(qi.price_delta.bins[q].mean == 0.0);
}

TEST_CASE("mean-reverting baseline vs exact alternative improves the tails most") {
    RngStream rng(21);
    const std::size_t n = 2000;
    std::vector<double> price(n), base(n), alt(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = 12.0 + rng.normal(0.0, 0.5);
        price[i] = std::exp(s);
        base[i] = std::exp(12.0 + 0.5 * (s - 12.0)); // regresses to the mean
        alt[i] = price[i];
    }
    BootstrapSettings settings;
    settings.outer = 199;
    settings.seed = 5;
    const QuintileImpact qi = quintile_impact(price, base, alt, settings);
    const auto& bins = qi.mape_delta.bins;
    REQUIRE(bins.size() == 5);
    for (const Bin& b : bins) CHECK(b.mean < 0.0);
    CHECK(bins[0].mean < bins[2].mean); // largest gains in the extreme quintiles
    CHECK(bins[4].mean < bins[2].mean);
}

TEST_CASE("group curve: constant deltas fit a flat polynomial") {
    RngStream rng(22);
    std::vector<double> attr(60), delta(60, 1.5);
    for (double& a : attr) a = rng.uniform01();
    const BinnedSeries s = group_delta_curve(attr, delta, 10, 2);
    REQUIRE(s.fit_coefficients.size() == 3);
    CHECK(s.fit_coefficients[0] == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(s.fit_coefficients[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(s.fit_coefficients[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    for (const Bin& b : s.bins) CHECK(b.mean == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("group curve recovers a linear relation with no quadratic term") {
    RngStream rng(23);
    std::vector<double> attr(120), delta(120);
    for (std::size_t i = 0; i < attr.size(); ++i) {
        attr[i] = rng.uniform01();
        delta[i] = -1.0 + 4.0 * attr[i]; // exactly linear
    }
    const BinnedSeries s = group_delta_curve(attr, delta, 10, 2);
    REQUIRE(s.fit_coefficients.size() == 3);
    CHECK(s.fit_coefficients[0] == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(s.fit_coefficients[1] == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(s.fit_coefficients[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
}

TEST_CASE("group curve crosses zero when the deltas change sign") {
    RngStream rng(24);
    std::vector<double> attr(300), delta(300);
    for (std::size_t i = 0; i < attr.size(); ++i) {
        attr[i] = rng.uniform01();
        // positive below ~0.3, negative above, as in the block-group story
        delta[i] = 3.0 * (0.3 - attr[i]) + 0.1 * rng.normal();
    }
    const BinnedSeries s = group_delta_curve(attr, delta, 15, 2);
    REQUIRE(s.fit_coefficients.size() == 3);
    const auto fit_at = [&](double x) {
        return s.fit_coefficients[0] + s.fit_coefficients[1] * x + s.fit_coefficients[2] * x * x;
    };
    CHECK(fit_at(0.05) > 0.0);
    CHECK(fit_at(0.95) < 0.0);
}

TEST_CASE("censoring keeps 96 of 100 uniform points") {
    RngStream rng(25);
    std::vector<double> v(100);
    for (double& x : v) x = rng.uniform01();
    CHECK(censor_for_display(v).size() == 96);
}

TEST_CASE("censoring edge cases") {
    CHECK(censor_for_display(std::vector<double>{}).empty());
    const std::vector<double> equal(17, 4.2);
    CHECK(censor_for_display(equal).size() == 17);
}

TEST_CASE("censoring drops, never clamps") {
    std::vector<double> v(100);
    RngStream rng(26);
    for (double& x : v) x = rng.normal();
    const auto kept = censor_for_display(v);
    const double lo = quantile_interpolated(v, 0.02);
    const double hi = quantile_interpolated(v, 0.98);
    for (std::size_t i : kept) {
        CHECK(v[i] >= lo);
        CHECK(v[i] <= hi);
    }
}

} // TEST_SUITE
