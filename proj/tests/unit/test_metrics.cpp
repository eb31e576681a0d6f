#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "taxeval/errors.hpp"
#include "taxeval/metrics.hpp"
#include "taxeval/rng.hpp"

using namespace taxeval;

namespace {

RatioObservation obs_of(double assessed, double price) {
    return {assessed, price, assessed / price, std::nullopt};
}

// Independent O(n) cumulative-sum oracle for the Suits index: running
// percent shares, explicit trapezoid sum from the (0,0) anchor.
double suits_oracle(std::vector<RatioObservation> v) {
    std::stable_sort(v.begin(), v.end(),
                     [](const RatioObservation& a, const RatioObservation& b) {
                         return a.price < b.price;
                     });
    double total_price = 0.0, total_assessed = 0.0;
    for (const auto& o : v) {
        const double w = o.weight ? *o.weight : 1.0;
        total_price += w * o.price;
        total_assessed += w * o.assessed;
    }
    double area = 0.0, cum_price = 0.0, cum_assessed = 0.0, prev_x = 0.0, prev_y = 0.0;
    for (const auto& o : v) {
        const double w = o.weight ? *o.weight : 1.0;
        cum_price += w * o.price;
        cum_assessed += w * o.assessed;
        const double x = 100.0 * cum_price / total_price;
        const double y = 100.0 * cum_assessed / total_assessed;
        area += (x - prev_x) * (y + prev_y) / 2.0;
        prev_x = x;
        prev_y = y;
    }
    return (5000.0 - area) / 5000.0;
}

std::vector<RatioObservation> power_law_data(double scale, double exponent, int n,
                                             std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<RatioObservation> out;
    for (int i = 0; i < n; ++i) {
        const double log_price = 11.0 + 1.5 * rng.uniform01();
        const double price = std::exp(log_price);
        const double assessed = scale * std::pow(price, exponent);
        out.push_back(obs_of(assessed, price));
    }
    return out;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("mape on the two-point example") {
    const std::vector<RatioObservation> v = {obs_of(110, 100), obs_of(95, 100)};
    CHECK(mape(v) == doctest::Approx(7.5).epsilon(1e-12));
}

TEST_CASE("perfect assessments give zero error everywhere") {
    std::vector<RatioObservation> v;
    for (int i = 1; i <= 5; ++i) v.push_back(obs_of(1000.0 * i, 1000.0 * i));
    CHECK(mape(v) == 0.0);
    CHECK(rmse(v) == 0.0);
    CHECK(mae(v) == 0.0);
}

TEST_CASE("rmse and mae on a single point") {
    const std::vector<RatioObservation> v = {obs_of(110, 100)};
    CHECK(rmse(v) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(mae(v) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("weighted mape uses weight-weighted means") {
    std::vector<RatioObservation> v = {obs_of(110, 100), obs_of(95, 100)};
    v[0].weight = 1.0;
    v[1].weight = 3.0;
    // (1*10 + 3*5) / 4 = 6.25
    CHECK(mape(v) == doctest::Approx(6.25).epsilon(1e-12));
}

TEST_CASE("empty input throws") {
    const std::vector<RatioObservation> v;
    CHECK_THROWS_AS(mape(v), EmptyInput);
    CHECK_THROWS_AS(prd(v), EmptyInput);
}

TEST_CASE("log coefficient on exact power-law data") {
    // assessed = price^0.8 on price = e^1..e^5: slope is exactly -0.2
    std::vector<RatioObservation> v;
    for (int k = 1; k <= 5; ++k) {
        const double price = std::exp(static_cast<double>(k));
        v.push_back(obs_of(std::pow(price, 0.8), price));
    }
    const SlopeFit fit = log_coefficient(v);
    CHECK(fit.slope == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(fit.std_error == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("constant ratio gives zero slope") {
    std::vector<RatioObservation> v;
    for (int k = 1; k <= 6; ++k) v.push_back(obs_of(0.9 * 40000.0 * k, 40000.0 * k));
    CHECK(log_coefficient(v).slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate regressor when all prices equal") {
    std::vector<RatioObservation> v = {obs_of(90, 100), obs_of(95, 100), obs_of(105, 100)};
    CHECK_THROWS_AS(log_coefficient(v), DegenerateRegressor);
}

TEST_CASE("power-law oracle: slope equals exponent minus one") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        for (double exponent : {0.7, 0.9, 1.0, 1.15}) {
            const auto v = power_law_data(1.3, exponent, 200, seed);
            CHECK(log_coefficient(v).slope == doctest::Approx(exponent - 1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("suits index is zero for proportional assessments") {
    std::vector<RatioObservation> v;
    RngStream rng(5);
    for (int i = 0; i < 40; ++i) {
        const double price = 50000.0 + 400000.0 * rng.uniform01();
        v.push_back(obs_of(0.8 * price, price));
    }
    CHECK(suits_index(v) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("suits index negative when the cheap home is over-assessed") {
    // cheap home holds 50% of assessed value but 10% of price
    const std::vector<RatioObservation> v = {obs_of(50, 100), obs_of(50, 900)};
    const double impl = suits_index(v);
    CHECK(impl < 0.0);
    CHECK(impl == doctest::Approx(suits_oracle(v)).epsilon(1e-12));
}

TEST_CASE("reversing which home is over-assessed flips the sign") {
    const std::vector<RatioObservation> regressive = {obs_of(50, 100), obs_of(50, 900)};
    // ratios swapped: expensive home now carries the over-assessment
    const std::vector<RatioObservation> progressive = {obs_of(100.0 * 50.0 / 900.0, 100),
                                                       obs_of(900.0 * 0.5, 900)};
    const double s_reg = suits_index(regressive);
    const double s_pro = suits_index(progressive);
    CHECK(s_reg < 0.0);
    CHECK(s_pro > 0.0);
    CHECK(s_reg == doctest::Approx(suits_oracle(regressive)).epsilon(1e-12));
    CHECK(s_pro == doctest::Approx(suits_oracle(progressive)).epsilon(1e-12));
}

TEST_CASE("suits matches the cumulative-sum oracle on random data") {
    RngStream rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<RatioObservation> v;
        const int n = 2 + static_cast<int>(rng.uniform_index(200));
        for (int i = 0; i < n; ++i) {
            const double price = std::exp(10.0 + 3.0 * rng.uniform01());
            const double assessed = price * std::exp(0.4 * (rng.uniform01() - 0.5));
            RatioObservation o = obs_of(assessed, price);
            if (rng.uniform01() < 0.3) o.weight = 0.5 + 2.0 * rng.uniform01();
            v.push_back(o);
        }
        CHECK(suits_index(v) == doctest::Approx(suits_oracle(v)).epsilon(1e-9));
    }
}

TEST_CASE("prd on the worked two-point example") {
    const std::vector<RatioObservation> v = {obs_of(100, 100), obs_of(90, 50)};
    // mean ratio 1.4; mean assessed 95; mean price 75
    const double expected = 1.4 / (95.0 / 75.0);
    CHECK(prd(v) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(prd(v) == doctest::Approx(1.105263157894737).epsilon(1e-12));
}

TEST_CASE("prd is one for proportional assessments") {
    std::vector<RatioObservation> v;
    for (int i = 1; i <= 7; ++i) v.push_back(obs_of(0.93 * 60000.0 * i, 60000.0 * i));
    CHECK(prd(v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("prd above one for regressive two-point set") {
    const std::vector<RatioObservation> v = {obs_of(120, 100), obs_of(800, 1000)};
    CHECK(prd(v) > 1.0);
}

TEST_CASE("classification thresholds") {
    CHECK(classify_regressive(MetricKind::prd, 1.031).is_regressive);
    CHECK_FALSE(classify_regressive(MetricKind::prd, 1.03).is_regressive); // strict boundary
    CHECK(classify_regressive(MetricKind::log_coefficient, -0.05, Interval{-0.09, -0.01})
              .is_regressive);
    CHECK_FALSE(classify_regressive(MetricKind::log_coefficient, -0.05).is_regressive);
    CHECK_FALSE(classify_regressive(MetricKind::log_coefficient, -0.05, Interval{-0.12, 0.02})
                    .is_regressive);
    CHECK(classify_regressive(MetricKind::suits_index, -0.02, Interval{-0.03, -0.01}).is_regressive);
    CHECK(classify_regressive(MetricKind::prd, 1.05).rule == "> 1.03 (strictly)");
}

TEST_CASE("effective tax rate identity on worked examples") {
    const EtrComparison over = etr_comparison(110, 100, 0.01);
    CHECK(over.effective_rate == doctest::Approx(0.011).epsilon(1e-12));
    CHECK(over.assessment_pct_error == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(over.rate_pct_error == doctest::Approx(10.0).epsilon(1e-12));

    const EtrComparison equal = etr_comparison(250000, 250000, 0.013);
    CHECK(equal.assessment_pct_error == 0.0);
    CHECK(equal.rate_pct_error == 0.0);

    const EtrComparison under = etr_comparison(50, 100, 0.02);
    CHECK(under.effective_rate == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(under.assessment_pct_error == doctest::Approx(-50.0).epsilon(1e-12));
    CHECK(under.rate_pct_error == doctest::Approx(-50.0).epsilon(1e-12));
}

TEST_CASE("etr identity holds over random positive inputs") {
    RngStream rng(31);
    for (int i = 0; i < 1000; ++i) {
        const double assessed = std::exp(8.0 + 6.0 * rng.uniform01());
        const double price = std::exp(8.0 + 6.0 * rng.uniform01());
        const double rate = 0.001 + 0.05 * rng.uniform01();
        const EtrComparison c = etr_comparison(assessed, price, rate);
        const double scale = std::max(1.0, std::abs(c.assessment_pct_error));
        CHECK(std::abs(c.assessment_pct_error - c.rate_pct_error) <= 1e-12 * scale);
    }
}

TEST_CASE("scale invariance of the ratio metrics") {
    RngStream rng(77);
    std::vector<RatioObservation> v, scaled;
    const double c = 3.7;
    for (int i = 0; i < 60; ++i) {
        const double price = std::exp(11.0 + 2.0 * rng.uniform01());
        const double assessed = price * std::exp(0.3 * (rng.uniform01() - 0.6));
        v.push_back(obs_of(assessed, price));
        scaled.push_back(obs_of(c * assessed, c * price));
    }
    CHECK(mape(scaled) == doctest::Approx(mape(v)).epsilon(1e-9));
    CHECK(log_coefficient(scaled).slope == doctest::Approx(log_coefficient(v).slope).epsilon(1e-9));
    CHECK(suits_index(scaled) == doctest::Approx(suits_index(v)).epsilon(1e-9));
    CHECK(prd(scaled) == doctest::Approx(prd(v)).epsilon(1e-9));
    CHECK(rmse(scaled) == doctest::Approx(c * rmse(v)).epsilon(1e-9));
    CHECK(mae(scaled) == doctest::Approx(c * mae(v)).epsilon(1e-9));
}

TEST_CASE("proportionality fixed point across all regressivity metrics") {
    RngStream rng(123);
    std::vector<RatioObservation> v;
    for (int i = 0; i < 30; ++i) {
        const double price = std::exp(10.0 + 4.0 * rng.uniform01());
        v.push_back(obs_of(1.17 * price, price));
    }
    CHECK(std::abs(log_coefficient(v).slope) < 1e-10);
    CHECK(std::abs(suits_index(v)) < 1e-10);
    CHECK(prd(v) == doctest::Approx(1.0).epsilon(1e-12));
}

} // TEST_SUITE
