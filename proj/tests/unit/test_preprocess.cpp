#include <doctest.h>

#include <cmath>
#include <numeric>

#include "taxeval/errors.hpp"
#include "taxeval/preprocess.hpp"
#include "taxeval/rng.hpp"

using namespace taxeval;

namespace {

CountyPanel panel_over_years(int first, int last, std::size_t per_year) {
    CountyPanel panel;
    panel.county_id = "30001";
    panel.year_range = {first, last};
    for (int y = first; y <= last; ++y) {
        for (std::size_t i = 0; i < per_year; ++i) {
            SaleRecord r;
            r.county_id = "30001";
            r.block_group_id = "30001bg001";
            r.sale_date = {y, 1 + static_cast<int>(i % 12), 10};
            r.sale_price = 100000.0 + 1000.0 * static_cast<double>(i);
            r.assessed_value = r.sale_price;
            panel.records.push_back(std::move(r));
        }
    }
    return panel;
}

std::vector<SaleRecord> records_with_numeric(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<SaleRecord> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].county_id = "30001";
        rows[i].sale_date = {2020, 6, 1};
        rows[i].sale_price = std::exp(11.5 + 0.3 * rng.normal());
        rows[i].assessed_value = rows[i].sale_price;
        rows[i].features["sqft"] = 800.0 + 2000.0 * rng.uniform01();
        rows[i].features["age"] = std::floor(60.0 * rng.uniform01());
    }
    return rows;
}

} // namespace

TEST_SUITE("preprocess") {

TEST_CASE("chronological split: most recent year is the test set") {
    const CountyPanel panel = panel_over_years(2018, 2023, 20);
    const SplitPlan plan = chronological_split(panel);
    CHECK(plan.test_year == 2023);
    CHECK(plan.test.size() == 20);
    CHECK(plan.train.size() == 100);
    for (std::size_t i : plan.test) CHECK(panel.records[i].sale_date.year == 2023);
    for (std::size_t i : plan.train) CHECK(panel.records[i].sale_date.year < 2023);

    // disjoint and covering
    std::vector<std::size_t> all = plan.train;
    all.insert(all.end(), plan.test.begin(), plan.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(panel.records.size());
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(all == expected);
}

TEST_CASE("two-year panel splits into one year each") {
    const SplitPlan plan = chronological_split(panel_over_years(2022, 2023, 5));
    CHECK(plan.train.size() == 5);
    CHECK(plan.test.size() == 5);
}

TEST_CASE("single-year panel cannot split") {
    CHECK_THROWS_AS(chronological_split(panel_over_years(2023, 2023, 30)), SingleYearPanel);
}

TEST_CASE("one-hot category floor boundaries") {
    std::vector<std::optional<std::string>> values(100);
    for (std::size_t i = 0; i < 6; ++i) values[i] = "six_pct";
    for (std::size_t i = 6; i < 10; ++i) values[i] = "four_pct";
    for (std::size_t i = 10; i < 15; ++i) values[i] = "five_pct";
    for (std::size_t i = 15; i < 100; ++i) values[i] = "common";

    const OneHotSpec spec = one_hot_fit("quality", values, 0.05);
    const auto has = [&](const std::string& c) {
        return std::find(spec.categories.begin(), spec.categories.end(), c) != spec.categories.end();
    };
    CHECK(has("six_pct"));
    CHECK_FALSE(has("four_pct"));
    CHECK(has("five_pct")); // "at least 5%" keeps the boundary
    CHECK(has("common"));
}

TEST_CASE("sparse-feature drop rule boundaries") {
    CHECK(drop_sparse_feature(0.51, 0.50));
    CHECK_FALSE(drop_sparse_feature(0.50, 0.50)); // "more than 50%" keeps the boundary
    CHECK_FALSE(drop_sparse_feature(0.0, 0.50));
}

TEST_CASE("winsor bounds are the nearest-rank order statistics") {
    std::vector<double> values(1000);
    std::iota(values.begin(), values.end(), 1.0); // 1..1000
    const auto spec = winsor_standardize_fit(values, 0.01, 0.99);
    REQUIRE(spec.has_value());
    CHECK(spec->lo_bound == 10.0);
    CHECK(spec->hi_bound == 990.0);
    CHECK(winsor_standardize_apply(*spec, -500.0) ==
          doctest::Approx((10.0 - spec->mean) / spec->sd));
}

TEST_CASE("constant column reports zero variance") {
    const std::vector<double> values(50, 7.0);
    CHECK_FALSE(winsor_standardize_fit(values, 0.01, 0.99).has_value());
}

TEST_CASE("standardized fitting columns have mean zero and unit sd") {
    RngStream rng(42);
    Eigen::MatrixXd m(400, 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, 0) = rng.normal(50.0, 9.0);
        m(i, 1) = rng.uniform(0.0, 1.0);
        m(i, 2) = std::exp(rng.normal(0.0, 1.0));
    }
    const WinsorizeResult result = winsorize_then_standardize(m, 0.01, 0.99);
    CHECK(result.zero_variance_columns.empty());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double mean = result.values.col(c).mean();
        const double sd = std::sqrt((result.values.col(c).array() - mean).square().sum() /
                                    (static_cast<double>(m.rows()) - 1.0));
        CHECK(std::abs(mean) < 1e-8);
        CHECK(std::abs(sd - 1.0) < 1e-6);
    }
}

TEST_CASE("an already-standardized column passes through almost unchanged") {
    RngStream rng(43);
    Eigen::MatrixXd m(500, 1);
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, 0) = rng.normal();
    const WinsorizeResult once = winsorize_then_standardize(m, 0.01, 0.99);
    const WinsorizeResult twice = winsorize_then_standardize(once.values, 0.01, 0.99);
    REQUIRE(twice.zero_variance_columns.empty());
    const WinsorStandardizeSpec& spec = twice.specs[0];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double v = once.values(i, 0);
        if (v > spec.lo_bound && v < spec.hi_bound) {
            CHECK(twice.values(i, 0) == doctest::Approx(v).epsilon(0.05));
        }
    }
}

TEST_CASE("six sale-timing features") {
    const auto names = time_of_sale_feature_names();
    CHECK(names.size() == 6);
    const auto f = time_of_sale_features({2020, 8, 15}, {2018, 2023});
    CHECK(f.size() == 6);
    CHECK(std::get<double>(f.at("sale_year_index")) == 2.0);
    CHECK(std::get<double>(f.at("sale_quarter_q2")) == 0.0);
    CHECK(std::get<double>(f.at("sale_quarter_q3")) == 1.0);
    CHECK(std::get<double>(f.at("sale_quarter_q4")) == 0.0);
    CHECK(std::get<double>(f.at("sale_month_of_quarter")) == 2.0);
    // days from 2018-01-01 to 2020-08-15: 730 + 227
    CHECK(std::get<double>(f.at("sale_days_since_start")) == 957.0);
}

TEST_CASE("fitted pipeline replays training bounds on test rows") {
    auto train = records_with_numeric(300, 7);
    PipelineConfig config;
    const std::vector<std::string> features = {"sqft", "age"};
    const Preprocessor prep = Preprocessor::fit(train, features, config);

    // an outlier far beyond the training range clamps to the training bound
    auto test = records_with_numeric(2, 8);
    test[0].features["sqft"] = 1e9;
    test[1].features["sqft"] = -1e9;
    const FeatureMatrix out = prep.transform(test);
    REQUIRE(out.cols() >= 1);

    double max_train = -1e300, min_train = 1e300;
    const FeatureMatrix train_out = prep.transform(train);
    for (Eigen::Index i = 0; i < train_out.values.rows(); ++i) {
        max_train = std::max(max_train, train_out.values(i, 0));
        min_train = std::min(min_train, train_out.values(i, 0));
    }
    CHECK(out.values(0, 0) == doctest::Approx(max_train).epsilon(1e-12));
    CHECK(out.values(1, 0) == doctest::Approx(min_train).epsilon(1e-12));
}

TEST_CASE("transform output never contains missing values") {
    RngStream rng(9);
    auto rows = records_with_numeric(200, 9);
    for (auto& r : rows) {
        if (rng.uniform01() < 0.3) r.features["age"] = FeatureValue{}; // missing
        r.features["quality"] = rng.uniform01() < 0.5 ? FeatureValue{std::string("good")}
                                                      : FeatureValue{std::string("fair")};
        if (rng.uniform01() < 0.2) r.features["quality"] = FeatureValue{};
    }
    PipelineConfig config;
    const std::vector<std::string> features = {"sqft", "age", "quality"};
    const Preprocessor prep = Preprocessor::fit(rows, features, config);
    const FeatureMatrix out = prep.transform(rows);
    CHECK_FALSE(out.values.hasNaN());

    // indicator columns remain 0/1 after mode imputation
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
        if (out.columns[c].kind != ColumnMeta::Kind::indicator) continue;
        for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
            const double v = out.values(i, static_cast<Eigen::Index>(c));
            CHECK((v == 0.0 || v == 1.0));
        }
    }
}

TEST_CASE("provenance metadata marks training-only transforms") {
    auto rows = records_with_numeric(150, 10);
    PipelineConfig config;
    const std::vector<std::string> features = {"sqft", "age"};
    const Preprocessor prep = Preprocessor::fit(rows, features, config);
    for (const ColumnMeta& meta : prep.output_columns()) {
        if (meta.kind == ColumnMeta::Kind::numeric) {
            CHECK(meta.winsorized);
            CHECK(meta.standardized);
            CHECK(meta.winsor_lo < meta.winsor_hi);
            CHECK(meta.standardize_sd > 0.0);
        }
    }
}

TEST_CASE("category floor derives from training rows only") {
    auto train = records_with_numeric(100, 11);
    for (std::size_t i = 0; i < train.size(); ++i) {
        train[i].features["style"] = i < 3 ? FeatureValue{std::string("rare")}
                                           : FeatureValue{std::string("ranch")};
    }
    // test rows are overwhelmingly the rare category; it must still be dropped
    auto test = records_with_numeric(50, 12);
    for (auto& r : test) r.features["style"] = std::string("rare");

    PipelineConfig config;
    const std::vector<std::string> features = {"sqft", "style"};
    const Preprocessor prep = Preprocessor::fit(train, features, config);
    const FeatureMatrix out = prep.transform(test);
    for (const ColumnMeta& meta : out.columns) {
        CHECK(meta.category != "rare");
        if (meta.category == "ranch") {
            // rows keep zeros across retained indicators
            for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
                bool found_col = false;
                for (std::size_t c = 0; c < out.columns.size(); ++c) {
                    if (out.columns[c].category == "ranch") {
                        CHECK(out.values(i, static_cast<Eigen::Index>(c)) == 0.0);
                        found_col = true;
                    }
                }
                CHECK(found_col);
            }
        }
    }
}

TEST_CASE("schema mismatch when a fitted feature is structurally absent") {
    auto train = records_with_numeric(100, 13);
    PipelineConfig config;
    const std::vector<std::string> features = {"sqft", "age"};
    const Preprocessor prep = Preprocessor::fit(train, features, config);

    std::vector<SaleRecord> stripped = records_with_numeric(10, 14);
    for (auto& r : stripped) r.features.erase("age");
    CHECK_THROWS_AS(prep.transform(stripped), SchemaMismatch);
}

} // TEST_SUITE
