#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "taxeval/csv.hpp"
#include "taxeval/errors.hpp"
#include "taxeval/synthetic.hpp"

using namespace taxeval;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto dir = std::filesystem::temp_directory_path() / "taxeval_csv_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

constexpr const char* kHeader = "county_id,block_group_id,sale_date,sale_price,assessed_value";

} // namespace

TEST_SUITE("csv_io") {

TEST_CASE("well-formed rows load as records") {
    const auto path = temp_file("ok.csv", std::string(kHeader) + ",sqft\n" +
                                              "30001,30001bg001,2020-01-05,150000,140000,1200\n"
                                              "30001,30001bg001,2021-02-06,180000,175000,1500\n"
                                              "30001,30001bg002,2022-03-07,210000,200000,\n");
    const SalesLoadResult r = load_sales_csv(path);
    CHECK(r.rejects.empty());
    REQUIRE(r.panels.size() == 1);
    REQUIRE(r.panels[0].records.size() == 3);
    CHECK(r.panels[0].year_range.first == 2020);
    CHECK(r.panels[0].year_range.last == 2022);
    CHECK(std::get<double>(r.panels[0].records[0].features.at("sqft")) == 1200.0);
    CHECK(is_missing(r.panels[0].records[2].features.at("sqft"))); // empty cell
}

TEST_CASE("empty sale price lands in the rejects file with a reason") {
    const auto path = temp_file("badprice.csv", std::string(kHeader) + "\n" +
                                                    "30001,b,2020-01-05,,140000\n"
                                                    "30001,b,2020-01-06,100000,90000\n");
    const SalesLoadResult r = load_sales_csv(path);
    CHECK(r.panels.size() == 1);
    CHECK(r.panels[0].records.size() == 1);
    REQUIRE(r.rejects.size() == 1);
    CHECK(r.rejects[0].reason == "NonPositivePrice");
    CHECK(r.rejects[0].line_number == 2);
}

TEST_CASE("malformed dates and field counts are collected, not dropped") {
    const auto path = temp_file("badrows.csv", std::string(kHeader) + "\n" +
                                                   "30001,b,2020-13-05,100000,90000\n"
                                                   "30001,b,2020-01-05,100000\n"
                                                   "30001,b,2020-01-05,100000,90000\n");
    const SalesLoadResult r = load_sales_csv(path);
    CHECK(r.panels[0].records.size() == 1);
    REQUIRE(r.rejects.size() == 2);
    CHECK(r.rejects[0].reason.find("sale_date") != std::string::npos);
    CHECK(r.rejects[1].reason.find("expected") != std::string::npos);
}

TEST_CASE("interleaved counties split into ordered panels") {
    const auto path = temp_file("twocounty.csv", std::string(kHeader) + "\n" +
                                                     "30002,b,2020-01-05,100000,90000\n"
                                                     "30001,b,2020-02-05,200000,190000\n"
                                                     "30002,b,2020-03-05,110000,99000\n");
    const SalesLoadResult r = load_sales_csv(path);
    REQUIRE(r.panels.size() == 2);
    CHECK(r.panels[0].county_id == "30001"); // sorted by county id
    CHECK(r.panels[1].county_id == "30002");
    CHECK(r.panels[1].records[0].sale_price == 100000.0); // original order within county
    CHECK(r.panels[1].records[1].sale_price == 110000.0);
}

TEST_CASE("missing required column fails fast") {
    const auto path = temp_file("nocol.csv", "county_id,sale_date,sale_price,assessed_value\n");
    CHECK_THROWS_AS(load_sales_csv(path), MissingColumn);
}

TEST_CASE("one non-numeric cell makes the whole feature categorical") {
    const auto path = temp_file("mixed.csv", std::string(kHeader) + ",quality\n" +
                                                 "30001,b,2020-01-05,100000,90000,3\n"
                                                 "30001,b,2020-01-06,100000,90000,good\n");
    const SalesLoadResult r = load_sales_csv(path);
    REQUIRE(r.panels[0].records.size() == 2);
    CHECK(std::holds_alternative<std::string>(r.panels[0].records[0].features.at("quality")));
    CHECK(std::get<std::string>(r.panels[0].records[0].features.at("quality")) == "3");
}

TEST_CASE("sample weights parse and bad ones reject") {
    const auto path = temp_file("weights.csv", std::string(kHeader) + ",sample_weight\n" +
                                                   "30001,b,2020-01-05,100000,90000,2.5\n"
                                                   "30001,b,2020-01-06,100000,90000,\n"
                                                   "30001,b,2020-01-07,100000,90000,-1\n");
    const SalesLoadResult r = load_sales_csv(path);
    REQUIRE(r.panels[0].records.size() == 2);
    CHECK(r.panels[0].records[0].sample_weight == 2.5);
    CHECK_FALSE(r.panels[0].records[1].sample_weight.has_value());
    REQUIRE(r.rejects.size() == 1);
    CHECK(r.rejects[0].reason == "BadWeight");
}

TEST_CASE("census table load and duplicate geoids") {
    const auto ok = temp_file("census.csv", "block_group_id,median_income,share_black\n"
                                            "bg1,52000,0.4\n"
                                            "bg2,,0.1\n");
    const auto rows = load_census_csv(ok);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].attributes.at("median_income") == 52000.0);
    CHECK(rows[1].attributes.count("median_income") == 0); // explicitly missing

    const auto dup = temp_file("censusdup.csv", "block_group_id,x\nbg1,1\nbg1,2\n");
    CHECK_THROWS_AS(load_census_csv(dup), DuplicateBlockGroupRow);
}

TEST_CASE("census join attaches features and counts matches") {
    const auto path = temp_file("sales_for_join.csv", std::string(kHeader) + "\n" +
                                                          "30001,bg1,2020-01-05,100000,90000\n"
                                                          "30001,bgX,2020-01-06,100000,90000\n");
    SalesLoadResult loaded = load_sales_csv(path);
    std::vector<CensusBlockGroupRow> census = {{"bg1", {{"median_income", 52000.0},
                                                        {"college_share", 0.3},
                                                        {"share_black", 0.2}}}};
    const std::vector<std::string> report_only = {"share_black", "median_income"};
    const CensusJoinStats stats = join_census(loaded.panels, census, report_only);
    CHECK(stats.matched_records == 1);
    CHECK(stats.unmatched_records == 1);

    const auto& matched = loaded.panels[0].records[0];
    CHECK(std::get<double>(matched.features.at("census.college_share")) == 0.3);
    CHECK(matched.features.count("census.share_black") == 0);    // report-only
    CHECK(matched.features.count("census.median_income") == 0);  // report-only

    const auto& unmatched = loaded.panels[0].records[1];
    CHECK(is_missing(unmatched.features.at("census.college_share"))); // explicit sentinel

    // duplicate row in the joined table throws
    census.push_back({"bg1", {}});
    CHECK_THROWS_AS(join_census(loaded.panels, census, report_only), DuplicateBlockGroupRow);
}

TEST_CASE("sales round trip is field-identical") {
    MarketConfig config;
    config.n_properties = 120;
    config.rule = MeanRevertingRule{0.8, 0.05};
    config.neighborhood_effect_sd = 0.1;
    config.seed = 42;
    const SyntheticMarket market = generate_market(config);

    const auto dir = std::filesystem::temp_directory_path() / "taxeval_csv_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / "roundtrip.csv";
    write_sales_csv(path, std::span(&market.panel, 1));
    const SalesLoadResult loaded = load_sales_csv(path);

    REQUIRE(loaded.rejects.empty());
    REQUIRE(loaded.panels.size() == 1);
    REQUIRE(loaded.panels[0].records.size() == market.panel.records.size());
    for (std::size_t i = 0; i < market.panel.records.size(); ++i) {
        const SaleRecord& a = market.panel.records[i];
        const SaleRecord& b = loaded.panels[0].records[i];
        CHECK(a == b); // field-identical, including features
    }

    // census table round trips the same way
    const auto census_path = dir / "roundtrip_census.csv";
    write_census_csv(census_path, market.census);
    const auto census = load_census_csv(census_path);
    REQUIRE(census.size() == market.census.size());
    for (std::size_t i = 0; i < census.size(); ++i) {
        CHECK(census[i].block_group_id == market.census[i].block_group_id);
        CHECK(census[i].attributes == market.census[i].attributes);
    }
}

TEST_CASE("quoted fields with commas survive") {
    const auto path = temp_file("quoted.csv", std::string(kHeader) + ",note\n" +
                                                  "30001,b,2020-01-05,100000,90000,\"a, b\"\"c\"\n");
    const SalesLoadResult r = load_sales_csv(path);
    REQUIRE(r.panels[0].records.size() == 1);
    CHECK(std::get<std::string>(r.panels[0].records[0].features.at("note")) == "a, b\"c");
}

} // TEST_SUITE
