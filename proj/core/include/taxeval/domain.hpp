#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace taxeval {

// Calendar date; hand-rolled because we only need ISO-8601 parse/format
// and ordering, and libstdc++ 11 lacks chrono calendar parsing.
struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    static std::optional<Date> parse_iso(std::string_view text);
    std::string to_iso() const;

    auto operator<=>(const Date&) const = default;
};

// A raw property attribute: numeric, categorical, or explicitly missing.
using FeatureValue = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const FeatureValue& v) { return std::holds_alternative<std::monostate>(v); }

/// One arms-length transaction: price and assessed value at time of sale,
/// geography, and raw property attributes.
struct SaleRecord {
    std::string county_id;
    std::string block_group_id;
    Date sale_date;
    double sale_price = 0.0;
    double assessed_value = 0.0;
    std::map<std::string, FeatureValue> features;
    std::optional<double> sample_weight; // inverse inclusion probability

    bool operator==(const SaleRecord&) const = default;
};

/// The (assessed value, sale price) pair every metric consumes.
struct RatioObservation {
    double assessed = 0.0;
    double price = 0.0;
    double ratio = 0.0; // assessed / price
    std::optional<double> weight;
};

struct YearRange {
    int first = 0;
    int last = 0;
};

/// All sales for one county, sorted by sale date after validation.
struct CountyPanel {
    std::string county_id;
    std::vector<SaleRecord> records;
    YearRange year_range;
};

/// One row of a census block-group attribute table. Attributes absent from
/// the map are explicitly missing.
struct CensusBlockGroupRow {
    std::string block_group_id;
    std::map<std::string, double> attributes;
};

/// Validates record invariants and the minimum-sales rule, returning the
/// panel with records stably sorted by sale date (ties keep input order).
/// Throws TooFewSales / NonPositivePrice / DateOutOfWindow / BadWeight.
CountyPanel validate_panel(CountyPanel panel, std::size_t min_sales);

/// One observation per record, order preserved, weights carried through.
std::vector<RatioObservation> to_ratio_observations(const CountyPanel& panel);

} // namespace taxeval
