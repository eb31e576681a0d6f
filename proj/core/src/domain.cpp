#include "taxeval/domain.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "taxeval/errors.hpp"

namespace taxeval {

namespace {

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[month - 1];
}

} // namespace

std::optional<Date> Date::parse_iso(std::string_view text) {
    // YYYY-MM-DD
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    Date d;
    if (!parse_int(text.substr(0, 4), d.year) || !parse_int(text.substr(5, 2), d.month) ||
        !parse_int(text.substr(8, 2), d.day)) {
        return std::nullopt;
    }
    if (d.month < 1 || d.month > 12) return std::nullopt;
    if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
    return d;
}

std::string Date::to_iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

CountyPanel validate_panel(CountyPanel panel, std::size_t min_sales) {
    if (panel.records.size() < min_sales) {
        throw TooFewSales(panel.records.size(), min_sales);
    }
    for (std::size_t i = 0; i < panel.records.size(); ++i) {
        const SaleRecord& r = panel.records[i];
        if (!(r.sale_price > 0.0) || !(r.assessed_value > 0.0) || !std::isfinite(r.sale_price) ||
            !std::isfinite(r.assessed_value)) {
            throw NonPositivePrice(i);
        }
        if (r.sale_date.year < panel.year_range.first || r.sale_date.year > panel.year_range.last) {
            throw DateOutOfWindow("record " + std::to_string(i) + " dated " + r.sale_date.to_iso() +
                                  " outside years " + std::to_string(panel.year_range.first) + "-" +
                                  std::to_string(panel.year_range.last));
        }
        if (r.sample_weight && (!std::isfinite(*r.sample_weight) || *r.sample_weight <= 0.0)) {
            throw BadWeight(i);
        }
        if (r.county_id != panel.county_id) {
            throw Error("county mismatch: record " + std::to_string(i) + " belongs to " + r.county_id);
        }
    }
    // Ties in sale_date keep input order.
    std::stable_sort(panel.records.begin(), panel.records.end(),
                     [](const SaleRecord& a, const SaleRecord& b) { return a.sale_date < b.sale_date; });
    return panel;
}

std::vector<RatioObservation> to_ratio_observations(const CountyPanel& panel) {
    std::vector<RatioObservation> out;
    out.reserve(panel.records.size());
    for (const SaleRecord& r : panel.records) {
        out.push_back({r.assessed_value, r.sale_price, r.assessed_value / r.sale_price, r.sample_weight});
    }
    return out;
}

} // namespace taxeval
