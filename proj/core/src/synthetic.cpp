#include "taxeval/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "taxeval/errors.hpp"
#include "taxeval/rng.hpp"
#include "taxeval/stats.hpp"

namespace taxeval {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::string block_group_id(const std::string& county, std::size_t index) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03zu", index);
    return county + "bg" + buf;
}

double apply_base_rule(const std::variant<PowerLawRule, MeanRevertingRule>& base, double log_price,
                       double market_mean_log, RngStream& noise_rng) {
    if (std::holds_alternative<PowerLawRule>(base)) {
        const auto& rule = std::get<PowerLawRule>(base);
        const double eta = rule.noise_sd > 0.0 ? noise_rng.normal(0.0, rule.noise_sd) : 0.0;
        return std::log(rule.scale) + rule.exponent * log_price + eta;
    }
    const auto& rule = std::get<MeanRevertingRule>(base);
    const double eta = rule.noise_sd > 0.0 ? noise_rng.normal(0.0, rule.noise_sd) : 0.0;
    return market_mean_log + rule.shrink * (log_price - market_mean_log) + eta;
}

std::optional<double> implied_lc(const AssessmentRule& rule, bool assessor_blind_to_effect) {
    if (assessor_blind_to_effect) return std::nullopt; // effect breaks the closed forms
    if (std::holds_alternative<PowerLawRule>(rule)) {
        return std::get<PowerLawRule>(rule).exponent - 1.0;
    }
    if (std::holds_alternative<MeanRevertingRule>(rule)) {
        return std::get<MeanRevertingRule>(rule).shrink - 1.0;
    }
    return std::nullopt; // capped / appeal-adjusted: no closed form
}

} // namespace

std::vector<double> capped_assessment_path(std::span<const double> uncapped, double annual_cap) {
    std::vector<double> path(uncapped.begin(), uncapped.end());
    for (std::size_t t = 1; t < path.size(); ++t) {
        path[t] = std::min(path[t], path[t - 1] * (1.0 + annual_cap));
    }
    return path;
}

SyntheticMarket generate_market(const MarketConfig& config) {
    if (config.n_properties == 0) throw Error("generate_market: n_properties must be positive");
    if (config.last_year < config.first_year) throw Error("generate_market: bad year range");
    if (std::holds_alternative<PowerLawRule>(config.rule) &&
        std::get<PowerLawRule>(config.rule).exponent <= 0.0) {
        throw Error("generate_market: power-law exponent must be positive");
    }

    std::vector<double> weights = config.feature_weights;
    weights.resize(config.n_latent_features, 0.1);

    RngStream feature_rng = RngStream::substream(config.seed, 1, 0);
    RngStream price_rng = RngStream::substream(config.seed, 2, 0);
    RngStream date_rng = RngStream::substream(config.seed, 3, 0);
    RngStream assess_rng = RngStream::substream(config.seed, 4, 0);
    RngStream appeal_rng = RngStream::substream(config.seed, 5, 0);
    RngStream effect_rng = RngStream::substream(config.seed, 6, 0);
    RngStream census_rng = RngStream::substream(config.seed, 7, 0);

    const std::size_t n_years = static_cast<std::size_t>(config.last_year - config.first_year + 1);
    const std::size_t n_bg = std::max<std::size_t>(1, config.n_block_groups);

    std::vector<double> bg_effect(n_bg, 0.0);
    if (config.neighborhood_effect_sd > 0.0) {
        for (double& e : bg_effect) e = effect_rng.normal(0.0, config.neighborhood_effect_sd);
    }

    const bool assessor_blind =
        !config.assessor_sees_neighborhood && config.neighborhood_effect_sd > 0.0;

    SyntheticMarket market;
    market.panel.county_id = config.county_id;
    market.panel.year_range = {config.first_year, config.last_year};
    market.truth.implied_log_coefficient = implied_lc(config.rule, assessor_blind);

    std::vector<double> log_prices(config.n_properties);
    std::vector<double> assessor_log_prices(config.n_properties); // minus hidden effects
    std::vector<int> sale_years(config.n_properties);
    std::vector<std::size_t> bg_of(config.n_properties);

    for (std::size_t i = 0; i < config.n_properties; ++i) {
        bg_of[i] = i % n_bg;
        sale_years[i] = config.first_year + static_cast<int>(i % n_years);

        double log_price = config.base_log_price + bg_effect[bg_of[i]];
        SaleRecord record;
        record.county_id = config.county_id;
        record.block_group_id = block_group_id(config.county_id, bg_of[i]);
        for (std::size_t k = 0; k < config.n_latent_features; ++k) {
            const double x = feature_rng.normal();
            log_price += weights[k] * x;
            record.features["f" + std::to_string(k + 1)] = x;
        }
        log_price += config.annual_appreciation * static_cast<double>(sale_years[i] - config.first_year);
        log_price += price_rng.normal(0.0, config.price_noise_sd);

        record.sale_date = {sale_years[i], 1 + static_cast<int>(date_rng.uniform_index(12)),
                            1 + static_cast<int>(date_rng.uniform_index(28))};
        record.sale_price = std::exp(log_price);
        log_prices[i] = log_price;
        assessor_log_prices[i] = assessor_blind ? log_price - bg_effect[bg_of[i]] : log_price;
        market.panel.records.push_back(std::move(record));
    }

    // assessed values under the configured rule
    if (std::holds_alternative<CappedRule>(config.rule)) {
        const auto& rule = std::get<CappedRule>(config.rule);
        for (std::size_t i = 0; i < config.n_properties; ++i) {
            // property value path up to the sale year; the cap binds growth
            const int sale_year = sale_years[i];
            std::vector<double> uncapped;
            for (int t = config.first_year; t <= sale_year; ++t) {
                const double log_value =
                    assessor_log_prices[i] -
                    config.annual_appreciation * static_cast<double>(sale_year - t);
                uncapped.push_back(std::exp(
                    apply_base_rule(rule.base, log_value, config.base_log_price, assess_rng)));
            }
            market.panel.records[i].assessed_value =
                capped_assessment_path(uncapped, rule.annual_cap).back();
        }
    } else {
        const std::variant<PowerLawRule, MeanRevertingRule>* base = nullptr;
        std::variant<PowerLawRule, MeanRevertingRule> own;
        if (std::holds_alternative<AppealRule>(config.rule)) {
            base = &std::get<AppealRule>(config.rule).base;
        } else if (std::holds_alternative<PowerLawRule>(config.rule)) {
            own = std::get<PowerLawRule>(config.rule);
            base = &own;
        } else {
            own = std::get<MeanRevertingRule>(config.rule);
            base = &own;
        }
        for (std::size_t i = 0; i < config.n_properties; ++i) {
            market.panel.records[i].assessed_value = std::exp(apply_base_rule(
                *base, assessor_log_prices[i], config.base_log_price, assess_rng));
        }
    }

    if (std::holds_alternative<AppealRule>(config.rule)) {
        const auto& rule = std::get<AppealRule>(config.rule);
        std::vector<double> prices(config.n_properties);
        for (std::size_t i = 0; i < config.n_properties; ++i) prices[i] = market.panel.records[i].sale_price;
        const auto quintile = quantile_bin_labels(prices, 5);
        for (std::size_t i = 0; i < config.n_properties; ++i) {
            const double rate = rule.appeal_rate_by_quintile[std::min<std::size_t>(quintile[i], 4)];
            if (appeal_rng.uniform01() < rate) {
                SaleRecord& r = market.panel.records[i];
                r.assessed_value += rule.correction * (r.sale_price - r.assessed_value);
            }
        }
    }

    // census attributes per block group, correlated with the effect by
    // construction; pure noise when the effect sd is zero
    for (std::size_t b = 0; b < n_bg; ++b) {
        CensusBlockGroupRow row;
        row.block_group_id = block_group_id(config.county_id, b);
        const double e = bg_effect[b];
        row.attributes["college_share"] = clamp01(0.40 + 0.8 * e + 0.02 * census_rng.normal());
        row.attributes["snap_share"] = clamp01(0.20 - 0.6 * e + 0.02 * census_rng.normal());
        row.attributes["unemployment_rate"] = clamp01(0.08 - 0.25 * e + 0.01 * census_rng.normal());
        row.attributes["median_income"] = 60000.0 * std::exp(1.2 * e + 0.05 * census_rng.normal());
        row.attributes["share_black"] =
            clamp01(0.25 - 0.9 * e + 0.05 * census_rng.normal()); // report-only downstream
        market.truth.block_group_effect[row.block_group_id] = e;
        market.census.push_back(std::move(row));
    }

    return market;
}

SyntheticMarket generate_neighborhood_effect_market(const MarketConfig& config) {
    if (config.n_block_groups < 2) {
        throw Error("generate_neighborhood_effect_market: needs at least two block groups");
    }
    // effects reach models only through census attributes, never via the
    // latent features or the status quo assessment
    MarketConfig blind = config;
    blind.assessor_sees_neighborhood = false;
    return generate_market(blind);
}

} // namespace taxeval
