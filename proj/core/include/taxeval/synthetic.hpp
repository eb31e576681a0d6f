#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "taxeval/domain.hpp"

namespace taxeval {

// Assessment rules with analytically known regressivity where closed forms
// exist (power_law: exponent - 1; mean_reverting: shrink - 1, both noiseless).

struct PowerLawRule {
    double scale = 1.0;    // multiplicative level
    double exponent = 1.0; // assessed ~ scale * price^exponent
    double noise_sd = 0.0; // lognormal assessment noise
};

struct MeanRevertingRule {
    double shrink = 0.7; // log assessed pulled toward the market mean
    double noise_sd = 0.0;
};

struct CappedRule {
    std::variant<PowerLawRule, MeanRevertingRule> base = PowerLawRule{};
    double annual_cap = 0.10; // max year-over-year assessed growth fraction
};

struct AppealRule {
    std::variant<PowerLawRule, MeanRevertingRule> base = PowerLawRule{1.15, 1.0, 0.0};
    std::array<double, 5> appeal_rate_by_quintile = {0.1, 0.1, 0.1, 0.1, 0.4};
    double correction = 1.0; // 1 = appealed assessments reset to truth
};

using AssessmentRule = std::variant<PowerLawRule, MeanRevertingRule, CappedRule, AppealRule>;

struct MarketConfig {
    std::string county_id = "99001";
    std::size_t n_properties = 1000;
    int first_year = 2018;
    int last_year = 2023;

    std::size_t n_latent_features = 5;
    std::vector<double> feature_weights; // resized/defaulted to n_latent_features
    double base_log_price = 12.0;
    double price_noise_sd = 0.10;
    double annual_appreciation = 0.05; // log drift per year (capped rule uses it)

    std::size_t n_block_groups = 10;
    double neighborhood_effect_sd = 0.0; // block-group random effect on log price
    // When false, the assessment rule operates on the neighborhood-free part
    // of the price: the assessor's information set excludes the block-group
    // effect, so the effect reaches models only through census attributes.
    bool assessor_sees_neighborhood = true;

    AssessmentRule rule = PowerLawRule{};
    std::uint64_t seed = 0;
};

struct GroundTruth {
    std::optional<double> implied_log_coefficient; // closed form when the rule has one
    std::map<std::string, double> block_group_effect; // by block_group_id
};

struct SyntheticMarket {
    CountyPanel panel;
    std::vector<CensusBlockGroupRow> census;
    GroundTruth truth;
};

/// Reproducible county panel under the configured assessment rule. Latent
/// property features are emitted as numeric features f1..fk so counterfactual
/// models have recoverable signal. Census rows carry attributes correlated
/// with the block-group effects (pure noise when the effect sd is zero).
SyntheticMarket generate_market(const MarketConfig& config);

/// Same generator with the block-group effect required to be observable only
/// through the census attributes: the effect sd must be set and the latent
/// features never encode it.
SyntheticMarket generate_neighborhood_effect_market(const MarketConfig& config);

/// Clamps a per-year assessed-value path so year-over-year growth never
/// exceeds the cap.
std::vector<double> capped_assessment_path(std::span<const double> uncapped, double annual_cap);

} // namespace taxeval
