#include "taxeval/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "taxeval/errors.hpp"
#include "taxeval/model.hpp"
#include "taxeval/rng.hpp"
#include "taxeval/synthetic.hpp"

namespace taxeval {

const char* const kCodeVersion = "0.1.0";

namespace {

// the 17 states with annual assessment caps, as 2-digit FIPS prefixes
const std::vector<std::string> kCapStateFips = {"01", "04", "05", "06", "12", "13", "15", "19", "22",
                                                "24", "26", "35", "36", "40", "41", "45", "48"};

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

std::string experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::metrics_report: return "metrics_report";
        case ExperimentKind::ablation: return "ablation";
        case ExperimentKind::census: return "census";
        case ExperimentKind::synth_validate: return "synth_validate";
    }
    return "unknown";
}

std::optional<ExperimentKind> experiment_kind_from_name(const std::string& name) {
    if (name == "metrics_report" || name == "metrics") return ExperimentKind::metrics_report;
    if (name == "ablation") return ExperimentKind::ablation;
    if (name == "census") return ExperimentKind::census;
    if (name == "synth_validate" || name == "synth") return ExperimentKind::synth_validate;
    return std::nullopt;
}

ExperimentConfig ExperimentConfig::with_defaults() {
    ExperimentConfig config;
    config.cap_state_fips = kCapStateFips;
    config.report_only_census = {"share_black", "median_income"};
    return config;
}

MetricSet compute_metric_set(std::span<const RatioObservation> obs) {
    MetricSet set;
    set.mape = mape(obs);
    set.rmse = rmse(obs);
    set.mae = mae(obs);
    const SlopeFit lc = log_coefficient(obs);
    set.log_coefficient = lc.slope;
    set.log_coefficient_se = lc.std_error;
    set.suits_index = suits_index(obs);
    set.prd = prd(obs);
    set.n = obs.size();
    return set;
}

double metric_value(const MetricSet& set, MetricKind kind) {
    switch (kind) {
        case MetricKind::mape: return set.mape;
        case MetricKind::rmse: return set.rmse;
        case MetricKind::mae: return set.mae;
        case MetricKind::log_coefficient: return set.log_coefficient;
        case MetricKind::suits_index: return set.suits_index;
        case MetricKind::prd: return set.prd;
    }
    return 0.0;
}

namespace {

std::vector<RatioObservation> observations_at(std::span<const double> preds,
                                              std::span<const double> prices,
                                              std::span<const std::optional<double>> weights,
                                              std::span<const std::size_t> idx) {
    std::vector<RatioObservation> obs;
    obs.reserve(idx.size());
    for (std::size_t i : idx) {
        obs.push_back({preds[i], prices[i], preds[i] / prices[i], weights[i]});
    }
    return obs;
}

double metric_at(MetricKind kind, std::span<const double> preds, std::span<const double> prices,
                 std::span<const std::optional<double>> weights, std::span<const std::size_t> idx) {
    const auto obs = observations_at(preds, prices, weights, idx);
    switch (kind) {
        case MetricKind::mape: return mape(obs);
        case MetricKind::rmse: return rmse(obs);
        case MetricKind::mae: return mae(obs);
        case MetricKind::log_coefficient: return log_coefficient(obs).slope;
        case MetricKind::suits_index: return suits_index(obs);
        case MetricKind::prd: return prd(obs);
    }
    return 0.0;
}

struct CountyOutcome {
    std::optional<CountyExperimentRow> row;
    std::optional<ExperimentFailure> failure;
    // census-experiment plot inputs, pooled by the caller
    std::vector<double> test_prices;
    std::vector<double> baseline_preds;
    std::vector<double> alt_preds;
    std::vector<std::size_t> quintile_labels;
    std::vector<std::string> test_block_groups;
};

void add_derived_features(std::vector<SaleRecord>& rows, const YearRange& window,
                          bool include_status_quo) {
    for (SaleRecord& r : rows) {
        auto time_features = time_of_sale_features(r.sale_date, window);
        for (auto& [name, value] : time_features) r.features[name] = value;
        if (include_status_quo) r.features["status_quo_assessment"] = r.assessed_value;
    }
}

std::vector<std::string> property_feature_names(std::span<const SaleRecord> rows) {
    std::set<std::string> names;
    for (const SaleRecord& r : rows) {
        for (const auto& [name, _] : r.features) {
            if (name.rfind("census.", 0) == 0) continue;
            names.insert(name);
        }
    }
    const auto time_names = time_of_sale_feature_names();
    for (const auto& t : time_names) names.erase(t);
    names.erase("status_quo_assessment");
    return {names.begin(), names.end()};
}

std::vector<std::string> census_feature_names(std::span<const SaleRecord> rows) {
    std::set<std::string> names;
    for (const SaleRecord& r : rows) {
        for (const auto& [name, _] : r.features) {
            if (name.rfind("census.", 0) == 0) names.insert(name);
        }
    }
    return {names.begin(), names.end()};
}

// descending non-missing share, ties lexicographic
std::vector<std::string> availability_ranking(std::span<const SaleRecord> train,
                                              const std::vector<std::string>& names) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& name : names) {
        std::size_t present = 0;
        for (const SaleRecord& r : train) {
            const auto it = r.features.find(name);
            if (it != r.features.end() && !is_missing(it->second)) ++present;
        }
        ranked.emplace_back(-static_cast<double>(present), name);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::string> out;
    out.reserve(ranked.size());
    for (auto& [_, name] : ranked) out.push_back(name);
    return out;
}

struct ModelRun {
    std::vector<double> predictions; // assessed values on the test rows
};

ModelRun run_model(ModelKind kind, std::span<const SaleRecord> train,
                   std::span<const SaleRecord> test, const std::vector<std::string>& features,
                   const PipelineConfig& pipeline, std::uint64_t seed) {
    PipelineConfig tuned_pipeline = pipeline;
    tuned_pipeline.seed = seed;
    const TuneResult tuned = tune_model(kind, train, features, tuned_pipeline, seed);
    const FittedModel model =
        train_avm(kind, train, features, tuned_pipeline, tuned.best.params, seed);

    // report-only columns must never enter a fitted schema
    for (const std::string& column : model.schema) {
        if (column.rfind("census.share_black", 0) == 0 ||
            column.rfind("census.median_income", 0) == 0) {
            throw Error("report-only census column leaked into model schema: " + column);
        }
    }
    return {predict_assessments(model, test)};
}

CountyOutcome run_county(const ExperimentConfig& config, CountyPanel panel) {
    CountyOutcome outcome;
    const std::string county = panel.county_id;
    try {
        panel = validate_panel(std::move(panel), config.min_sales);
        const SplitPlan split = chronological_split(panel);
        if (split.train.size() < 10 || split.test.size() < 10) {
            throw Error("too few rows after chronological split (train " +
                        std::to_string(split.train.size()) + ", test " +
                        std::to_string(split.test.size()) + ")");
        }

        const bool census_kind = config.kind == ExperimentKind::census;
        std::vector<SaleRecord> train, test;
        train.reserve(split.train.size());
        test.reserve(split.test.size());
        for (std::size_t i : split.train) train.push_back(panel.records[i]);
        for (std::size_t i : split.test) test.push_back(panel.records[i]);
        add_derived_features(train, panel.year_range, census_kind);
        add_derived_features(test, panel.year_range, census_kind);

        const auto time_names = time_of_sale_feature_names();
        std::vector<std::string> baseline_features, alt_features;
        ModelKind model_kind;

        if (config.kind == ExperimentKind::ablation) {
            model_kind = ModelKind::lasso;
            const auto property = property_feature_names(train);
            std::vector<std::string> ranking;
            if (!config.sparse_feature_ranking.empty()) {
                for (const auto& name : config.sparse_feature_ranking) {
                    if (std::find(property.begin(), property.end(), name) != property.end()) {
                        ranking.push_back(name);
                    }
                }
            } else {
                ranking = availability_ranking(train, property);
            }
            const std::size_t k = std::min(config.sparse_feature_count, ranking.size());
            baseline_features.assign(ranking.begin(), ranking.begin() + static_cast<long>(k));
            alt_features = property;
            baseline_features.insert(baseline_features.end(), time_names.begin(), time_names.end());
            alt_features.insert(alt_features.end(), time_names.begin(), time_names.end());
        } else if (census_kind) {
            model_kind = ModelKind::random_forest;
            baseline_features = {"status_quo_assessment"};
            baseline_features.insert(baseline_features.end(), time_names.begin(), time_names.end());
            alt_features = baseline_features;
            const auto census = census_feature_names(train);
            if (census.empty()) throw Error("census experiment needs joined census features");
            alt_features.insert(alt_features.end(), census.begin(), census.end());
        } else {
            throw Error("run_county only handles ablation and census experiments");
        }

        const std::uint64_t county_seed = mix_seed(config.seed, fnv1a(county));
        // model seeds derive from the feature list: identical feature sets give
        // identical fits, so a rich==sparse run is an exact null experiment
        const auto model_seed = [&](const std::vector<std::string>& features) {
            std::string joined;
            for (const auto& f : features) {
                joined += f;
                joined += '\x1f';
            }
            return mix_seed(county_seed, fnv1a(joined), 1);
        };
        const ModelRun baseline = run_model(model_kind, train, test, baseline_features,
                                            config.pipeline, model_seed(baseline_features));
        const ModelRun alternative = run_model(model_kind, train, test, alt_features,
                                               config.pipeline, model_seed(alt_features));

        std::vector<double> prices(test.size());
        std::vector<std::optional<double>> weights(test.size());
        for (std::size_t i = 0; i < test.size(); ++i) {
            prices[i] = test[i].sale_price;
            weights[i] = test[i].sample_weight;
        }

        CountyExperimentRow row;
        row.county_id = county;
        row.n_train = train.size();
        row.n_test = test.size();
        {
            std::vector<std::size_t> all(test.size());
            std::iota(all.begin(), all.end(), 0);
            row.baseline = compute_metric_set(
                observations_at(baseline.predictions, prices, weights, all));
            row.alternative = compute_metric_set(
                observations_at(alternative.predictions, prices, weights, all));
        }

        // paired studentized bootstrap over the shared test rows
        auto delta_of = [&](MetricKind kind, std::uint64_t tag) {
            BootstrapSettings settings;
            settings.outer = config.bootstrap.outer;
            settings.inner = config.bootstrap.inner;
            settings.level = config.bootstrap.level;
            settings.seed = mix_seed(county_seed, tag);
            PairedStatistic stat = [&](std::span<const std::size_t> idx) {
                return metric_at(kind, alternative.predictions, prices, weights, idx) -
                       metric_at(kind, baseline.predictions, prices, weights, idx);
            };
            return studentized_bootstrap_delta(metric_name(kind) + "_delta", stat, test.size(),
                                               settings);
        };
        const MetricDelta accuracy = delta_of(config.accuracy_metric, 3);
        const MetricDelta fairness = delta_of(config.fairness_metric, 4);

        // classification happens after BH across counties; stash the pieces
        row.outcome.county_id = county;
        row.outcome.accuracy = accuracy;
        row.outcome.fairness = fairness;
        outcome.row = std::move(row);

        if (census_kind) {
            outcome.test_prices = prices;
            outcome.baseline_preds = baseline.predictions;
            outcome.alt_preds = alternative.predictions;
            outcome.quintile_labels = quantile_bin_labels(prices, 5); // within county
            outcome.test_block_groups.reserve(test.size());
            for (const auto& r : test) outcome.test_block_groups.push_back(r.block_group_id);
        }
    } catch (const std::exception& e) {
        outcome.row.reset();
        outcome.failure = ExperimentFailure{county, e.what()};
    }
    return outcome;
}

void run_counties_parallel(const ExperimentConfig& config, std::vector<CountyPanel> panels,
                           std::vector<CountyOutcome>& outcomes) {
    outcomes.resize(panels.size());
    const std::size_t hardware = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t n_workers =
        std::min(panels.size(), config.jobs > 0 ? config.jobs : hardware);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= panels.size()) return;
            outcomes[i] = run_county(config, std::move(panels[i]));
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
}

ExperimentReport experiment_deltas(const ExperimentConfig& config,
                                   std::vector<CountyPanel> panels,
                                   std::vector<RejectedRow> rejects,
                                   const std::vector<CensusBlockGroupRow>& census_table) {
    ExperimentReport report;
    report.kind = config.kind;
    report.rejects = std::move(rejects);

    std::vector<CountyOutcome> outcomes;
    run_counties_parallel(config, std::move(panels), outcomes);

    // BH per axis across counties
    std::vector<double> acc_p, fair_p;
    for (const auto& o : outcomes) {
        if (!o.row) continue;
        acc_p.push_back(o.row->outcome.accuracy.p_value);
        fair_p.push_back(o.row->outcome.fairness.p_value);
    }
    BhResult acc_bh{{}, {}}, fair_bh{{}, {}};
    if (!acc_p.empty()) {
        acc_bh = benjamini_hochberg(acc_p, config.bh_alpha);
        fair_bh = benjamini_hochberg(fair_p, config.bh_alpha);
    }

    std::size_t k = 0;
    for (auto& o : outcomes) {
        if (o.failure) {
            report.failures.push_back(*o.failure);
            continue;
        }
        if (!o.row) continue;
        CountyExperimentRow row = std::move(*o.row);
        const DirectedDelta accuracy{config.accuracy_metric,
                                     metric_value(row.baseline, config.accuracy_metric),
                                     row.outcome.accuracy};
        const DirectedDelta fairness{config.fairness_metric,
                                     metric_value(row.baseline, config.fairness_metric),
                                     row.outcome.fairness};
        row.outcome = pareto_classify(row.county_id, accuracy, fairness, acc_bh.rejected[k],
                                      fair_bh.rejected[k]);
        row.accuracy_adjusted_p = acc_bh.adjusted_p[k];
        row.fairness_adjusted_p = fair_bh.adjusted_p[k];
        report.counties.push_back(std::move(row));
        ++k;
    }

    if (config.kind == ExperimentKind::census) {
        // pooled quintile impact: quintiles assigned within county
        std::vector<double> prices, base, alt;
        std::vector<std::size_t> labels;
        for (const auto& o : outcomes) {
            prices.insert(prices.end(), o.test_prices.begin(), o.test_prices.end());
            base.insert(base.end(), o.baseline_preds.begin(), o.baseline_preds.end());
            alt.insert(alt.end(), o.alt_preds.begin(), o.alt_preds.end());
            labels.insert(labels.end(), o.quintile_labels.begin(), o.quintile_labels.end());
        }
        if (!prices.empty()) {
            BootstrapSettings settings;
            settings.outer = std::max<std::size_t>(199, config.bootstrap.outer);
            settings.inner = 0; // percentile bootstrap has no inner loop
            settings.level = config.bootstrap.level;
            settings.seed = mix_seed(config.seed, 0x0111);
            report.quintile_series = quintile_impact(prices, base, alt, settings, labels);
            report.has_quintile = true;
        }

        // per-block-group deltas against report-only attributes
        struct GroupAccumulator {
            double av_delta_pct_sum = 0.0;
            double abs_err_base_sum = 0.0;
            double abs_err_alt_sum = 0.0;
            std::size_t n = 0;
        };
        std::map<std::string, GroupAccumulator> groups;
        for (const auto& o : outcomes) {
            for (std::size_t i = 0; i < o.test_prices.size(); ++i) {
                GroupAccumulator& g = groups[o.test_block_groups[i]];
                g.av_delta_pct_sum +=
                    (o.alt_preds[i] - o.baseline_preds[i]) / o.baseline_preds[i] * 100.0;
                g.abs_err_base_sum += std::abs(o.baseline_preds[i] - o.test_prices[i]) / o.test_prices[i];
                g.abs_err_alt_sum += std::abs(o.alt_preds[i] - o.test_prices[i]) / o.test_prices[i];
                g.n += 1;
            }
        }
        std::map<std::string, const CensusBlockGroupRow*> census_by_id;
        for (const auto& row : census_table) census_by_id[row.block_group_id] = &row;

        for (const std::string& attribute : config.report_only_census) {
            std::vector<double> attr_values, av_deltas, mape_deltas;
            for (const auto& [bg, acc] : groups) {
                const auto it = census_by_id.find(bg);
                if (it == census_by_id.end()) continue;
                const auto attr = it->second->attributes.find(attribute);
                if (attr == it->second->attributes.end()) continue;
                attr_values.push_back(attr->second);
                av_deltas.push_back(acc.av_delta_pct_sum / static_cast<double>(acc.n));
                mape_deltas.push_back((acc.abs_err_alt_sum - acc.abs_err_base_sum) /
                                      static_cast<double>(acc.n) * 100.0);
            }
            if (attr_values.size() < 5) continue;
            const std::size_t bins = std::min<std::size_t>(20, attr_values.size());
            BinnedSeries av = group_delta_curve(attr_values, av_deltas, bins, 2);
            av.x_name = attribute;
            av.y_name = "assessed_value_delta_pct";
            BinnedSeries mp = group_delta_curve(attr_values, mape_deltas, bins, 2);
            mp.x_name = attribute;
            mp.y_name = "mape_delta";
            report.group_curves.push_back(std::move(av));
            report.group_curves.push_back(std::move(mp));
        }
    }
    return report;
}

ExperimentReport run_metrics_report(const ExperimentConfig& config,
                                    std::vector<CountyPanel> panels,
                                    std::vector<RejectedRow> rejects) {
    ExperimentReport report;
    report.kind = config.kind;
    report.rejects = std::move(rejects);

    for (auto& raw_panel : panels) {
        const std::string county = raw_panel.county_id;
        try {
            const CountyPanel panel = validate_panel(std::move(raw_panel), config.min_sales);
            std::map<int, std::vector<RatioObservation>> by_year;
            for (const SaleRecord& r : panel.records) {
                by_year[r.sale_date.year].push_back(
                    {r.assessed_value, r.sale_price, r.assessed_value / r.sale_price,
                     r.sample_weight});
            }
            for (const auto& [year, obs] : by_year) {
                if (obs.size() < 3) continue; // too few sales for the slope metric
                report.county_years.push_back({county, year, compute_metric_set(obs)});
            }
        } catch (const std::exception& e) {
            report.failures.push_back({county, e.what()});
        }
    }

    // the status quo accuracy/fairness relationship, binned across MAPE quantiles
    std::vector<double> mape_points;
    std::map<MetricKind, std::vector<double>> fairness_points;
    for (const auto& row : report.county_years) {
        mape_points.push_back(row.metrics.mape);
        fairness_points[MetricKind::log_coefficient].push_back(row.metrics.log_coefficient);
        fairness_points[MetricKind::suits_index].push_back(row.metrics.suits_index);
        fairness_points[MetricKind::prd].push_back(row.metrics.prd);
    }
    if (!mape_points.empty()) {
        for (const auto& [kind, points] : fairness_points) {
            BinnedSeries series = quantile_binscatter(mape_points, points, 100);
            series.x_name = "mape";
            series.y_name = metric_name(kind);
            report.binscatters.push_back(std::move(series));
        }
    }
    return report;
}

ExperimentReport run_synth_validate(const ExperimentConfig& config) {
    ExperimentReport report;
    report.kind = config.kind;

    for (std::size_t i = 0; i < config.synth_exponents.size(); ++i) {
        const double exponent = config.synth_exponents[i];
        MarketConfig market_config;
        market_config.county_id = "99" + std::to_string(100 + i);
        market_config.n_properties = config.synth_properties;
        market_config.rule = PowerLawRule{1.0, exponent, 0.0};
        market_config.seed = mix_seed(config.seed, 0x57, i);
        const SyntheticMarket market = generate_market(market_config);

        const CountyPanel panel = validate_panel(market.panel, config.min_sales);
        const auto obs = to_ratio_observations(panel);
        SynthValidationRow row;
        row.exponent = exponent;
        row.implied_log_coefficient = *market.truth.implied_log_coefficient;
        row.measured = compute_metric_set(obs);
        report.synth_rows.push_back(row);
    }
    return report;
}

} // namespace

AggregateCounts recompute_aggregate(const ExperimentReport& report) {
    AggregateCounts agg;
    agg.n_counties = report.counties.size();
    agg.n_failures = report.failures.size();
    for (const auto& row : report.counties) {
        const bool both = row.outcome.accuracy_significant && row.outcome.fairness_significant;
        if (both) ++agg.n_both_significant;
        switch (row.outcome.classification) {
            case ParetoClass::joint_gain: ++agg.n_joint_gain; break;
            case ParetoClass::tradeoff: ++agg.n_tradeoff; break;
            case ParetoClass::mixed_insignificant: ++agg.n_mixed; break;
        }
    }
    if (agg.n_counties > 0) {
        agg.share_significant =
            static_cast<double>(agg.n_both_significant) / static_cast<double>(agg.n_counties);
    }
    if (agg.n_both_significant > 0) {
        agg.share_joint_gain_among_significant =
            static_cast<double>(agg.n_joint_gain) / static_cast<double>(agg.n_both_significant);
    }
    return agg;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    ExperimentReport report;

    if (config.kind == ExperimentKind::synth_validate) {
        report = run_synth_validate(config);
    } else {
        if (config.sales_csv.empty()) throw ConfigError("sales_csv is required");
        SalesLoadResult loaded = load_sales_csv(config.sales_csv);

        std::vector<CensusBlockGroupRow> census_table;
        if (!config.census_csv.empty()) {
            census_table = load_census_csv(config.census_csv);
            join_census(loaded.panels, census_table, config.report_only_census);
        }

        if (config.kind == ExperimentKind::census) {
            if (census_table.empty()) throw ConfigError("census experiment needs census_csv");
            // counties in assessment-cap states are out of scope
            std::erase_if(loaded.panels, [&](const CountyPanel& p) {
                return std::any_of(config.cap_state_fips.begin(), config.cap_state_fips.end(),
                                   [&](const std::string& fips) {
                                       return p.county_id.rfind(fips, 0) == 0;
                                   });
            });
        }

        if (config.kind == ExperimentKind::metrics_report) {
            report = run_metrics_report(config, std::move(loaded.panels), std::move(loaded.rejects));
        } else {
            report = experiment_deltas(config, std::move(loaded.panels), std::move(loaded.rejects),
                                       census_table);
        }
    }

    report.config_digest = config_hash(config);
    report.seed = config.seed;
    report.code_version = kCodeVersion;
    report.accuracy_metric = metric_name(config.accuracy_metric);
    report.fairness_metric = metric_name(config.fairness_metric);
    report.aggregate = recompute_aggregate(report);
    return report;
}

} // namespace taxeval
