#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "taxeval/csv.hpp"
#include "taxeval/domain.hpp"
#include "taxeval/metrics.hpp"
#include "taxeval/preprocess.hpp"
#include "taxeval/stats.hpp"

namespace taxeval {

struct BootstrapConfig {
    std::size_t outer = 999;
    std::size_t inner = 100;
    double level = 0.95;
};

enum class ExperimentKind { metrics_report, ablation, census, synth_validate };

std::string experiment_kind_name(ExperimentKind kind);
std::optional<ExperimentKind> experiment_kind_from_name(const std::string& name);

/// Everything an experiment run depends on. A JSON config file carries the
/// same fields and overrides flag-provided values.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::metrics_report;
    std::filesystem::path sales_csv;
    std::filesystem::path census_csv;
    std::filesystem::path output_dir;
    PipelineConfig pipeline;
    BootstrapConfig bootstrap;
    std::size_t min_sales = 100;
    std::vector<std::string> cap_state_fips; // defaulted to the 17 cap states
    std::vector<std::string> report_only_census; // never model features
    MetricKind accuracy_metric = MetricKind::mape;
    MetricKind fairness_metric = MetricKind::prd;
    double bh_alpha = 0.05;
    std::uint64_t seed = 0;
    std::vector<std::string> sparse_feature_ranking; // empty = rank by availability
    std::size_t sparse_feature_count = 3;
    std::size_t jobs = 0; // county worker threads; 0 = hardware concurrency

    // synth_validate
    std::vector<double> synth_exponents = {0.7, 0.8, 1.0, 1.2};
    std::size_t synth_properties = 2000;

    static ExperimentConfig with_defaults();
};

/// Merges the JSON config file over the current values (a config file
/// overrides flags).
void apply_config_file(ExperimentConfig& config, const std::filesystem::path& json_path);

/// FNV-1a hash of the canonical config JSON, excluding output paths, so the
/// same analysis into two directories emits identical artifacts.
std::string config_hash(const ExperimentConfig& config);

struct MetricSet {
    double mape = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    double log_coefficient = 0.0;
    double log_coefficient_se = 0.0;
    double suits_index = 0.0;
    double prd = 1.0;
    std::size_t n = 0;
};

MetricSet compute_metric_set(std::span<const RatioObservation> obs);
double metric_value(const MetricSet& set, MetricKind kind);

struct CountyExperimentRow {
    std::string county_id;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    MetricSet baseline;
    MetricSet alternative;
    double accuracy_adjusted_p = 1.0;
    double fairness_adjusted_p = 1.0;
    ParetoOutcome outcome;
};

struct CountyYearMetricsRow {
    std::string county_id;
    int year = 0;
    MetricSet metrics;
};

struct SynthValidationRow {
    double exponent = 1.0;
    double implied_log_coefficient = 0.0;
    MetricSet measured;
};

struct AggregateCounts {
    std::size_t n_counties = 0;
    std::size_t n_failures = 0;
    std::size_t n_both_significant = 0;
    std::size_t n_joint_gain = 0;
    std::size_t n_tradeoff = 0;
    std::size_t n_mixed = 0;
    double share_significant = 0.0;
    double share_joint_gain_among_significant = 0.0;
};

struct ExperimentFailure {
    std::string county_id;
    std::string error;
};

/// Per-county deltas, Pareto classification, plot-data tables, and the
/// provenance block. Aggregate counts always recompute from the rows.
struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::metrics_report;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string code_version;
    std::string accuracy_metric;
    std::string fairness_metric;

    std::vector<CountyExperimentRow> counties;       // ablation / census
    std::vector<CountyYearMetricsRow> county_years;  // metrics_report
    std::vector<SynthValidationRow> synth_rows;      // synth_validate
    std::vector<ExperimentFailure> failures;
    std::vector<RejectedRow> rejects;
    AggregateCounts aggregate;

    std::vector<BinnedSeries> binscatters;  // metrics_report: MAPE vs each fairness metric
    QuintileImpact quintile_series;         // census
    bool has_quintile = false;
    std::vector<BinnedSeries> group_curves; // census: per report-only attribute
};

/// Runs the configured experiment end to end. Per-county failures are
/// recorded and never abort the batch; the run is deterministic given the
/// seed regardless of worker count.
ExperimentReport run_experiment(const ExperimentConfig& config);

AggregateCounts recompute_aggregate(const ExperimentReport& report);

/// Writes report.json, metric/plot CSVs (censored for display), the
/// human-readable summary, and the failure manifest when needed. Byte-stable
/// for identical (config, inputs, seed).
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Reads back an emitted report.json (plot series are not reconstructed).
ExperimentReport load_report(const std::filesystem::path& json_path);

std::string render_summary(const ExperimentReport& report);

extern const char* const kCodeVersion;

} // namespace taxeval
