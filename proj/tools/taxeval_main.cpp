// taxeval: property-tax assessment evaluation toolkit.
//
// Subcommands
//   metrics   status quo accuracy/regressivity metrics per county-year
//   ablation  sparse-vs-rich LASSO counterfactual experiment
//   census    census-feature random-forest experiment vs status quo baseline
//   synth     synthetic power-law market validation (plus optional CSV dump)
//   report    re-render the summary from an existing report.json

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <span>
#include <string>

#include <CLI11.hpp>

#include "taxeval/csv.hpp"
#include "taxeval/errors.hpp"
#include "taxeval/experiment.hpp"
#include "taxeval/synthetic.hpp"

namespace {

struct CommonArgs {
    std::string sales;
    std::string census;
    std::string out;
    std::string config_file;
    std::uint64_t seed = 0;
    std::size_t min_sales = 100;
    std::size_t jobs = 0;
    std::size_t bootstrap_outer = 0;
    std::size_t bootstrap_inner = 0;
    std::string accuracy_metric;
    std::string fairness_metric;
    int tuner_budget = 0;
    int forest_trees = 0;
};

void add_common_options(CLI::App* cmd, CommonArgs& args, bool needs_sales) {
    auto* sales = cmd->add_option("--sales", args.sales, "sales CSV path");
    if (needs_sales) sales->required();
    cmd->add_option("--census", args.census, "census block-group CSV path");
    cmd->add_option("--out", args.out, "output directory")
        ->envname("TAXEVAL_OUTPUT_DIR")
        ->required();
    cmd->add_option("--seed", args.seed, "RNG seed (mandatory for reproducibility)")->required();
    cmd->add_option("--min-sales", args.min_sales, "minimum sales per county");
    cmd->add_option("--jobs", args.jobs, "county worker threads (0 = hardware)");
    cmd->add_option("--bootstrap-outer", args.bootstrap_outer, "outer bootstrap replicates");
    cmd->add_option("--bootstrap-inner", args.bootstrap_inner, "inner bootstrap replicates");
    cmd->add_option("--accuracy-metric", args.accuracy_metric, "mape|rmse|mae");
    cmd->add_option("--fairness-metric", args.fairness_metric,
                    "prd|log_coefficient|suits_index");
    cmd->add_option("--tuner-budget", args.tuner_budget, "hyperparameter evaluations per model");
    cmd->add_option("--forest-trees", args.forest_trees, "trees per random forest");
    cmd->add_option("--config", args.config_file, "JSON config file (overrides flags)");
}

taxeval::ExperimentConfig build_config(taxeval::ExperimentKind kind, const CommonArgs& args) {
    taxeval::ExperimentConfig config = taxeval::ExperimentConfig::with_defaults();
    config.kind = kind;
    config.sales_csv = args.sales;
    config.census_csv = args.census;
    config.output_dir = args.out;
    config.seed = args.seed;
    config.min_sales = args.min_sales;
    config.jobs = args.jobs;
    if (args.bootstrap_outer > 0) config.bootstrap.outer = args.bootstrap_outer;
    if (args.bootstrap_inner > 0) config.bootstrap.inner = args.bootstrap_inner;
    if (!args.accuracy_metric.empty()) {
        const auto kind_opt = taxeval::metric_kind_from_name(args.accuracy_metric);
        if (!kind_opt) throw taxeval::ConfigError("unknown metric '" + args.accuracy_metric + "'");
        config.accuracy_metric = *kind_opt;
    }
    if (!args.fairness_metric.empty()) {
        const auto kind_opt = taxeval::metric_kind_from_name(args.fairness_metric);
        if (!kind_opt) throw taxeval::ConfigError("unknown metric '" + args.fairness_metric + "'");
        config.fairness_metric = *kind_opt;
    }
    if (args.tuner_budget > 0) config.pipeline.tuner_budget = args.tuner_budget;
    if (args.forest_trees > 0) config.pipeline.forest_trees = args.forest_trees;
    // a config file overrides flag-provided values
    if (!args.config_file.empty()) taxeval::apply_config_file(config, args.config_file);
    return config;
}

int run_and_emit(const taxeval::ExperimentConfig& config) {
    const taxeval::ExperimentReport report = taxeval::run_experiment(config);
    taxeval::emit_report(report, config.output_dir);
    std::cout << taxeval::render_summary(report);
    std::cout << "report: " << (config.output_dir / "report.json").string() << "\n";
    if (!report.failures.empty()) {
        std::cout << "failure manifest: " << (config.output_dir / "failure_manifest.json").string()
                  << "\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"property-tax assessment evaluation toolkit"};
    app.require_subcommand(1);

    CommonArgs metrics_args, ablation_args, census_args, synth_args;

    auto* metrics_cmd =
        app.add_subcommand("metrics", "status quo metrics per county-year plus binscatters");
    add_common_options(metrics_cmd, metrics_args, true);

    auto* ablation_cmd =
        app.add_subcommand("ablation", "sparse-vs-rich LASSO experiment with Pareto classification");
    add_common_options(ablation_cmd, ablation_args, true);

    auto* census_cmd =
        app.add_subcommand("census", "census-feature random-forest experiment vs status quo");
    add_common_options(census_cmd, census_args, true);

    auto* synth_cmd =
        app.add_subcommand("synth", "synthetic market validation against closed-form regressivity");
    add_common_options(synth_cmd, synth_args, false);
    std::size_t synth_n = 2000;
    bool synth_dump = false;
    synth_cmd->add_option("--properties", synth_n, "properties per synthetic market");
    synth_cmd->add_flag("--dump-market", synth_dump,
                        "also write a synthetic sales/census CSV pair into the output dir");

    auto* report_cmd = app.add_subcommand("report", "re-render the summary for a report.json");
    std::string report_in, report_out;
    report_cmd->add_option("--in", report_in, "path to report.json")->required();
    report_cmd->add_option("--out", report_out, "directory for the regenerated summary")
        ->envname("TAXEVAL_OUTPUT_DIR");

    CLI11_PARSE(app, argc, argv);

    try {
        if (metrics_cmd->parsed()) {
            return run_and_emit(build_config(taxeval::ExperimentKind::metrics_report, metrics_args));
        }
        if (ablation_cmd->parsed()) {
            return run_and_emit(build_config(taxeval::ExperimentKind::ablation, ablation_args));
        }
        if (census_cmd->parsed()) {
            return run_and_emit(build_config(taxeval::ExperimentKind::census, census_args));
        }
        if (synth_cmd->parsed()) {
            taxeval::ExperimentConfig config =
                build_config(taxeval::ExperimentKind::synth_validate, synth_args);
            config.synth_properties = synth_n;
            const int rc = run_and_emit(config);
            if (synth_dump) {
                taxeval::MarketConfig market_config;
                market_config.n_properties = config.synth_properties;
                market_config.neighborhood_effect_sd = 0.15;
                market_config.rule = taxeval::MeanRevertingRule{0.75, 0.08};
                market_config.seed = config.seed;
                const auto market = taxeval::generate_market(market_config);
                taxeval::write_sales_csv(config.output_dir / "synthetic_sales.csv",
                                         std::span(&market.panel, 1));
                taxeval::write_census_csv(config.output_dir / "synthetic_census.csv", market.census);
                std::cout << "synthetic market CSVs written to " << config.output_dir.string()
                          << "\n";
            }
            return rc;
        }
        if (report_cmd->parsed()) {
            const taxeval::ExperimentReport report = taxeval::load_report(report_in);
            const taxeval::AggregateCounts recomputed = taxeval::recompute_aggregate(report);
            if (recomputed.n_joint_gain != report.aggregate.n_joint_gain ||
                recomputed.n_tradeoff != report.aggregate.n_tradeoff ||
                recomputed.n_both_significant != report.aggregate.n_both_significant) {
                std::cerr << "aggregate counts do not match the per-county rows\n";
                return 1;
            }
            const std::string summary = taxeval::render_summary(report);
            std::cout << summary;
            if (!report_out.empty()) {
                std::filesystem::create_directories(report_out);
                std::ofstream out(std::filesystem::path(report_out) / "summary.txt",
                                  std::ios::binary);
                out << summary;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
