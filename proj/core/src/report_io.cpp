#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taxeval/errors.hpp"
#include "taxeval/experiment.hpp"

namespace taxeval {

using json = nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

json pipeline_to_json(const PipelineConfig& p) {
    return json{{"category_floor", p.category_floor},
                {"missing_drop_threshold", p.missing_drop_threshold},
                {"winsor_lo", p.winsor_lo},
                {"winsor_hi", p.winsor_hi},
                {"mice_iterations", p.mice_iterations},
                {"cv_folds", p.cv_folds},
                {"tuner_budget", p.tuner_budget},
                {"lasso_tol", p.lasso_tol},
                {"lasso_max_sweeps", p.lasso_max_sweeps},
                {"forest_trees", p.forest_trees},
                {"forest_min_leaf", p.forest_min_leaf},
                {"forest_max_depth", p.forest_max_depth},
                {"forest_feature_fraction", p.forest_feature_fraction}};
}

void pipeline_from_json(const json& j, PipelineConfig& p) {
    p.category_floor = j.value("category_floor", p.category_floor);
    p.missing_drop_threshold = j.value("missing_drop_threshold", p.missing_drop_threshold);
    p.winsor_lo = j.value("winsor_lo", p.winsor_lo);
    p.winsor_hi = j.value("winsor_hi", p.winsor_hi);
    p.mice_iterations = j.value("mice_iterations", p.mice_iterations);
    p.cv_folds = j.value("cv_folds", p.cv_folds);
    p.tuner_budget = j.value("tuner_budget", p.tuner_budget);
    p.lasso_tol = j.value("lasso_tol", p.lasso_tol);
    p.lasso_max_sweeps = j.value("lasso_max_sweeps", p.lasso_max_sweeps);
    p.forest_trees = j.value("forest_trees", p.forest_trees);
    p.forest_min_leaf = j.value("forest_min_leaf", p.forest_min_leaf);
    p.forest_max_depth = j.value("forest_max_depth", p.forest_max_depth);
    p.forest_feature_fraction = j.value("forest_feature_fraction", p.forest_feature_fraction);
}

json config_to_canonical_json(const ExperimentConfig& c) {
    // output/input paths excluded: the hash names the analysis, not the disk layout
    json j;
    j["kind"] = experiment_kind_name(c.kind);
    j["min_sales"] = c.min_sales;
    j["cap_state_fips"] = c.cap_state_fips;
    j["report_only_census"] = c.report_only_census;
    j["accuracy_metric"] = metric_name(c.accuracy_metric);
    j["fairness_metric"] = metric_name(c.fairness_metric);
    j["bh_alpha"] = c.bh_alpha;
    j["seed"] = c.seed;
    j["sparse_feature_ranking"] = c.sparse_feature_ranking;
    j["sparse_feature_count"] = c.sparse_feature_count;
    j["pipeline"] = pipeline_to_json(c.pipeline);
    j["bootstrap"] = json{{"outer", c.bootstrap.outer}, {"inner", c.bootstrap.inner},
                          {"level", c.bootstrap.level}};
    j["synth_exponents"] = c.synth_exponents;
    j["synth_properties"] = c.synth_properties;
    return j;
}

MetricKind parse_metric_kind(const std::string& name) {
    const auto kind = metric_kind_from_name(name);
    if (!kind) throw ConfigError("unknown metric '" + name + "'");
    return *kind;
}

json metric_set_to_json(const MetricSet& m) {
    return json{{"mape", m.mape},
                {"rmse", m.rmse},
                {"mae", m.mae},
                {"log_coefficient", m.log_coefficient},
                {"log_coefficient_se", m.log_coefficient_se},
                {"suits_index", m.suits_index},
                {"prd", m.prd},
                {"n", m.n}};
}

MetricSet metric_set_from_json(const json& j) {
    MetricSet m;
    m.mape = j.at("mape");
    m.rmse = j.at("rmse");
    m.mae = j.at("mae");
    m.log_coefficient = j.at("log_coefficient");
    m.log_coefficient_se = j.at("log_coefficient_se");
    m.suits_index = j.at("suits_index");
    m.prd = j.at("prd");
    m.n = j.at("n");
    return m;
}

json delta_to_json(const MetricDelta& d, double adjusted_p, bool significant, bool improving,
                   bool crossed_zero, bool include_crossed) {
    json j{{"statistic", d.statistic},
           {"estimate", d.estimate},
           {"ci_low", d.ci_low},
           {"ci_high", d.ci_high},
           {"p_value", d.p_value},
           {"adjusted_p", adjusted_p},
           {"significant", significant},
           {"improving", improving},
           {"bootstrap_outer", d.settings.outer},
           {"bootstrap_inner", d.settings.inner},
           {"level", d.settings.level}};
    if (include_crossed) j["crossed_zero"] = crossed_zero;
    return j;
}

MetricDelta delta_from_json(const json& j) {
    MetricDelta d;
    d.statistic = j.at("statistic");
    d.estimate = j.at("estimate");
    d.ci_low = j.at("ci_low");
    d.ci_high = j.at("ci_high");
    d.p_value = j.at("p_value");
    d.settings.outer = j.value("bootstrap_outer", 0);
    d.settings.inner = j.value("bootstrap_inner", 0);
    d.settings.level = j.value("level", 0.95);
    return d;
}

json binned_series_to_json(const BinnedSeries& s) {
    json bins = json::array();
    for (const Bin& b : s.bins) {
        json bin{{"key", b.key}, {"x_mean", b.x_mean}, {"mean", b.mean}, {"count", b.count}};
        if (b.has_ci) {
            bin["ci_low"] = b.ci_low;
            bin["ci_high"] = b.ci_high;
        }
        bins.push_back(std::move(bin));
    }
    return json{{"x_name", s.x_name},
                {"y_name", s.y_name},
                {"bins", std::move(bins)},
                {"fit_coefficients", s.fit_coefficients}};
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + path.string());
    out << content;
    if (!out) throw IoFailure("write failed for " + path.string());
}

std::string provenance_comment(const ExperimentReport& r) {
    return "# taxeval config=" + r.config_digest + " seed=" + std::to_string(r.seed) +
           " version=" + r.code_version + "\n";
}

std::string series_csv(const ExperimentReport& r, const BinnedSeries& s) {
    std::ostringstream out;
    out << provenance_comment(r);
    if (!s.fit_coefficients.empty()) {
        out << "# fit_coefficients:";
        for (double c : s.fit_coefficients) out << " " << format_double(c);
        out << "\n";
    }
    out << "bin_key," << s.x_name << "_mean," << s.y_name << "_mean,count";
    const bool any_ci = !s.bins.empty() && s.bins.front().has_ci;
    if (any_ci) out << ",ci_low,ci_high";
    out << "\n";
    for (const Bin& b : s.bins) {
        out << format_double(b.key) << "," << format_double(b.x_mean) << ","
            << format_double(b.mean) << "," << b.count;
        if (any_ci) out << "," << format_double(b.ci_low) << "," << format_double(b.ci_high);
        out << "\n";
    }
    return out.str();
}

std::string sanitize_filename(std::string name) {
    for (char& c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
    }
    return name;
}

} // namespace

void apply_config_file(ExperimentConfig& config, const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw ConfigError("cannot open config file " + json_path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("bad config JSON: " + std::string(e.what()));
    }

    if (j.contains("kind")) {
        const auto kind = experiment_kind_from_name(j.at("kind"));
        if (!kind) throw ConfigError("unknown experiment kind '" + std::string(j.at("kind")) + "'");
        config.kind = *kind;
    }
    if (j.contains("sales_csv")) config.sales_csv = std::string(j.at("sales_csv"));
    if (j.contains("census_csv")) config.census_csv = std::string(j.at("census_csv"));
    if (j.contains("output_dir")) config.output_dir = std::string(j.at("output_dir"));
    config.min_sales = j.value("min_sales", config.min_sales);
    if (j.contains("cap_state_fips")) {
        config.cap_state_fips = j.at("cap_state_fips").get<std::vector<std::string>>();
    }
    if (j.contains("report_only_census")) {
        config.report_only_census = j.at("report_only_census").get<std::vector<std::string>>();
    }
    if (j.contains("accuracy_metric")) config.accuracy_metric = parse_metric_kind(j.at("accuracy_metric"));
    if (j.contains("fairness_metric")) config.fairness_metric = parse_metric_kind(j.at("fairness_metric"));
    config.bh_alpha = j.value("bh_alpha", config.bh_alpha);
    config.seed = j.value("seed", config.seed);
    if (j.contains("sparse_feature_ranking")) {
        config.sparse_feature_ranking = j.at("sparse_feature_ranking").get<std::vector<std::string>>();
    }
    config.sparse_feature_count = j.value("sparse_feature_count", config.sparse_feature_count);
    config.jobs = j.value("jobs", config.jobs);
    if (j.contains("pipeline")) pipeline_from_json(j.at("pipeline"), config.pipeline);
    if (j.contains("bootstrap")) {
        const json& b = j.at("bootstrap");
        config.bootstrap.outer = b.value("outer", config.bootstrap.outer);
        config.bootstrap.inner = b.value("inner", config.bootstrap.inner);
        config.bootstrap.level = b.value("level", config.bootstrap.level);
    }
    if (j.contains("synth_exponents")) {
        config.synth_exponents = j.at("synth_exponents").get<std::vector<double>>();
    }
    config.synth_properties = j.value("synth_properties", config.synth_properties);
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string canonical = config_to_canonical_json(config).dump();
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical)));
    return buf;
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoFailure("cannot create " + dir.string() + ": " + ec.message());

    // ---- report.json ----
    json j;
    j["provenance"] = json{{"config_hash", report.config_digest},
                           {"seed", report.seed},
                           {"code_version", report.code_version},
                           {"kind", experiment_kind_name(report.kind)},
                           {"accuracy_metric", report.accuracy_metric},
                           {"fairness_metric", report.fairness_metric}};
    j["aggregate"] = json{
        {"n_counties", report.aggregate.n_counties},
        {"n_failures", report.aggregate.n_failures},
        {"n_both_significant", report.aggregate.n_both_significant},
        {"n_joint_gain", report.aggregate.n_joint_gain},
        {"n_tradeoff", report.aggregate.n_tradeoff},
        {"n_mixed", report.aggregate.n_mixed},
        {"share_significant", report.aggregate.share_significant},
        {"share_joint_gain_among_significant", report.aggregate.share_joint_gain_among_significant}};

    json counties = json::array();
    for (const auto& row : report.counties) {
        counties.push_back(json{
            {"county_id", row.county_id},
            {"n_train", row.n_train},
            {"n_test", row.n_test},
            {"baseline", metric_set_to_json(row.baseline)},
            {"alternative", metric_set_to_json(row.alternative)},
            {"accuracy_delta",
             delta_to_json(row.outcome.accuracy, row.accuracy_adjusted_p,
                           row.outcome.accuracy_significant, row.outcome.accuracy_improving, false,
                           false)},
            {"fairness_delta",
             delta_to_json(row.outcome.fairness, row.fairness_adjusted_p,
                           row.outcome.fairness_significant, row.outcome.fairness_improving,
                           row.outcome.fairness_crossed_zero, true)},
            {"classification", pareto_class_name(row.outcome.classification)}});
    }
    j["counties"] = std::move(counties);

    json county_years = json::array();
    for (const auto& row : report.county_years) {
        county_years.push_back(json{{"county_id", row.county_id},
                                    {"year", row.year},
                                    {"metrics", metric_set_to_json(row.metrics)}});
    }
    j["county_years"] = std::move(county_years);

    json synth = json::array();
    for (const auto& row : report.synth_rows) {
        synth.push_back(json{{"exponent", row.exponent},
                             {"implied_log_coefficient", row.implied_log_coefficient},
                             {"measured", metric_set_to_json(row.measured)}});
    }
    j["synth_rows"] = std::move(synth);

    json failures = json::array();
    for (const auto& f : report.failures) {
        failures.push_back(json{{"county_id", f.county_id}, {"error", f.error}});
    }
    j["failures"] = std::move(failures);
    j["n_rejected_rows"] = report.rejects.size();

    json plots;
    json scatters = json::array();
    for (const auto& s : report.binscatters) scatters.push_back(binned_series_to_json(s));
    plots["binscatters"] = std::move(scatters);
    if (report.has_quintile) {
        plots["quintile_mape_delta"] = binned_series_to_json(report.quintile_series.mape_delta);
        plots["quintile_price_delta"] = binned_series_to_json(report.quintile_series.price_delta);
    }
    json curves = json::array();
    for (const auto& s : report.group_curves) curves.push_back(binned_series_to_json(s));
    plots["group_curves"] = std::move(curves);
    j["plots"] = std::move(plots);

    write_text_file(dir / "report.json", j.dump(2) + "\n");

    // ---- per-county metric CSV ----
    if (!report.counties.empty()) {
        std::ostringstream out;
        out << provenance_comment(report);
        out << "county_id,n_train,n_test";
        for (const char* side : {"baseline", "alternative"}) {
            out << "," << side << "_mape," << side << "_rmse," << side << "_mae," << side
                << "_log_coefficient," << side << "_suits_index," << side << "_prd";
        }
        out << ",accuracy_delta,accuracy_ci_low,accuracy_ci_high,accuracy_p,accuracy_adjusted_p"
            << ",fairness_delta,fairness_ci_low,fairness_ci_high,fairness_p,fairness_adjusted_p"
            << ",classification\n";
        for (const auto& row : report.counties) {
            const auto side_csv = [&](const MetricSet& m) {
                return format_double(m.mape) + "," + format_double(m.rmse) + "," +
                       format_double(m.mae) + "," + format_double(m.log_coefficient) + "," +
                       format_double(m.suits_index) + "," + format_double(m.prd);
            };
            out << row.county_id << "," << row.n_train << "," << row.n_test << ","
                << side_csv(row.baseline) << "," << side_csv(row.alternative) << ","
                << format_double(row.outcome.accuracy.estimate) << ","
                << format_double(row.outcome.accuracy.ci_low) << ","
                << format_double(row.outcome.accuracy.ci_high) << ","
                << format_double(row.outcome.accuracy.p_value) << ","
                << format_double(row.accuracy_adjusted_p) << ","
                << format_double(row.outcome.fairness.estimate) << ","
                << format_double(row.outcome.fairness.ci_low) << ","
                << format_double(row.outcome.fairness.ci_high) << ","
                << format_double(row.outcome.fairness.p_value) << ","
                << format_double(row.fairness_adjusted_p) << ","
                << pareto_class_name(row.outcome.classification) << "\n";
        }
        write_text_file(dir / "county_metrics.csv", out.str());
    }

    if (!report.county_years.empty()) {
        std::ostringstream out;
        out << provenance_comment(report);
        out << "county_id,year,n,mape,rmse,mae,log_coefficient,log_coefficient_se,suits_index,prd\n";
        for (const auto& row : report.county_years) {
            out << row.county_id << "," << row.year << "," << row.metrics.n << ","
                << format_double(row.metrics.mape) << "," << format_double(row.metrics.rmse) << ","
                << format_double(row.metrics.mae) << ","
                << format_double(row.metrics.log_coefficient) << ","
                << format_double(row.metrics.log_coefficient_se) << ","
                << format_double(row.metrics.suits_index) << "," << format_double(row.metrics.prd)
                << "\n";
        }
        write_text_file(dir / "county_year_metrics.csv", out.str());
    }

    if (!report.synth_rows.empty()) {
        std::ostringstream out;
        out << provenance_comment(report);
        out << "exponent,implied_log_coefficient,measured_log_coefficient,suits_index,prd,n\n";
        for (const auto& row : report.synth_rows) {
            out << format_double(row.exponent) << ","
                << format_double(row.implied_log_coefficient) << ","
                << format_double(row.measured.log_coefficient) << ","
                << format_double(row.measured.suits_index) << "," << format_double(row.measured.prd)
                << "," << row.measured.n << "\n";
        }
        write_text_file(dir / "synth_validation.csv", out.str());
    }

    // ---- pareto scatter, censored per axis for display only ----
    if (!report.counties.empty()) {
        std::vector<double> acc, fair;
        for (const auto& row : report.counties) {
            acc.push_back(row.outcome.accuracy.estimate);
            fair.push_back(row.outcome.fairness.estimate);
        }
        const auto keep_acc = censor_for_display(acc);
        const auto keep_fair = censor_for_display(fair);
        std::set<std::size_t> keep(keep_acc.begin(), keep_acc.end());
        std::set<std::size_t> keep_f(keep_fair.begin(), keep_fair.end());

        std::ostringstream out;
        out << provenance_comment(report);
        out << "county_id,accuracy_delta,fairness_delta,accuracy_significant,fairness_significant,"
               "classification\n";
        for (std::size_t i = 0; i < report.counties.size(); ++i) {
            if (!keep.count(i) || !keep_f.count(i)) continue;
            const auto& row = report.counties[i];
            out << row.county_id << "," << format_double(row.outcome.accuracy.estimate) << ","
                << format_double(row.outcome.fairness.estimate) << ","
                << (row.outcome.accuracy_significant ? 1 : 0) << ","
                << (row.outcome.fairness_significant ? 1 : 0) << ","
                << pareto_class_name(row.outcome.classification) << "\n";
        }
        write_text_file(dir / "pareto_points.csv", out.str());
    }

    for (const auto& s : report.binscatters) {
        write_text_file(dir / ("binscatter_" + sanitize_filename(s.y_name) + ".csv"),
                        series_csv(report, s));
    }
    if (report.has_quintile) {
        std::ostringstream out;
        out << provenance_comment(report);
        out << "quintile,price_mean,mape_delta,mape_ci_low,mape_ci_high,price_delta,price_ci_low,"
               "price_ci_high,count\n";
        for (std::size_t q = 0; q < report.quintile_series.mape_delta.bins.size(); ++q) {
            const Bin& m = report.quintile_series.mape_delta.bins[q];
            const Bin& p = report.quintile_series.price_delta.bins[q];
            out << format_double(m.key) << "," << format_double(m.x_mean) << ","
                << format_double(m.mean) << "," << format_double(m.ci_low) << ","
                << format_double(m.ci_high) << "," << format_double(p.mean) << ","
                << format_double(p.ci_low) << "," << format_double(p.ci_high) << "," << m.count
                << "\n";
        }
        write_text_file(dir / "quintile_impact.csv", out.str());
    }
    for (const auto& s : report.group_curves) {
        const std::string name =
            "group_curve_" + sanitize_filename(s.x_name) + "_" + sanitize_filename(s.y_name) + ".csv";
        write_text_file(dir / name, series_csv(report, s));
    }

    if (!report.rejects.empty()) write_rejects_csv(dir / "rejects.csv", report.rejects);

    if (!report.failures.empty()) {
        json manifest = json::array();
        for (const auto& f : report.failures) {
            manifest.push_back(json{{"county_id", f.county_id}, {"error", f.error}});
        }
        write_text_file(dir / "failure_manifest.json", manifest.dump(2) + "\n");
    }

    write_text_file(dir / "summary.txt", render_summary(report));
}

ExperimentReport load_report(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw IoFailure("cannot open " + json_path.string());
    json j;
    in >> j;

    ExperimentReport report;
    const json& prov = j.at("provenance");
    const auto kind = experiment_kind_from_name(prov.at("kind"));
    if (!kind) throw IoFailure("report has unknown kind");
    report.kind = *kind;
    report.config_digest = prov.at("config_hash");
    report.seed = prov.at("seed");
    report.code_version = prov.at("code_version");
    report.accuracy_metric = prov.at("accuracy_metric");
    report.fairness_metric = prov.at("fairness_metric");

    const json& agg = j.at("aggregate");
    report.aggregate.n_counties = agg.at("n_counties");
    report.aggregate.n_failures = agg.at("n_failures");
    report.aggregate.n_both_significant = agg.at("n_both_significant");
    report.aggregate.n_joint_gain = agg.at("n_joint_gain");
    report.aggregate.n_tradeoff = agg.at("n_tradeoff");
    report.aggregate.n_mixed = agg.at("n_mixed");
    report.aggregate.share_significant = agg.at("share_significant");
    report.aggregate.share_joint_gain_among_significant =
        agg.at("share_joint_gain_among_significant");

    for (const json& c : j.at("counties")) {
        CountyExperimentRow row;
        row.county_id = c.at("county_id");
        row.n_train = c.at("n_train");
        row.n_test = c.at("n_test");
        row.baseline = metric_set_from_json(c.at("baseline"));
        row.alternative = metric_set_from_json(c.at("alternative"));
        row.outcome.county_id = row.county_id;
        row.outcome.accuracy = delta_from_json(c.at("accuracy_delta"));
        row.outcome.fairness = delta_from_json(c.at("fairness_delta"));
        row.accuracy_adjusted_p = c.at("accuracy_delta").at("adjusted_p");
        row.fairness_adjusted_p = c.at("fairness_delta").at("adjusted_p");
        row.outcome.accuracy_significant = c.at("accuracy_delta").at("significant");
        row.outcome.fairness_significant = c.at("fairness_delta").at("significant");
        row.outcome.accuracy_improving = c.at("accuracy_delta").at("improving");
        row.outcome.fairness_improving = c.at("fairness_delta").at("improving");
        row.outcome.fairness_crossed_zero = c.at("fairness_delta").value("crossed_zero", false);
        const std::string cls = c.at("classification");
        if (cls == "joint_gain") row.outcome.classification = ParetoClass::joint_gain;
        else if (cls == "tradeoff") row.outcome.classification = ParetoClass::tradeoff;
        else row.outcome.classification = ParetoClass::mixed_insignificant;
        report.counties.push_back(std::move(row));
    }
    for (const json& c : j.at("county_years")) {
        report.county_years.push_back(
            {c.at("county_id"), c.at("year"), metric_set_from_json(c.at("metrics"))});
    }
    for (const json& c : j.at("synth_rows")) {
        report.synth_rows.push_back(
            {c.at("exponent"), c.at("implied_log_coefficient"), metric_set_from_json(c.at("measured"))});
    }
    for (const json& f : j.at("failures")) {
        report.failures.push_back({f.at("county_id"), f.at("error")});
    }
    return report;
}

std::string render_summary(const ExperimentReport& report) {
    std::ostringstream out;
    out << "taxeval " << experiment_kind_name(report.kind) << " report\n";
    out << "config " << report.config_digest << "  seed " << report.seed << "  version "
        << report.code_version << "\n\n";

    const AggregateCounts& a = report.aggregate;
    switch (report.kind) {
        case ExperimentKind::ablation:
        case ExperimentKind::census: {
            out << "accuracy metric: " << report.accuracy_metric
                << "   fairness metric: " << report.fairness_metric << "\n";
            out << "counties analyzed: " << a.n_counties << "  (failures: " << a.n_failures << ")\n";
            char pct[32];
            std::snprintf(pct, sizeof(pct), "%.1f", a.share_significant * 100.0);
            out << "significant on both axes (post-BH): " << a.n_both_significant << " (" << pct
                << "%)\n";
            std::snprintf(pct, sizeof(pct), "%.1f", a.share_joint_gain_among_significant * 100.0);
            out << "joint gains: " << a.n_joint_gain << " (" << pct
                << "% of significant)   tradeoffs: " << a.n_tradeoff << "   mixed: " << a.n_mixed
                << "\n";
            break;
        }
        case ExperimentKind::metrics_report:
            out << "county-year metric rows: " << report.county_years.size()
                << "  (failures: " << a.n_failures << ")\n";
            out << "binscatter series emitted: " << report.binscatters.size() << "\n";
            break;
        case ExperimentKind::synth_validate:
            out << "synthetic power-law markets: " << report.synth_rows.size() << "\n";
            for (const auto& row : report.synth_rows) {
                out << "  exponent " << format_double(row.exponent) << ": implied LC "
                    << format_double(row.implied_log_coefficient) << ", measured LC "
                    << format_double(row.measured.log_coefficient) << ", suits "
                    << format_double(row.measured.suits_index) << ", prd "
                    << format_double(row.measured.prd) << "\n";
            }
            break;
    }
    return out.str();
}

} // namespace taxeval
