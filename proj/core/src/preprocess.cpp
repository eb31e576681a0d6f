#include "taxeval/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "taxeval/errors.hpp"

namespace taxeval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int year_start_serial(int year) {
    // days since a fixed epoch for Jan 1 of `year`; proleptic Gregorian
    const int y = year - 1;
    return y * 365 + y / 4 - y / 100 + y / 400;
}

int day_of_year(const Date& d) {
    static constexpr int kCum[] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    int doy = kCum[d.month - 1] + d.day;
    const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
    if (leap && d.month > 2) ++doy;
    return doy;
}

} // namespace

SplitPlan chronological_split(const CountyPanel& panel) {
    int min_year = std::numeric_limits<int>::max();
    int max_year = std::numeric_limits<int>::min();
    for (const SaleRecord& r : panel.records) {
        min_year = std::min(min_year, r.sale_date.year);
        max_year = std::max(max_year, r.sale_date.year);
    }
    if (panel.records.empty() || min_year == max_year) throw SingleYearPanel();

    SplitPlan plan;
    plan.test_year = max_year;
    for (std::size_t i = 0; i < panel.records.size(); ++i) {
        (panel.records[i].sale_date.year == max_year ? plan.test : plan.train).push_back(i);
    }
    return plan;
}

OneHotSpec one_hot_fit(const std::string& source,
                       std::span<const std::optional<std::string>> fit_values,
                       double category_floor) {
    std::map<std::string, std::size_t> counts;
    for (const auto& v : fit_values) {
        if (v) ++counts[*v];
    }
    OneHotSpec spec;
    spec.source = source;
    const double n = static_cast<double>(fit_values.size());
    for (const auto& [category, count] : counts) {
        // "at least 5%": the floor itself is retained
        if (static_cast<double>(count) >= category_floor * n) spec.categories.push_back(category);
    }
    return spec; // std::map iteration gives lexicographic order
}

bool drop_sparse_feature(double missing_fraction, double threshold) {
    return missing_fraction > threshold;
}

double quantile_nearest_rank(std::span<const double> values, double p) {
    if (values.empty()) throw EmptyInput("quantile_nearest_rank");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(p * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

std::optional<WinsorStandardizeSpec> winsor_standardize_fit(std::span<const double> fit_values,
                                                            double lo_pct, double hi_pct) {
    if (fit_values.empty()) throw EmptyInput("winsor_standardize_fit");
    WinsorStandardizeSpec spec;
    spec.lo_bound = quantile_nearest_rank(fit_values, lo_pct);
    spec.hi_bound = quantile_nearest_rank(fit_values, hi_pct);

    double sum = 0.0;
    for (double v : fit_values) sum += std::clamp(v, spec.lo_bound, spec.hi_bound);
    spec.mean = sum / static_cast<double>(fit_values.size());

    double ss = 0.0;
    for (double v : fit_values) {
        const double c = std::clamp(v, spec.lo_bound, spec.hi_bound) - spec.mean;
        ss += c * c;
    }
    if (fit_values.size() < 2 || ss == 0.0) return std::nullopt; // zero variance
    spec.sd = std::sqrt(ss / (static_cast<double>(fit_values.size()) - 1.0));
    return spec;
}

double winsor_standardize_apply(const WinsorStandardizeSpec& spec, double value) {
    return (std::clamp(value, spec.lo_bound, spec.hi_bound) - spec.mean) / spec.sd;
}

WinsorizeResult winsorize_then_standardize(const Eigen::MatrixXd& matrix, double lo_pct,
                                           double hi_pct) {
    WinsorizeResult result;
    result.values = matrix;
    result.specs.resize(static_cast<std::size_t>(matrix.cols()));
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        std::vector<double> col(matrix.col(c).data(), matrix.col(c).data() + matrix.rows());
        auto spec = winsor_standardize_fit(col, lo_pct, hi_pct);
        if (!spec) {
            result.zero_variance_columns.push_back(static_cast<std::size_t>(c));
            continue;
        }
        result.specs[static_cast<std::size_t>(c)] = *spec;
        for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
            result.values(i, c) = winsor_standardize_apply(*spec, matrix(i, c));
        }
    }
    return result;
}

std::vector<std::string> time_of_sale_feature_names() {
    return {"sale_year_index", "sale_quarter_q2", "sale_quarter_q3",
            "sale_quarter_q4", "sale_month_of_quarter", "sale_days_since_start"};
}

std::map<std::string, FeatureValue> time_of_sale_features(const Date& sale_date,
                                                          const YearRange& window) {
    const int quarter = (sale_date.month - 1) / 3 + 1;
    const int serial = year_start_serial(sale_date.year) + day_of_year(sale_date);
    const int start_serial = year_start_serial(window.first) + 1;
    std::map<std::string, FeatureValue> out;
    out["sale_year_index"] = static_cast<double>(sale_date.year - window.first);
    out["sale_quarter_q2"] = quarter == 2 ? 1.0 : 0.0;
    out["sale_quarter_q3"] = quarter == 3 ? 1.0 : 0.0;
    out["sale_quarter_q4"] = quarter == 4 ? 1.0 : 0.0;
    out["sale_month_of_quarter"] = static_cast<double>((sale_date.month - 1) % 3 + 1);
    out["sale_days_since_start"] = static_cast<double>(serial - start_serial);
    return out;
}

namespace {

const FeatureValue* find_feature(const SaleRecord& r, const std::string& name) {
    auto it = r.features.find(name);
    return it == r.features.end() ? nullptr : &it->second;
}

} // namespace

Preprocessor Preprocessor::fit(std::span<const SaleRecord> train_rows,
                               std::span<const std::string> feature_names,
                               const PipelineConfig& config) {
    if (train_rows.empty()) throw EmptyInput("Preprocessor::fit");
    Preprocessor prep;

    // classify each feature from the training rows: categorical iff any
    // non-missing value is a string
    for (const std::string& name : feature_names) {
        bool seen = false, categorical = false;
        for (const SaleRecord& r : train_rows) {
            const FeatureValue* v = find_feature(r, name);
            if (!v || is_missing(*v)) continue;
            seen = true;
            if (std::holds_alternative<std::string>(*v)) categorical = true;
        }
        if (!seen) continue; // entirely missing in training: nothing to fit
        prep.input_features_.push_back(name);
        prep.input_is_categorical_.push_back(categorical);
    }

    const double n = static_cast<double>(train_rows.size());

    // one-hot on categoricals, then the sparse-column drop on every planned column
    for (std::size_t f = 0; f < prep.input_features_.size(); ++f) {
        const std::string& name = prep.input_features_[f];
        if (prep.input_is_categorical_[f]) {
            std::vector<std::optional<std::string>> values;
            values.reserve(train_rows.size());
            for (const SaleRecord& r : train_rows) {
                const FeatureValue* v = find_feature(r, name);
                if (v && std::holds_alternative<std::string>(*v)) {
                    values.emplace_back(std::get<std::string>(*v));
                } else if (v && std::holds_alternative<double>(*v)) {
                    // numeric stragglers in a categorical column count as labels
                    values.emplace_back(std::to_string(std::get<double>(*v)));
                } else {
                    values.emplace_back(std::nullopt);
                }
            }
            OneHotSpec spec = one_hot_fit(name, values, config.category_floor);
            std::size_t missing_count = 0;
            for (const auto& v : values) {
                if (!v) ++missing_count;
            }
            const double missing_frac = static_cast<double>(missing_count) / n;
            prep.one_hot_.push_back(spec);
            for (const std::string& category : spec.categories) {
                if (drop_sparse_feature(missing_frac, config.missing_drop_threshold)) continue;
                prep.planned_.push_back({name, true, category});
                prep.planned_is_indicator_.push_back(true);
            }
        } else {
            std::size_t missing_count = 0;
            for (const SaleRecord& r : train_rows) {
                const FeatureValue* v = find_feature(r, name);
                if (!v || is_missing(*v)) ++missing_count;
            }
            if (drop_sparse_feature(static_cast<double>(missing_count) / n,
                                    config.missing_drop_threshold)) {
                continue;
            }
            prep.planned_.push_back({name, false, ""});
            prep.planned_is_indicator_.push_back(false);
        }
    }

    // assemble the training matrix (NaN = missing) and impute
    Eigen::MatrixXd train = prep.assemble(train_rows, false);
    std::vector<bool> had_missing(prep.planned_.size(), false);
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        for (Eigen::Index i = 0; i < train.rows(); ++i) {
            if (std::isnan(train(i, c))) {
                had_missing[static_cast<std::size_t>(c)] = true;
                break;
            }
        }
    }
    prep.mice_ = mice_fit(train, prep.planned_is_indicator_, config.mice_iterations, config.seed);

    // winsorize + standardize numerics on the imputed training values
    prep.winsor_.resize(prep.planned_.size());
    prep.keep_.assign(prep.planned_.size(), true);
    for (std::size_t c = 0; c < prep.planned_.size(); ++c) {
        if (prep.planned_is_indicator_[c]) {
            // indicators stay 0/1, but a constant one carries nothing
            const double first = train(0, static_cast<Eigen::Index>(c));
            bool constant = true;
            for (Eigen::Index i = 1; i < train.rows(); ++i) {
                if (train(i, static_cast<Eigen::Index>(c)) != first) {
                    constant = false;
                    break;
                }
            }
            if (constant) {
                prep.keep_[c] = false;
                prep.warnings_.push_back("ZeroVarianceColumn: " + prep.planned_[c].source + "=" +
                                         prep.planned_[c].category + " dropped");
            }
            continue;
        }
        std::vector<double> col(train.col(static_cast<Eigen::Index>(c)).data(),
                                train.col(static_cast<Eigen::Index>(c)).data() + train.rows());
        auto spec = winsor_standardize_fit(col, config.winsor_lo, config.winsor_hi);
        if (!spec) {
            prep.keep_[c] = false;
            prep.warnings_.push_back("ZeroVarianceColumn: " + prep.planned_[c].source + " dropped");
            continue;
        }
        prep.winsor_[c] = *spec;
    }

    for (std::size_t c = 0; c < prep.planned_.size(); ++c) {
        if (!prep.keep_[c]) continue;
        ColumnMeta meta;
        meta.source = prep.planned_[c].source;
        if (prep.planned_is_indicator_[c]) {
            meta.kind = ColumnMeta::Kind::indicator;
            meta.category = prep.planned_[c].category;
            meta.name = meta.source + "=" + meta.category;
        } else {
            meta.kind = ColumnMeta::Kind::numeric;
            meta.name = meta.source;
            meta.winsorized = true;
            meta.standardized = true;
            meta.winsor_lo = prep.winsor_[c]->lo_bound;
            meta.winsor_hi = prep.winsor_[c]->hi_bound;
            meta.standardize_mean = prep.winsor_[c]->mean;
            meta.standardize_sd = prep.winsor_[c]->sd;
        }
        meta.imputed_any = had_missing[c];
        prep.output_meta_.push_back(meta);
    }
    return prep;
}

Eigen::MatrixXd Preprocessor::assemble(std::span<const SaleRecord> rows,
                                       bool structural_check) const {
    if (structural_check) {
        // a fitted input feature no record carries at all is a schema problem,
        // not a missing-value problem
        for (const std::string& name : input_features_) {
            bool present = false;
            for (const SaleRecord& r : rows) {
                if (r.features.count(name)) {
                    present = true;
                    break;
                }
            }
            if (!present && !rows.empty()) throw SchemaMismatch("fitted feature '" + name + "' absent from rows");
        }
    }

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(planned_.size()));

    // per-input one-hot lookup
    std::map<std::string, std::size_t> categorical_index;
    {
        std::size_t k = 0;
        for (std::size_t f = 0; f < input_features_.size(); ++f) {
            if (input_is_categorical_[f]) categorical_index[input_features_[f]] = k++;
        }
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < planned_.size(); ++c) {
            const PlannedColumn& plan = planned_[c];
            const FeatureValue* v = find_feature(rows[i], plan.source);
            double cell = kNaN;
            if (plan.from_categorical) {
                if (v && std::holds_alternative<std::string>(*v)) {
                    cell = std::get<std::string>(*v) == plan.category ? 1.0 : 0.0;
                } else if (v && std::holds_alternative<double>(*v)) {
                    cell = std::to_string(std::get<double>(*v)) == plan.category ? 1.0 : 0.0;
                }
                // missing raw value: indicator stays NaN, imputation fills it
            } else {
                if (v && std::holds_alternative<double>(*v)) {
                    cell = std::get<double>(*v);
                } else if (v && std::holds_alternative<std::string>(*v)) {
                    throw SchemaMismatch("feature '" + plan.source +
                                         "' was fit as numeric but holds a string value");
                }
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = cell;
        }
    }
    return m;
}

FeatureMatrix Preprocessor::transform(std::span<const SaleRecord> rows) const {
    Eigen::MatrixXd m = assemble(rows, true);
    mice_apply(mice_, m);

    FeatureMatrix out;
    out.columns = output_meta_;
    out.values.resize(m.rows(), static_cast<Eigen::Index>(output_meta_.size()));

    Eigen::Index out_c = 0;
    for (std::size_t c = 0; c < planned_.size(); ++c) {
        if (!keep_[c]) continue;
        if (winsor_[c]) {
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                out.values(i, out_c) = winsor_standardize_apply(*winsor_[c], m(i, static_cast<Eigen::Index>(c)));
            }
        } else {
            out.values.col(out_c) = m.col(static_cast<Eigen::Index>(c));
        }
        ++out_c;
    }
    return out;
}

} // namespace taxeval
