#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace taxeval {

/// Provenance of the transforms that produced one model-ready column.
/// Everything recorded here was fit on training rows only.
struct ColumnMeta {
    enum class Kind { numeric, indicator };

    std::string name;     // emitted column name
    std::string source;   // raw feature it came from
    Kind kind = Kind::numeric;
    std::string category; // indicator source category, empty for numeric
    double winsor_lo = 0.0;
    double winsor_hi = 0.0;
    double standardize_mean = 0.0;
    double standardize_sd = 1.0;
    bool winsorized = false;
    bool standardized = false;
    bool imputed_any = false;
};

/// Preprocessed numeric design matrix with per-column transform provenance.
struct FeatureMatrix {
    Eigen::MatrixXd values; // rows x columns, no missing values post-pipeline
    std::vector<ColumnMeta> columns;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
    std::vector<std::string> column_names() const {
        std::vector<std::string> names;
        names.reserve(columns.size());
        for (const auto& c : columns) names.push_back(c.name);
        return names;
    }
};

} // namespace taxeval
