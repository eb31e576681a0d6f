#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "taxeval/domain.hpp"

namespace taxeval {

// Sales CSV header contract (bit-exact): county_id, block_group_id,
// sale_date (ISO-8601), sale_price, assessed_value, then feature columns.
// An optional sample_weight column carries inverse inclusion probabilities.
// Empty cells are missing; a feature column is numeric iff every non-empty
// cell in the file parses as a number. Lines starting with '#' are skipped.

struct RejectedRow {
    std::size_t line_number = 0;
    std::string reason;
    std::string raw;
};

struct SalesLoadResult {
    std::vector<CountyPanel> panels; // sorted by county_id, input order within
    std::vector<RejectedRow> rejects;
};

/// Parses the sales file, grouping typed records by county. Malformed rows
/// land in `rejects` with a reason, never silently dropped. Throws
/// MissingColumn when the header lacks a required column.
SalesLoadResult load_sales_csv(const std::filesystem::path& path);

/// Census table: block_group_id plus numeric attribute columns. Throws
/// DuplicateBlockGroupRow on a repeated geoid.
std::vector<CensusBlockGroupRow> load_census_csv(const std::filesystem::path& path);

struct CensusJoinStats {
    std::size_t matched_records = 0;
    std::size_t unmatched_records = 0;
};

/// Left join: attaches census attributes to every record as features named
/// "census.<attribute>". Columns listed in `report_only` are excluded so the
/// pipeline can never select them as model features. Unmatched block groups
/// get explicit missing sentinels and are counted.
CensusJoinStats join_census(std::vector<CountyPanel>& panels,
                            std::span<const CensusBlockGroupRow> census,
                            std::span<const std::string> report_only);

void write_sales_csv(const std::filesystem::path& path, std::span<const CountyPanel> panels);
void write_census_csv(const std::filesystem::path& path,
                      std::span<const CensusBlockGroupRow> rows);
void write_rejects_csv(const std::filesystem::path& path, std::span<const RejectedRow> rejects);

/// "%.12g" double formatting shared by every CSV/JSON emitter so reruns are
/// byte-stable.
std::string format_double(double value);

} // namespace taxeval
