#include "taxeval/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "taxeval/errors.hpp"

namespace taxeval {

namespace {

// RFC-style field splitting: quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

constexpr const char* kRequired[] = {"county_id", "block_group_id", "sale_date", "sale_price",
                                     "assessed_value"};

} // namespace

std::string format_double(double value) {
    // shortest representation that round-trips, so re-parsing emitted data
    // reproduces the exact value
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

SalesLoadResult load_sales_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw IoFailure("empty file " + path.string());

    std::size_t header_line = 0;
    while (header_line < lines.size() &&
           (lines[header_line].empty() || lines[header_line][0] == '#')) {
        ++header_line;
    }
    if (header_line == lines.size()) throw IoFailure("no header row in " + path.string());

    const auto header = split_csv_line(lines[header_line]);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* required : kRequired) {
        if (!col.count(required)) throw MissingColumn(required);
    }
    const bool has_weight = col.count("sample_weight") > 0;

    std::vector<std::size_t> feature_cols;
    std::vector<std::string> feature_names;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& name = header[i];
        if (std::find_if(std::begin(kRequired), std::end(kRequired),
                         [&](const char* r) { return name == r; }) != std::end(kRequired)) {
            continue;
        }
        if (name == "sample_weight") continue;
        feature_cols.push_back(i);
        feature_names.push_back(name);
    }

    // first pass: type each feature column (numeric iff every non-empty cell parses)
    std::vector<bool> numeric(feature_cols.size(), true);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;
    for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
        if (lines[li].empty() || lines[li][0] == '#') continue;
        rows.push_back(split_csv_line(lines[li]));
        row_lines.push_back(li + 1); // 1-based for humans
    }
    for (const auto& fields : rows) {
        if (fields.size() != header.size()) continue; // rejected later
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const std::string& cell = fields[feature_cols[f]];
            if (!cell.empty() && !parse_double(cell)) numeric[f] = false;
        }
    }

    SalesLoadResult result;
    std::map<std::string, CountyPanel> by_county;

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& fields = rows[r];
        if (fields.size() != header.size()) {
            result.rejects.push_back({row_lines[r], "UnparseableRow: expected " +
                                                        std::to_string(header.size()) + " fields, got " +
                                                        std::to_string(fields.size()),
                                      lines[row_lines[r] - 1]});
            continue;
        }

        SaleRecord record;
        record.county_id = fields[col["county_id"]];
        record.block_group_id = fields[col["block_group_id"]];

        const auto date = Date::parse_iso(fields[col["sale_date"]]);
        if (!date) {
            result.rejects.push_back(
                {row_lines[r], "UnparseableRow: bad sale_date '" + fields[col["sale_date"]] + "'",
                 lines[row_lines[r] - 1]});
            continue;
        }
        record.sale_date = *date;

        const auto price = parse_double(fields[col["sale_price"]]);
        const auto assessed = parse_double(fields[col["assessed_value"]]);
        if (!price || !assessed || *price <= 0.0 || *assessed <= 0.0) {
            result.rejects.push_back({row_lines[r], "NonPositivePrice", lines[row_lines[r] - 1]});
            continue;
        }
        record.sale_price = *price;
        record.assessed_value = *assessed;

        if (has_weight) {
            const std::string& cell = fields[col["sample_weight"]];
            if (!cell.empty()) {
                const auto w = parse_double(cell);
                if (!w || *w <= 0.0) {
                    result.rejects.push_back({row_lines[r], "BadWeight", lines[row_lines[r] - 1]});
                    continue;
                }
                record.sample_weight = *w;
            }
        }

        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const std::string& cell = fields[feature_cols[f]];
            if (cell.empty()) {
                record.features[feature_names[f]] = FeatureValue{};
            } else if (numeric[f]) {
                record.features[feature_names[f]] = *parse_double(cell);
            } else {
                record.features[feature_names[f]] = cell;
            }
        }

        by_county[record.county_id].records.push_back(std::move(record));
    }

    for (auto& [county, panel] : by_county) {
        panel.county_id = county;
        int lo = panel.records.front().sale_date.year;
        int hi = lo;
        for (const SaleRecord& rec : panel.records) {
            lo = std::min(lo, rec.sale_date.year);
            hi = std::max(hi, rec.sale_date.year);
        }
        panel.year_range = {lo, hi};
        result.panels.push_back(std::move(panel));
    }
    return result;
}

std::vector<CensusBlockGroupRow> load_census_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw IoFailure("empty file " + path.string());

    std::size_t header_line = 0;
    while (header_line < lines.size() &&
           (lines[header_line].empty() || lines[header_line][0] == '#')) {
        ++header_line;
    }
    const auto header = split_csv_line(lines[header_line]);
    if (header.empty() || header[0] != "block_group_id") throw MissingColumn("block_group_id");

    std::vector<CensusBlockGroupRow> out;
    std::set<std::string> seen;
    for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
        if (lines[li].empty() || lines[li][0] == '#') continue;
        const auto fields = split_csv_line(lines[li]);
        if (fields.size() != header.size()) {
            throw IoFailure("census row at line " + std::to_string(li + 1) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(header.size()));
        }
        CensusBlockGroupRow row;
        row.block_group_id = fields[0];
        if (!seen.insert(row.block_group_id).second) {
            throw DuplicateBlockGroupRow(row.block_group_id);
        }
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (fields[i].empty()) continue; // explicitly missing
            const auto v = parse_double(fields[i]);
            if (!v) {
                throw IoFailure("census attribute '" + header[i] + "' at line " +
                                std::to_string(li + 1) + " is not numeric");
            }
            row.attributes[header[i]] = *v;
        }
        out.push_back(std::move(row));
    }
    return out;
}

CensusJoinStats join_census(std::vector<CountyPanel>& panels,
                            std::span<const CensusBlockGroupRow> census,
                            std::span<const std::string> report_only) {
    std::map<std::string, const CensusBlockGroupRow*> by_id;
    std::set<std::string> attribute_names;
    for (const auto& row : census) {
        if (!by_id.emplace(row.block_group_id, &row).second) {
            throw DuplicateBlockGroupRow(row.block_group_id);
        }
        for (const auto& [name, _] : row.attributes) attribute_names.insert(name);
    }
    const std::set<std::string> excluded(report_only.begin(), report_only.end());

    CensusJoinStats stats;
    for (CountyPanel& panel : panels) {
        for (SaleRecord& record : panel.records) {
            const auto it = by_id.find(record.block_group_id);
            if (it == by_id.end()) {
                ++stats.unmatched_records;
            } else {
                ++stats.matched_records;
            }
            for (const std::string& name : attribute_names) {
                if (excluded.count(name)) continue;
                FeatureValue value{}; // explicit missing sentinel
                if (it != by_id.end()) {
                    const auto attr = it->second->attributes.find(name);
                    if (attr != it->second->attributes.end()) value = attr->second;
                }
                record.features["census." + name] = value;
            }
        }
    }
    return stats;
}

void write_sales_csv(const std::filesystem::path& path, std::span<const CountyPanel> panels) {
    std::set<std::string> feature_names;
    bool any_weight = false;
    for (const auto& panel : panels) {
        for (const auto& record : panel.records) {
            for (const auto& [name, _] : record.features) feature_names.insert(name);
            any_weight = any_weight || record.sample_weight.has_value();
        }
    }

    std::ofstream out(path);
    if (!out) throw IoFailure("cannot write " + path.string());
    out << "county_id,block_group_id,sale_date,sale_price,assessed_value";
    if (any_weight) out << ",sample_weight";
    for (const auto& name : feature_names) out << "," << csv_escape(name);
    out << "\n";

    for (const auto& panel : panels) {
        for (const auto& record : panel.records) {
            out << csv_escape(record.county_id) << "," << csv_escape(record.block_group_id) << ","
                << record.sale_date.to_iso() << "," << format_double(record.sale_price) << ","
                << format_double(record.assessed_value);
            if (any_weight) {
                out << ",";
                if (record.sample_weight) out << format_double(*record.sample_weight);
            }
            for (const auto& name : feature_names) {
                out << ",";
                const auto it = record.features.find(name);
                if (it == record.features.end() || is_missing(it->second)) continue;
                if (std::holds_alternative<double>(it->second)) {
                    out << format_double(std::get<double>(it->second));
                } else {
                    out << csv_escape(std::get<std::string>(it->second));
                }
            }
            out << "\n";
        }
    }
}

void write_census_csv(const std::filesystem::path& path,
                      std::span<const CensusBlockGroupRow> rows) {
    std::set<std::string> attribute_names;
    for (const auto& row : rows) {
        for (const auto& [name, _] : row.attributes) attribute_names.insert(name);
    }

    std::ofstream out(path);
    if (!out) throw IoFailure("cannot write " + path.string());
    out << "block_group_id";
    for (const auto& name : attribute_names) out << "," << csv_escape(name);
    out << "\n";
    for (const auto& row : rows) {
        out << csv_escape(row.block_group_id);
        for (const auto& name : attribute_names) {
            out << ",";
            const auto it = row.attributes.find(name);
            if (it != row.attributes.end()) out << format_double(it->second);
        }
        out << "\n";
    }
}

void write_rejects_csv(const std::filesystem::path& path, std::span<const RejectedRow> rejects) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot write " + path.string());
    out << "line_number,reason,raw\n";
    for (const auto& reject : rejects) {
        out << reject.line_number << "," << csv_escape(reject.reason) << ","
            << csv_escape(reject.raw) << "\n";
    }
}

} // namespace taxeval
