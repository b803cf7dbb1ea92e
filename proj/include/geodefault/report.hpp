#pragma once

// CSV artifacts (records, defaults, histograms, matches, forest extents)
// plus the human-readable markdown report. Doubles are written with 17
// significant digits so every file round-trips exactly.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geodefault/analysis.hpp"
#include "geodefault/csv.hpp"
#include "geodefault/error.hpp"
#include "geodefault/region_hierarchy.hpp"
#include "geodefault/util.hpp"

namespace geodefault {

// ---------------------------------------------------------------- records

inline std::string records_to_csv(const std::vector<CrossLevelRecord>& records) {
    std::string out = csv_line({"ancestor_code", "descendant_code", "descendant_level", "mse_value", "ssim_value"});
    for (const auto& r : records)
        out += csv_line({r.ancestor_code, r.descendant_code, std::to_string(level_ordinal(r.descendant_level)),
                         format_double(r.mse_value), format_double(r.ssim_value)});
    return out;
}

inline std::vector<CrossLevelRecord> records_from_csv(const CsvTable& table) {
    const std::size_t c_anc = table.column("ancestor_code");
    const std::size_t c_desc = table.column("descendant_code");
    const std::size_t c_level = table.column("descendant_level");
    const std::size_t c_mse = table.column("mse_value");
    const std::size_t c_ssim = table.column("ssim_value");
    std::vector<CrossLevelRecord> records;
    for (const auto& row : table.rows) {
        CrossLevelRecord r;
        r.ancestor_code = row[c_anc];
        r.descendant_code = row[c_desc];
        r.descendant_level = level_from_ordinal(parse_int(row[c_level], "descendant_level"));
        r.mse_value = parse_double(row[c_mse], "mse_value");
        r.ssim_value = parse_double(row[c_ssim], "ssim_value");
        if (r.mse_value < 0.0)
            throw_input("record " + r.ancestor_code + "/" + r.descendant_code + ": negative MSE");
        if (r.ssim_value < -1.0 || r.ssim_value > 1.0)
            throw_input("record " + r.ancestor_code + "/" + r.descendant_code + ": SSIM outside [-1,1]");
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------- defaults

inline std::string defaults_to_csv(const std::vector<DefaultReport>& reports) {
    std::string out = csv_line(
        {"ancestor", "level", "measure", "most_code", "most_value", "least_code", "least_value", "candidate_count"});
    for (const auto& r : reports)
        out += csv_line({r.ancestor_code, std::to_string(level_ordinal(r.level)), measure_name(r.measure),
                         r.most_code, format_double(r.most_value), r.least_code, format_double(r.least_value),
                         std::to_string(r.candidate_count)});
    return out;
}

inline std::vector<DefaultReport> defaults_from_csv(const CsvTable& table) {
    const std::size_t c_anc = table.column("ancestor");
    const std::size_t c_level = table.column("level");
    const std::size_t c_measure = table.column("measure");
    const std::size_t c_mc = table.column("most_code");
    const std::size_t c_mv = table.column("most_value");
    const std::size_t c_lc = table.column("least_code");
    const std::size_t c_lv = table.column("least_value");
    const std::size_t c_n = table.column("candidate_count");
    std::vector<DefaultReport> reports;
    for (const auto& row : table.rows) {
        DefaultReport r;
        r.ancestor_code = row[c_anc];
        r.level = level_from_ordinal(parse_int(row[c_level], "level"));
        r.measure = measure_from_name(row[c_measure]);
        r.most_code = row[c_mc];
        r.most_value = parse_double(row[c_mv], "most_value");
        r.least_code = row[c_lc];
        r.least_value = parse_double(row[c_lv], "least_value");
        r.candidate_count = static_cast<int>(parse_int(row[c_n], "candidate_count"));
        reports.push_back(std::move(r));
    }
    return reports;
}

// ---------------------------------------------------------------- histogram

/// Emits a contiguous run of bins from the lowest to the highest occupied
/// one; empty bins in between appear with count 0.
inline std::string histogram_to_csv(const Histogram& hist) {
    std::string out = csv_line({"bin_left_edge", "count"});
    if (!hist.counts.empty()) {
        const long long lo = hist.counts.begin()->first;
        const long long hi = hist.counts.rbegin()->first;
        for (long long i = lo; i <= hi; ++i) {
            const auto it = hist.counts.find(i);
            const long long count = it == hist.counts.end() ? 0 : it->second;
            out += csv_line({format_double(hist.bin_left_edge(i)), std::to_string(count)});
        }
    }
    return out;
}

// ---------------------------------------------------------------- matches

inline std::string matches_to_csv(const std::vector<ExtentMatch>& matches) {
    std::string out = csv_line({"level", "measure", "default_code", "most_forested_code", "matched"});
    for (const auto& m : matches)
        out += csv_line({std::to_string(level_ordinal(m.level)), measure_name(m.measure), m.default_code,
                         m.most_forested_code, m.matched ? "true" : "false"});
    return out;
}

// ---------------------------------------------------------------- extents

/// Reads region_code,level,extent_1e6_km2 rows; pass the hierarchy to check
/// that every code resolves.
inline std::vector<ForestExtentRow> extents_from_csv(const CsvTable& table, const RegionHierarchy* h = nullptr) {
    const std::size_t c_code = table.column("region_code");
    const std::size_t c_level = table.column("level");
    const std::size_t c_extent = table.column("extent_1e6_km2");
    std::vector<ForestExtentRow> rows;
    for (const auto& row : table.rows) {
        ForestExtentRow r;
        r.region_code = row[c_code];
        r.level = level_from_ordinal(parse_int(row[c_level], "level"));
        r.extent = parse_double(row[c_extent], "extent_1e6_km2");
        if (r.extent < 0.0) throw_input("forest extent for " + r.region_code + " is negative");
        if (h) {
            const RegionNode& node = h->at(r.region_code); // throws for unknown codes
            if (node.level != r.level)
                throw_input("forest extent row " + r.region_code + " claims level " +
                            std::to_string(level_ordinal(r.level)) + " but the hierarchy places it at " +
                            std::to_string(level_ordinal(node.level)));
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------- markdown

namespace detail {

/// Compact value for prose: integers as integers, fractions to 6 significant digits.
inline std::string pretty_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string region_label(const RegionHierarchy& h, const std::string& code) {
    if (h.contains(code)) return h.at(code).name + " (" + code + ")";
    return code;
}

inline std::string cell(const RegionHierarchy& h, const std::string& code, double value) {
    return (h.contains(code) ? h.at(code).name : code) + " (" + pretty_value(value) + ")";
}

} // namespace detail

struct MarkdownInputs {
    const RegionHierarchy& h;
    std::string ancestor_code;
    std::vector<DefaultReport> defaults; // both measures, any order
    std::vector<ConsistencyChain> chains;
    std::optional<double> threshold;     // SSIM tail threshold, if one separates
    bool threshold_overridden = false;
    std::map<Level, bool> default_exists; // from apply_threshold, empty if no threshold
    std::vector<ExtentMatch> matches;     // empty when no extent data was supplied
    long long record_count = 0;
};

/// Renders the report: per-level most/least table (levels top-down, MSE
/// before SSIM), threshold verdict, consistency chains, ground-truth matches.
inline std::string render_markdown_report(const MarkdownInputs& in) {
    std::string md;
    md += "# Regional default report\n\n";
    md += "Ancestor: " + detail::region_label(in.h, in.ancestor_code) + "\n";
    md += "Cross-level records: " + std::to_string(in.record_count) + "\n\n";

    std::map<Level, const DefaultReport*> by_level_mse, by_level_ssim;
    for (const auto& r : in.defaults)
        (r.measure == Measure::mse ? by_level_mse : by_level_ssim)[r.level] = &r;

    md += "## Most and least similar regions per level\n\n";
    md += "| Level | Most similar (MSE) | Most similar (SSIM) | Least similar (MSE) | Least similar (SSIM) |\n";
    md += "| --- | --- | --- | --- | --- |\n";
    std::set<Level> levels;
    for (const auto& r : in.defaults) levels.insert(r.level);
    for (const Level level : levels) {
        const DefaultReport* m = by_level_mse.count(level) ? by_level_mse.at(level) : nullptr;
        const DefaultReport* s = by_level_ssim.count(level) ? by_level_ssim.at(level) : nullptr;
        md += std::string("| ") + level_name(level) + " | " +
              (m ? detail::cell(in.h, m->most_code, m->most_value) : "—") + " | " +
              (s ? detail::cell(in.h, s->most_code, s->most_value) : "—") + " | " +
              (m ? detail::cell(in.h, m->least_code, m->least_value) : "—") + " | " +
              (s ? detail::cell(in.h, s->least_code, s->least_value) : "—") + " |\n";
    }

    md += "\n## Similarity threshold\n\n";
    if (in.threshold) {
        md += std::string(in.threshold_overridden ? "Threshold (override): "
                                                  : "SSIM tail threshold (Tukey upper fence): ") +
              detail::pretty_value(*in.threshold) + "\n\n";
        md += "Levels whose regional default stands (best SSIM above the threshold):\n\n";
        bool any = false;
        for (const auto& [level, exists] : in.default_exists) {
            if (!exists) continue;
            any = true;
            const DefaultReport* s = by_level_ssim.count(level) ? by_level_ssim.at(level) : nullptr;
            md += std::string("- ") + level_name(level) +
                  (s ? ": " + detail::cell(in.h, s->most_code, s->most_value) : "") + "\n";
        }
        if (!any) md += "- none\n";
        md += "\nNo cut-off is derived for MSE: the informative (low-error) tail of its "
              "right-skewed distribution is not separable by this rule.\n";
    } else {
        md += "No threshold separates the right tail of the SSIM distribution; "
              "all regional defaults are reported unfiltered.\n";
    }

    md += "\n## Hierarchy consistency\n\n";
    for (const auto& chain : in.chains) {
        md += std::string("- ") + measure_name(chain.measure) + ": ";
        for (std::size_t i = 0; i < chain.sequence.size(); ++i) {
            if (i) md += " -> ";
            md += detail::region_label(in.h, chain.sequence[i].region_code);
        }
        md += " (longest hierarchical run: " + std::to_string(chain.longest_hierarchical_run);
        if (chain.longest_hierarchical_run > 1) {
            md += ", ";
            for (int i = 0; i < chain.longest_hierarchical_run; ++i) {
                if (i) md += " -> ";
                md += chain.sequence[static_cast<std::size_t>(chain.run_start + i)].region_code;
            }
        }
        md += ")\n";
    }

    md += "\n## Comparison with forest-extent ground truth\n\n";
    if (in.matches.empty()) {
        md += "No forest-extent data supplied.\n";
    } else {
        md += "| Level | Measure | Regional default | Most forested | Matched |\n";
        md += "| --- | --- | --- | --- | --- |\n";
        for (const auto& m : in.matches)
            md += std::string("| ") + level_name(m.level) + " | " + measure_name(m.measure) + " | " +
                  detail::region_label(in.h, m.default_code) + " | " +
                  detail::region_label(in.h, m.most_forested_code) + " | " + (m.matched ? "yes" : "no") + " |\n";
    }
    return md;
}

} // namespace geodefault
