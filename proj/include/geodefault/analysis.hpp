#pragma once

// Regional-default analysis: cross-level similarity records, per-level
// default detection, hierarchy consistency, degree distributions with a
// Tukey-fence tail threshold, and forest-extent ground-truth matching.
// Everything here is a pure function of its inputs; pairwise similarity may
// fan out over threads but the output is assembled in a fixed order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geodefault/error.hpp"
#include "geodefault/generation.hpp"
#include "geodefault/image.hpp"
#include "geodefault/manifest.hpp"
#include "geodefault/png_codec.hpp"
#include "geodefault/region_hierarchy.hpp"
#include "geodefault/similarity.hpp"
#include "geodefault/store.hpp"
#include "geodefault/util.hpp"

namespace geodefault {

struct CrossLevelRecord {
    std::string ancestor_code;
    std::string descendant_code;
    Level descendant_level = Level::country;
    double mse_value = 0.0;
    double ssim_value = 0.0;
};

struct DefaultReport {
    std::string ancestor_code;
    Level level = Level::country;
    Measure measure = Measure::mse;
    std::string most_code;
    double most_value = 0.0;
    std::string least_code;
    double least_value = 0.0;
    int candidate_count = 0;
};

struct Histogram {
    double bin_width = 0.0;
    double origin = 0.0; // left edge of bin index 0
    std::map<long long, long long> counts;
    long long n_observations = 0;

    double bin_left_edge(long long index) const { return origin + bin_width * static_cast<double>(index); }
};

struct ForestExtentRow {
    std::string region_code;
    Level level = Level::country;
    double extent = 0.0; // 10^6 km^2
};

struct ChainEntry {
    Level level = Level::country;
    std::string region_code;
};

struct ConsistencyChain {
    Measure measure = Measure::mse;
    std::string ancestor_code;
    std::vector<ChainEntry> sequence; // one default per level, top-down
    int longest_hierarchical_run = 0; // consecutive entries where each contains the next
    int run_start = 0;                // index into sequence where that run begins
};

struct ExtentMatch {
    Level level = Level::country;
    Measure measure = Measure::mse;
    std::string default_code;
    std::string most_forested_code;
    bool matched = false;
};

struct CrossLevelOptions {
    SsimParams ssim;
    GrayWeights gray;
    int threads = 1;
    bool allow_partial = false;
};

/// Loads and grayscale-converts every ref exactly once, in parallel.
inline std::map<std::string, GrayImage> decode_gray_images(const ImageStore& store,
                                                           const std::vector<std::string>& refs,
                                                           const GrayWeights& weights, int threads) {
    std::vector<std::string> unique(refs);
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

    std::vector<GrayImage> grays(unique.size());
    parallel_for(unique.size(), threads, [&](std::size_t i) {
        grays[i] = to_grayscale(decode_png(store.load(unique[i])), weights);
    });

    std::map<std::string, GrayImage> out;
    for (std::size_t i = 0; i < unique.size(); ++i) out[unique[i]] = std::move(grays[i]);
    return out;
}

/// One record per non-excluded descendant of `ancestor` at every strictly
/// lower level, sorted by (level, descendant_code). Regions the provider
/// rejected count as excluded. Missing images abort with the offending
/// region codes unless allow_partial drops them instead.
inline std::vector<CrossLevelRecord> cross_level_similarities(const RegionHierarchy& h, const Manifest& manifest,
                                                              const ImageStore& store, const std::string& ancestor,
                                                              const CrossLevelOptions& opt) {
    opt.ssim.validate();
    const std::set<std::string> excluded = effective_exclusions(h, manifest);
    const RegionNode& anc = h.at(ancestor);
    if (excluded.count(ancestor)) throw_input("ancestor " + ancestor + " is excluded from analysis");

    const auto generated_ref = [&](const std::string& code) -> const std::string* {
        const auto it = manifest.outcomes.find(code);
        if (it == manifest.outcomes.end() || it->second.status != OutcomeStatus::generated) return nullptr;
        return &it->second.image_ref;
    };

    const std::string* anc_ref = generated_ref(ancestor);
    if (!anc_ref) throw_incomplete("ancestor " + ancestor + " has no generated image in the manifest");

    std::vector<CrossLevelRecord> records;
    std::vector<const std::string*> record_refs;
    std::vector<std::string> missing;
    for (int ord = level_ordinal(anc.level) + 1; ord < kLevelCount; ++ord) {
        const Level level = level_from_ordinal(ord);
        for (const RegionNode& node : descendants_at_level(h, ancestor, level, excluded)) {
            const std::string* ref = generated_ref(node.code);
            if (!ref) {
                missing.push_back(node.code);
                continue;
            }
            records.push_back({ancestor, node.code, level, 0.0, 0.0});
            record_refs.push_back(ref);
        }
    }
    if (!missing.empty() && !opt.allow_partial) {
        std::string joined;
        for (const auto& code : missing) joined += (joined.empty() ? "" : ", ") + code;
        throw_incomplete("no generated image for " + std::to_string(missing.size()) +
                         " non-excluded region(s): " + joined);
    }

    std::vector<std::string> all_refs{*anc_ref};
    for (const std::string* ref : record_refs) all_refs.push_back(*ref);
    const std::map<std::string, GrayImage> grays = decode_gray_images(store, all_refs, opt.gray, opt.threads);

    const GrayImage& anc_gray = grays.at(*anc_ref);
    parallel_for(records.size(), opt.threads, [&](std::size_t i) {
        const GrayImage& desc_gray = grays.at(*record_refs[i]);
        records[i].mse_value = mse(anc_gray, desc_gray);
        records[i].ssim_value = ssim(anc_gray, desc_gray, opt.ssim);
    });
    return records;
}

/// Most/least similar descendant at one level under one measure. Most
/// similar means lowest MSE or highest SSIM; ties go to the smaller code.
inline DefaultReport regional_defaults(const std::vector<CrossLevelRecord>& records, Level level, Measure measure) {
    DefaultReport report;
    report.level = level;
    report.measure = measure;

    const auto value_of = [measure](const CrossLevelRecord& r) {
        return measure == Measure::mse ? r.mse_value : r.ssim_value;
    };
    // "better" = more similar under the measure
    const auto better = [measure](double a, double b) { return measure == Measure::mse ? a < b : a > b; };

    bool found = false;
    for (const auto& r : records) {
        if (r.descendant_level != level) continue;
        const double v = value_of(r);
        if (!found) {
            report.ancestor_code = r.ancestor_code;
            report.most_code = report.least_code = r.descendant_code;
            report.most_value = report.least_value = v;
            report.candidate_count = 1;
            found = true;
            continue;
        }
        if (r.ancestor_code != report.ancestor_code)
            throw_input("regional_defaults needs records from a single ancestor (saw " + report.ancestor_code +
                        " and " + r.ancestor_code + ")");
        ++report.candidate_count;
        if (better(v, report.most_value) || (v == report.most_value && r.descendant_code < report.most_code)) {
            report.most_value = v;
            report.most_code = r.descendant_code;
        }
        if (better(report.least_value, v) || (v == report.least_value && r.descendant_code < report.least_code)) {
            report.least_value = v;
            report.least_code = r.descendant_code;
        }
    }
    if (!found)
        throw_input(std::string("no candidates at level \"") + level_name(level) + "\" for default detection");
    return report;
}

/// Assembles one default per level (top-down) and finds the longest
/// consecutive stretch where each default contains the next one.
inline ConsistencyChain consistency_chain(std::vector<DefaultReport> reports, const RegionHierarchy& h) {
    if (reports.empty()) throw_input("consistency chain needs at least one default report");
    std::sort(reports.begin(), reports.end(),
              [](const DefaultReport& a, const DefaultReport& b) { return a.level < b.level; });

    ConsistencyChain chain;
    chain.measure = reports.front().measure;
    chain.ancestor_code = reports.front().ancestor_code;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (r.measure != chain.measure) throw_input("consistency chain mixes measures");
        if (r.ancestor_code != chain.ancestor_code) throw_input("consistency chain mixes ancestors");
        if (i > 0 && reports[i - 1].level == r.level)
            throw_input(std::string("two default reports at level \"") + level_name(r.level) + "\"");
        chain.sequence.push_back({r.level, r.most_code});
    }

    int run = 1, start = 0;
    chain.longest_hierarchical_run = 1;
    chain.run_start = 0;
    for (std::size_t i = 1; i < chain.sequence.size(); ++i) {
        if (h.is_descendant_of(chain.sequence[i].region_code, chain.sequence[i - 1].region_code)) {
            ++run;
        } else {
            run = 1;
            start = static_cast<int>(i);
        }
        if (run > chain.longest_hierarchical_run) {
            chain.longest_hierarchical_run = run;
            chain.run_start = start;
        }
    }
    return chain;
}

inline Histogram histogram_from_values(const std::vector<double>& values, double origin, double bin_width) {
    if (values.empty()) throw_input("histogram needs at least one observation");
    if (!(bin_width > 0.0)) throw_input("histogram bin width must be positive");
    Histogram hist;
    hist.bin_width = bin_width;
    hist.origin = origin;
    hist.n_observations = static_cast<long long>(values.size());
    for (const double v : values)
        ++hist.counts[static_cast<long long>(std::floor((v - origin) / bin_width))];
    return hist;
}

/// Distribution of regional-default degrees. MSE bins start at 0, SSIM bins
/// at -1 (the measure's lower bound).
inline Histogram degree_histogram(const std::vector<CrossLevelRecord>& records, Measure measure, double bin_width) {
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back(measure == Measure::mse ? r.mse_value : r.ssim_value);
    return histogram_from_values(values, measure == Measure::ssim ? -1.0 : 0.0, bin_width);
}

namespace detail {

/// Quantile by linear interpolation at position p*(n-1) on a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    if (lo == hi) return sorted[lo];
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

} // namespace detail

/// Tukey upper fence Q3 + 1.5*IQR as the cut-off separating the right tail
/// of the SSIM degree distribution. Returns nothing for MSE (its informative
/// tail is the left one, which this rule cannot separate) and nothing when
/// no observation lies beyond the fence.
inline std::optional<double> tail_threshold(const std::vector<double>& values, Measure measure) {
    if (measure == Measure::mse) return std::nullopt;
    if (values.size() < 4)
        throw_input("tail threshold needs at least 4 observations, got " + std::to_string(values.size()));
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const double q1 = detail::quantile_sorted(sorted, 0.25);
    const double q3 = detail::quantile_sorted(sorted, 0.75);
    const double fence = q3 + 1.5 * (q3 - q1);
    if (sorted.back() > fence) return fence;
    return std::nullopt;
}

/// A level's default stands iff its best SSIM value clears the threshold.
inline std::map<Level, bool> apply_threshold(const std::vector<DefaultReport>& reports, double threshold) {
    std::map<Level, bool> flags;
    for (const auto& r : reports) {
        if (r.measure != Measure::ssim) throw_input("threshold filtering applies to SSIM reports only");
        flags[r.level] = r.most_value > threshold;
    }
    return flags;
}

/// Row with the largest forest extent at the level; ties go to the smaller code.
inline ForestExtentRow most_forested(const std::vector<ForestExtentRow>& extents, Level level) {
    const ForestExtentRow* best = nullptr;
    for (const auto& row : extents) {
        if (row.level != level) continue;
        if (!best || row.extent > best->extent || (row.extent == best->extent && row.region_code < best->region_code))
            best = &row;
    }
    if (!best)
        throw_input(std::string("no forest extent rows at level \"") + level_name(level) + "\"");
    return *best;
}

/// Marks each default as matched iff it names the most forested region of
/// its level. Every report level must be covered by the extent table.
inline std::vector<ExtentMatch> match_defaults_to_extent(const std::vector<DefaultReport>& reports,
                                                         const std::vector<ForestExtentRow>& extents) {
    std::set<Level> extent_levels;
    for (const auto& row : extents) extent_levels.insert(row.level);

    std::vector<ExtentMatch> matches;
    for (const auto& r : reports) {
        if (!extent_levels.count(r.level))
            throw_input(std::string("no forest extent data for level \"") + level_name(r.level) + "\"");
        const ForestExtentRow top = most_forested(extents, r.level);
        matches.push_back({r.level, r.measure, r.most_code, top.region_code, r.most_code == top.region_code});
    }
    std::sort(matches.begin(), matches.end(), [](const ExtentMatch& a, const ExtentMatch& b) {
        if (a.level != b.level) return a.level < b.level;
        return static_cast<int>(a.measure) < static_cast<int>(b.measure); // MSE before SSIM
    });
    return matches;
}

} // namespace geodefault
