#pragma once

// End-to-end orchestration shared by the CLI and the acceptance suite:
// ingest (CSV -> hierarchy artifact), generate (provider -> store+manifest),
// analyze (records, defaults, chains, histograms, threshold, ground truth).
// For the synthetic provider every artifact is a pure function of
// (inputs, config, seed); timestamps are pinned to a fixed instant.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geodefault/analysis.hpp"
#include "geodefault/error.hpp"
#include "geodefault/generation.hpp"
#include "geodefault/manifest.hpp"
#include "geodefault/openai_provider.hpp"
#include "geodefault/provider.hpp"
#include "geodefault/region_hierarchy.hpp"
#include "geodefault/report.hpp"
#include "geodefault/store.hpp"
#include "geodefault/synthetic_provider.hpp"
#include "geodefault/util.hpp"

namespace geodefault {

constexpr const char* kSyntheticTimestamp = "1970-01-01T00:00:00Z";

struct RunConfig {
    // ingest
    std::filesystem::path hierarchy_csv;
    std::vector<std::string> exclusions;

    // generate
    std::string provider = "synthetic"; // "synthetic" | "live"
    std::optional<std::uint64_t> seed;
    int image_size = 1024;
    std::filesystem::path store_dir;
    std::vector<std::string> synthetic_reject; // region codes the synthetic provider refuses (tests)
    int spacing_ms = 1000;                     // live provider only
    int retry_attempts = 5;
    std::string api_key_env = "T2I_API_KEY";
    std::string base_url = "https://api.openai.com";
    std::string model = "dall-e-3";

    // analyze
    std::string ancestor = kWorldCode;
    SsimParams ssim;
    GrayWeights gray;
    double mse_bin_width = 500.0;
    double ssim_bin_width = 0.01;
    std::optional<double> threshold_override;
    bool allow_partial = false;
    bool pool_all_ancestors = false;
    int threads = 1;
    std::filesystem::path records_fixture; // analyze straight from a records CSV, no images
    std::filesystem::path extent_csv;      // forest-extent ground truth (optional)

    // shared
    std::filesystem::path output_dir;
    std::function<void(const std::string&)> log; // optional, stderr in the CLI

    std::filesystem::path hierarchy_artifact() const { return output_dir / "hierarchy.json"; }
    std::filesystem::path manifest_path() const { return output_dir / "manifest.json"; }

    /// Settings every stage depends on; ingest and analyze stop here.
    void validate_common() const {
        if (output_dir.empty()) throw_config("output dir is required");
        if (image_size <= 0) throw_config("image size must be positive");
        if (threads < 1) throw_config("threads must be >= 1");
        if (mse_bin_width <= 0.0 || ssim_bin_width <= 0.0) throw_config("bin widths must be positive");
        ssim.validate();
    }

    /// Full validation including the generation-stage provider settings.
    void validate() const {
        validate_common();
        if (provider != "synthetic" && provider != "live")
            throw_config("provider must be \"synthetic\" or \"live\", got \"" + provider + "\"");
        if (provider == "synthetic" && !seed) throw_config("the synthetic provider requires a seed");
        if (provider == "live" && seed) throw_config("a seed is only meaningful for the synthetic provider");
        if (!store_dir.empty()) {
            const auto norm = [](const std::filesystem::path& p) {
                return std::filesystem::absolute(p).lexically_normal();
            };
            if (norm(store_dir) == norm(output_dir))
                throw_config("output dir must be distinct from store dir");
        }
    }
};

// ----------------------------------------------------------------- ingest

struct IngestSummary {
    std::array<int, kLevelCount> counts_all{};
    std::array<int, kLevelCount> counts_after{};
    int total_after = 0;

    static std::string format(const std::array<int, kLevelCount>& c) {
        std::string out;
        int total = 0;
        for (int i = 0; i < kLevelCount; ++i) {
            if (i) out += "/";
            out += std::to_string(c[static_cast<std::size_t>(i)]);
            total += c[static_cast<std::size_t>(i)];
        }
        return out + " (" + std::to_string(total) + " total)";
    }
};

inline RegionHierarchy load_hierarchy_artifact(const RunConfig& config) {
    const auto path = config.hierarchy_artifact();
    if (!std::filesystem::exists(path))
        throw_input("hierarchy artifact " + path.string() + " not found; run ingest first");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw_input("cannot parse hierarchy artifact: " + std::string(e.what()));
    }
    return hierarchy_from_json(j);
}

inline IngestSummary run_ingest(const RunConfig& config) {
    config.validate_common();
    if (config.hierarchy_csv.empty()) throw_config("ingest requires a hierarchy CSV path");

    RegionHierarchy h = parse_region_table(parse_csv(read_file_text(config.hierarchy_csv)));
    h.exclusions = std::set<std::string>(config.exclusions.begin(), config.exclusions.end());
    validate_hierarchy(h);

    std::filesystem::create_directories(config.output_dir);
    atomic_write_file(config.hierarchy_artifact(), hierarchy_to_canonical_json(h));

    IngestSummary summary;
    summary.counts_all = h.level_counts(false);
    summary.counts_after = h.level_counts(true);
    for (const int c : summary.counts_after) summary.total_after += c;
    if (config.log) {
        config.log("level counts (all): " + IngestSummary::format(summary.counts_all));
        config.log("level counts (after exclusions): " + IngestSummary::format(summary.counts_after));
    }
    return summary;
}

// --------------------------------------------------------------- generate

/// Builds the provider named by the config. The injectable overload below
/// lets tests substitute scripted providers.
inline std::unique_ptr<ImageProvider> make_provider(const RunConfig& config, const RegionHierarchy& h) {
    if (config.provider == "synthetic") {
        auto provider = std::make_unique<SyntheticProvider>(*config.seed);
        for (const auto& code : config.synthetic_reject) provider->reject_prompt(prompt_for(h.at(code)));
        return provider;
    }
    LiveProviderConfig live;
    live.base_url = config.base_url;
    live.model = config.model;
    live.api_key_env = config.api_key_env;
    return std::make_unique<OpenAiImageProvider>(live);
}

inline GenerationStats run_generate(const RunConfig& config, ImageProvider& provider) {
    config.validate();
    if (config.store_dir.empty()) throw_config("generate requires a store dir");
    const RegionHierarchy h = load_hierarchy_artifact(config);

    ImageStore store(config.store_dir);
    std::filesystem::create_directories(config.output_dir);
    Manifest manifest;
    if (std::filesystem::exists(config.manifest_path())) {
        manifest = Manifest::load(config.manifest_path());
    } else {
        manifest.provider_id = provider.id();
        if (config.provider == "synthetic") manifest.seed = config.seed;
    }

    GenerationSettings settings;
    settings.image_size = config.image_size;
    settings.retry.max_attempts = config.retry_attempts;
    settings.log = config.log;
    if (config.provider == "synthetic") {
        settings.clock = [] { return std::string(kSyntheticTimestamp); };
    } else {
        settings.spacing = std::chrono::milliseconds(config.spacing_ms);
    }

    const GenerationStats stats = run_generation(h, provider, store, manifest, config.manifest_path(), settings);
    if (config.log) {
        config.log("generated/rejected/failed: " + std::to_string(stats.generated) + "/" +
                   std::to_string(stats.rejected) + "/" + std::to_string(stats.failed));
        config.log(stats.provider_calls == 0
                       ? "0 provider calls (cache)"
                       : "provider calls: " + std::to_string(stats.provider_calls) +
                             " (cache hits: " + std::to_string(stats.cached) + ")");
    }
    return stats;
}

inline GenerationStats run_generate(const RunConfig& config) {
    config.validate();
    const std::unique_ptr<ImageProvider> provider = make_provider(config, load_hierarchy_artifact(config));
    return run_generate(config, *provider);
}

// ---------------------------------------------------------------- analyze

struct AnalysisOutput {
    std::vector<CrossLevelRecord> records;   // everything that went into records.csv
    std::vector<CrossLevelRecord> observed;  // the histogram/threshold observation set
    std::vector<DefaultReport> defaults;     // level ascending, MSE before SSIM
    std::vector<ConsistencyChain> chains;    // MSE then SSIM, when any level exists
    Histogram hist_mse, hist_ssim;
    std::optional<double> threshold;
    bool threshold_overridden = false;
    std::map<Level, bool> default_exists;
    std::vector<ExtentMatch> matches;
};

inline AnalysisOutput run_analyze(const RunConfig& config) {
    config.validate_common();
    const RegionHierarchy h = load_hierarchy_artifact(config);
    if (!h.contains(config.ancestor)) throw_input("unknown ancestor code: " + config.ancestor);

    AnalysisOutput out;

    if (!config.records_fixture.empty()) {
        out.records = records_from_csv(parse_csv(read_file_text(config.records_fixture)));
    } else {
        if (config.store_dir.empty()) throw_config("analyze requires a store dir (or a records fixture)");
        if (!std::filesystem::exists(config.manifest_path()))
            throw_input("manifest " + config.manifest_path().string() + " not found; run generate first");
        const Manifest manifest = Manifest::load(config.manifest_path());
        const ImageStore store(config.store_dir);
        CrossLevelOptions opt;
        opt.ssim = config.ssim;
        opt.gray = config.gray;
        opt.threads = config.threads;
        opt.allow_partial = config.allow_partial;

        if (config.pool_all_ancestors) {
            const std::set<std::string> excluded = effective_exclusions(h, manifest);
            for (const auto& [code, node] : h.nodes) {
                if (node.level == Level::country || excluded.count(code)) continue;
                const auto part = cross_level_similarities(h, manifest, store, code, opt);
                out.records.insert(out.records.end(), part.begin(), part.end());
            }
        } else {
            out.records = cross_level_similarities(h, manifest, store, config.ancestor, opt);
        }
    }

    std::vector<CrossLevelRecord> anchor; // records under the configured ancestor
    for (const auto& r : out.records)
        if (r.ancestor_code == config.ancestor) anchor.push_back(r);
    out.observed = config.pool_all_ancestors ? out.records : anchor;

    // Defaults per level, levels top-down, MSE before SSIM.
    const int anc_ord = level_ordinal(h.at(config.ancestor).level);
    for (int ord = anc_ord + 1; ord < kLevelCount; ++ord) {
        const Level level = level_from_ordinal(ord);
        bool any = false;
        for (const auto& r : anchor)
            if (r.descendant_level == level) {
                any = true;
                break;
            }
        if (!any) continue; // levels with no members are simply absent
        out.defaults.push_back(regional_defaults(anchor, level, Measure::mse));
        out.defaults.push_back(regional_defaults(anchor, level, Measure::ssim));
    }

    std::vector<DefaultReport> mse_defaults, ssim_defaults;
    for (const auto& r : out.defaults)
        (r.measure == Measure::mse ? mse_defaults : ssim_defaults).push_back(r);
    if (!mse_defaults.empty()) out.chains.push_back(consistency_chain(mse_defaults, h));
    if (!ssim_defaults.empty()) out.chains.push_back(consistency_chain(ssim_defaults, h));

    if (!out.observed.empty()) {
        out.hist_mse = degree_histogram(out.observed, Measure::mse, config.mse_bin_width);
        out.hist_ssim = degree_histogram(out.observed, Measure::ssim, config.ssim_bin_width);
    }

    if (config.threshold_override) {
        out.threshold = config.threshold_override;
        out.threshold_overridden = true;
    } else if (out.observed.size() >= 4) {
        std::vector<double> ssim_values;
        for (const auto& r : out.observed) ssim_values.push_back(r.ssim_value);
        out.threshold = tail_threshold(ssim_values, Measure::ssim);
    }
    if (out.threshold && !ssim_defaults.empty())
        out.default_exists = apply_threshold(ssim_defaults, *out.threshold);

    if (!config.extent_csv.empty()) {
        const auto extents = extents_from_csv(parse_csv(read_file_text(config.extent_csv)), &h);
        out.matches = match_defaults_to_extent(out.defaults, extents);
    }

    // Artifacts.
    std::filesystem::create_directories(config.output_dir);
    atomic_write_file(config.output_dir / "records.csv", records_to_csv(out.records));
    atomic_write_file(config.output_dir / "defaults.csv", defaults_to_csv(out.defaults));
    atomic_write_file(config.output_dir / "histogram_mse.csv", histogram_to_csv(out.hist_mse));
    atomic_write_file(config.output_dir / "histogram_ssim.csv", histogram_to_csv(out.hist_ssim));
    if (!config.extent_csv.empty())
        atomic_write_file(config.output_dir / "matches.csv", matches_to_csv(out.matches));

    MarkdownInputs md{h,
                      config.ancestor,
                      out.defaults,
                      out.chains,
                      out.threshold,
                      out.threshold_overridden,
                      out.default_exists,
                      out.matches,
                      static_cast<long long>(out.records.size())};
    atomic_write_file(config.output_dir / "report.md", render_markdown_report(md));

    if (config.log) {
        config.log("records: " + std::to_string(out.records.size()));
        config.log("threshold: " + (out.threshold ? format_double(*out.threshold) : std::string("none")));
        for (const auto& chain : out.chains)
            config.log(std::string(measure_name(chain.measure)) +
                       " longest hierarchical run: " + std::to_string(chain.longest_hierarchical_run));
    }
    return out;
}

} // namespace geodefault
