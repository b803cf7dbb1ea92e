// Command-line front end: ingest / generate / analyze subcommands over the
// pipeline library. Flags mirror RunConfig in kebab-case; an INI-style
// config file can pre-set any of them. Logs go to stderr, data to files.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "geodefault/pipeline.hpp"

namespace {

using geodefault::RunConfig;

std::vector<std::string> read_exclusions_file(const std::string& path) {
    std::vector<std::string> codes;
    const std::string text = geodefault::read_file_text(path);
    std::string line;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
                line.pop_back();
            std::size_t start = 0;
            while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
            const std::string trimmed = line.substr(start);
            if (!trimmed.empty() && trimmed[0] != '#') codes.push_back(trimmed);
            line.clear();
        } else {
            line += text[i];
        }
    }
    return codes;
}

struct CliState {
    RunConfig config;
    std::string hierarchy_csv;
    std::string store_dir;
    std::string output_dir;
    std::string exclusions_file;
    std::vector<std::string> exclude_codes;
    std::uint64_t seed = 0;
    double threshold = 0.0;
    std::string records_fixture;
    std::string extent_csv;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threshold_opt = nullptr;
};

void add_common_options(CLI::App& cmd, CliState& s) {
    cmd.add_option("--output-dir", s.output_dir, "Directory for artifacts (hierarchy, manifest, reports)")
        ->required();
}

void finalize(CliState& s) {
    s.config.output_dir = s.output_dir;
    s.config.store_dir = s.store_dir;
    s.config.hierarchy_csv = s.hierarchy_csv;
    s.config.records_fixture = s.records_fixture;
    s.config.extent_csv = s.extent_csv;
    if (s.seed_opt && s.seed_opt->count() > 0) s.config.seed = s.seed;
    if (s.threshold_opt && s.threshold_opt->count() > 0) s.config.threshold_override = s.threshold;
    if (!s.exclusions_file.empty()) {
        const auto codes = read_exclusions_file(s.exclusions_file);
        s.config.exclusions.insert(s.config.exclusions.end(), codes.begin(), codes.end());
    }
    s.config.exclusions.insert(s.config.exclusions.end(), s.exclude_codes.begin(), s.exclude_codes.end());
    s.config.log = [](const std::string& msg) { std::cerr << msg << "\n"; };
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audits regional defaults in text-to-image models: one forest image per region of the "
                 "ISO-3166/UN-M49 hierarchy, cross-level MSE/SSIM similarity, per-level default detection, "
                 "and forest-extent ground-truth comparison."};
    app.set_config("--config", "", "INI config file (flags override file values)");
    app.require_subcommand(1);

    CliState s;

    CLI::App* ingest = app.add_subcommand("ingest", "Parse the region CSV into the hierarchy artifact");
    add_common_options(*ingest, s);
    ingest->add_option("--hierarchy-csv", s.hierarchy_csv, "ISO-3166/UN-M49 region table")->required();
    ingest->add_option("--exclusions", s.exclusions_file, "File with one region code per line to exclude");
    ingest->add_option("--exclude", s.exclude_codes, "Region code to exclude (repeatable)");

    CLI::App* generate = app.add_subcommand("generate", "Generate one image per region into the store");
    add_common_options(*generate, s);
    generate->add_option("--store-dir", s.store_dir, "Content-addressed image store directory")->required();
    generate->add_option("--provider", s.config.provider, "Image provider: synthetic | live")
        ->check(CLI::IsMember({"synthetic", "live"}));
    s.seed_opt = generate->add_option("--seed", s.seed, "Seed for the synthetic provider");
    generate->add_option("--image-size", s.config.image_size, "Square image size in pixels (default 1024)");
    generate->add_option("--spacing-ms", s.config.spacing_ms, "Minimum gap between live provider calls");
    generate->add_option("--retry-attempts", s.config.retry_attempts, "Attempts per region for transient failures");
    generate->add_option("--api-key-env", s.config.api_key_env, "Environment variable holding the API key");
    generate->add_option("--base-url", s.config.base_url, "Live provider base URL");
    generate->add_option("--model", s.config.model, "Live provider model name");
    generate->add_option("--synthetic-reject", s.config.synthetic_reject,
                         "Region code the synthetic provider refuses (repeatable, for testing)");

    CLI::App* analyze = app.add_subcommand("analyze", "Compute similarities, defaults, and reports");
    add_common_options(*analyze, s);
    analyze->add_option("--store-dir", s.store_dir, "Content-addressed image store directory");
    analyze->add_option("--ancestor", s.config.ancestor, "Ancestor region code (default 001 = World)");
    analyze->add_option("--ssim-window", s.config.ssim.window_size, "SSIM window size (odd, default 7)");
    analyze->add_option("--ssim-k1", s.config.ssim.k1, "SSIM k1 (default 0.01)");
    analyze->add_option("--ssim-k2", s.config.ssim.k2, "SSIM k2 (default 0.03)");
    analyze->add_option("--data-range", s.config.ssim.data_range, "SSIM dynamic range L (default 255)");
    analyze->add_option("--mse-bin-width", s.config.mse_bin_width, "MSE histogram bin width (default 500)");
    analyze->add_option("--ssim-bin-width", s.config.ssim_bin_width, "SSIM histogram bin width (default 0.01)");
    s.threshold_opt = analyze->add_option("--threshold", s.threshold,
                                          "Override the SSIM tail threshold instead of deriving it");
    analyze->add_flag("--allow-partial", s.config.allow_partial,
                      "Proceed despite regions without a generated image");
    analyze->add_flag("--pool-all-ancestors", s.config.pool_all_ancestors,
                      "Histogram over every ancestor's records, not only the configured ancestor's");
    analyze->add_option("--threads", s.config.threads, "Worker threads for pairwise similarity");
    analyze->add_option("--records", s.records_fixture, "Analyze a records CSV directly, skipping images");
    analyze->add_option("--extent-csv", s.extent_csv, "Forest-extent ground truth CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3; // bad flags/config
    }

    try {
        finalize(s);
        if (ingest->parsed()) {
            const auto summary = geodefault::run_ingest(s.config);
            std::cout << geodefault::IngestSummary::format(summary.counts_after) << "\n";
        } else if (generate->parsed()) {
            const auto stats = geodefault::run_generate(s.config);
            std::cout << stats.generated << "/" << stats.rejected << "/" << stats.failed << "\n";
        } else if (analyze->parsed()) {
            const auto out = geodefault::run_analyze(s.config);
            std::cout << "records: " << out.records.size() << "\n";
            std::cout << "threshold: "
                      << (out.threshold ? geodefault::format_double(*out.threshold) : std::string("none")) << "\n";
        }
    } catch (const geodefault::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
