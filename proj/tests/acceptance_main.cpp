// Acceptance gate for the regional-default audit pipeline. Each primary
// requirement is exercised end to end and reported as one [PASS]/[FAIL]
// line; the process exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "geodefault/pipeline.hpp"
#include "helpers.hpp"

using namespace geodefault;
namespace fs = std::filesystem;

namespace {

int failures = 0;
bool current_ok = true;
std::string first_detail;

void expect(bool ok, const std::string& detail) {
    if (!ok && current_ok) {
        current_ok = false;
        first_detail = detail;
    }
}

void expect_near(double actual, double want, double tol, const std::string& what) {
    expect(std::fabs(actual - want) <= tol,
           what + ": got " + format_double(actual) + ", want " + format_double(want) + " within " +
               format_double(tol));
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void criterion(const std::string& name, const std::function<void()>& body) {
    current_ok = true;
    first_detail.clear();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        expect(false, std::string("unexpected exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (current_ok) {
        std::printf("[PASS] %s (%.1fs)\n", name.c_str(), secs);
    } else {
        std::printf("[FAIL] %s: %s\n", name.c_str(), first_detail.c_str());
        ++failures;
    }
    std::fflush(stdout);
}

// ------------------------------------------------------ reference SSIM

/// Independent two-pass reference: per-window moments in double precision,
/// explicit three-factor luminance/contrast/structure product.
double reference_window(const GrayImage& a, const GrayImage& b, int x0, int y0, const SsimParams& p) {
    const int win = p.window_size;
    const double n = static_cast<double>(win) * win;
    double sx = 0.0, sy = 0.0;
    for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x) {
            sx += a.at(x, y);
            sy += b.at(x, y);
        }
    const double mx = sx / n, my = sy / n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x) {
            const double dx = a.at(x, y) - mx;
            const double dy = b.at(x, y) - my;
            vx += dx * dx;
            vy += dy * dy;
            cov += dx * dy;
        }
    const double norm = p.sample_covariance ? n - 1.0 : n;
    vx /= norm;
    vy /= norm;
    cov /= norm;
    const double sdx = std::sqrt(vx), sdy = std::sqrt(vy);
    const double l = (2.0 * mx * my + p.c1()) / (mx * mx + my * my + p.c1());
    const double c = (2.0 * sdx * sdy + p.c2()) / (vx + vy + p.c2());
    const double s = (cov + p.c3()) / (sdx * sdy + p.c3());
    return std::pow(l, p.alpha) * std::pow(c, p.beta) * std::pow(s, p.gamma);
}

double reference_ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p) {
    const int win = p.window_size;
    double sum = 0.0;
    long long count = 0;
    for (int y = 0; y + win <= a.height; ++y)
        for (int x = 0; x + win <= a.width; ++x) {
            sum += reference_window(a, b, x, y, p);
            ++count;
        }
    return sum / static_cast<double>(count);
}

// ----------------------------------------------------- shared fixtures

/// Ingests the bundled region snapshot and replays the reference records
/// and forest-extent tables through the analysis stage.
AnalysisOutput replay_fixture(const testutil::TempDir& tmp) {
    RunConfig c;
    c.hierarchy_csv = testutil::data_dir() / "iso3166_m49.csv";
    c.exclusions = {"ERI", "SSD", "SDN", "VGB", "VIR"};
    c.output_dir = tmp.path() / "out";
    run_ingest(c);
    c.records_fixture = testutil::data_dir() / "fixtures" / "world_records.csv";
    c.extent_csv = testutil::data_dir() / "forest_extent_fra2020.csv";
    return run_analyze(c);
}

/// 30 regions: World, 2 UN regions, 3 sub-regions, 2 intermediates, and 22
/// countries split 4/4/6/8 across the leaf branches.
std::string thirty_region_csv() {
    std::string csv =
        "name,alpha-3,region,sub-region,intermediate-region,region-code,sub-region-code,intermediate-region-code\n";
    const auto row = [&csv](const char* code, const char* region, const char* sub, const char* inter,
                            const char* rc, const char* sc, const char* ic) {
        csv += std::string("Land of ") + code + "," + code + "," + region + "," + sub + "," + inter + "," + rc +
               "," + sc + "," + ic + "\n";
    };
    for (const char* code : {"AAA", "AAB", "AAC", "AAD"})
        row(code, "Northland", "Upper North", "Inner Upper", "900", "910", "911");
    for (const char* code : {"ABA", "ABB", "ABC", "ABD"})
        row(code, "Northland", "Upper North", "Outer Upper", "900", "910", "912");
    for (const char* code : {"ACA", "ACB", "ACC", "ACD", "ACE", "ACF"})
        row(code, "Northland", "Lower North", "", "900", "920", "");
    for (const char* code : {"ADA", "ADB", "ADC", "ADD", "ADE", "ADF", "ADG", "ADH"})
        row(code, "Southland", "South Coast", "", "800", "810", "");
    return csv;
}

GrayImage random_image(std::mt19937_64& rng, int w, int h) {
    GrayImage img(w, h);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& px : img.data) px = static_cast<std::uint8_t>(dist(rng));
    return img;
}

// ------------------------------------------------------------ criteria

void criterion_ssim_oracle() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20260823);
    const SsimParams p;
    const std::pair<int, int> sizes[] = {{7, 7}, {8, 11}, {32, 32}, {64, 64}};
    for (const auto& [w, h] : sizes)
        for (int i = 0; i < 50; ++i) {
            const GrayImage a = random_image(rng, w, h);
            const GrayImage b = random_image(rng, w, h);
            const double fast = ssim(a, b, p);
            const double slow = reference_ssim(a, b, p);
            expect(std::fabs(fast - slow) <= 1e-9, "size " + std::to_string(w) + "x" + std::to_string(h) +
                                                       " pair " + std::to_string(i) + ": |" +
                                                       format_double(fast) + " - " + format_double(slow) +
                                                       "| > 1e-9");
        }
    expect(seconds_since(start) < 30.0, "took longer than the 30s budget");
}

void criterion_calibration() {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 10; ++i) {
        const GrayImage a = random_image(rng, 25, 19);
        expect_near(ssim(a, a), 1.0, 1e-12, "self-SSIM of image " + std::to_string(i));
    }

    GrayImage black(32, 32), white(32, 32);
    std::fill(white.data.begin(), white.data.end(), std::uint8_t{255});
    const double m = mse(black, white);
    expect(m == 65025.0, "MSE of all-0 vs all-255 must be exactly 65025, got " + format_double(m));

    const SsimParams p;
    const double expected = p.c1() / (65025.0 + p.c1());
    const double got = ssim(black, white, p);
    expect_near(got, expected, 1e-12, "SSIM of all-0 vs all-255 (c1/(65025+c1))");
    expect_near(got, 9.9989e-5, 1e-8, "SSIM of the constant extremes");
}

void criterion_hierarchy_counts() {
    testutil::TempDir tmp("acc-hier");
    RunConfig c;
    c.hierarchy_csv = testutil::data_dir() / "iso3166_m49.csv";
    c.output_dir = tmp.path() / "out";
    const IngestSummary plain = run_ingest(c);
    expect(IngestSummary::format(plain.counts_all) == "1/5/17/8/249 (280 total)",
           "pre-exclusion counts: got " + IngestSummary::format(plain.counts_all));

    c.exclusions = {"ERI", "SSD", "SDN", "VGB", "VIR"};
    c.output_dir = tmp.path() / "out2";
    const IngestSummary world = run_ingest(c);
    expect(IngestSummary::format(world.counts_after) == "1/5/17/8/244 (275 total)",
           "post-exclusion counts: got " + IngestSummary::format(world.counts_after));
    expect(world.total_after == 275, "post-exclusion total: got " + std::to_string(world.total_after));
}

void criterion_defaults_replay() {
    testutil::TempDir tmp("acc-replay");
    const AnalysisOutput out = replay_fixture(tmp);
    expect(out.records.size() == 42, "record count: got " + std::to_string(out.records.size()));
    expect(out.defaults.size() == 8, "defaults count: got " + std::to_string(out.defaults.size()));
    if (out.defaults.size() != 8) return;

    struct Expected {
        int level;
        Measure measure;
        const char* most_code;
        const char* most_value;
        const char* least_code;
        const char* least_value;
        int n;
    };
    const Expected table[] = {
        {1, Measure::mse, "019", "4323", "002", "14897", 5},
        {1, Measure::ssim, "150", "0.18", "009", "0.06", 5},
        {2, Measure::mse, "419", "3361", "015", "14128", 17},
        {2, Measure::ssim, "419", "0.3", "054", "0.07", 17},
        {3, Measure::mse, "005", "4983", "014", "13346", 8},
        {3, Measure::ssim, "018", "0.13", "830", "0.07", 8},
        {4, Measure::mse, "NRU", "2922", "ATA", "18066", 12},
        {4, Measure::ssim, "UGA", "0.26", "SXM", "0.04", 12},
    };
    for (std::size_t i = 0; i < 8; ++i) {
        const Expected& want = table[i];
        const DefaultReport& got = out.defaults[i];
        const std::string tag = "defaults[" + std::to_string(i) + "] (level " + std::to_string(want.level) +
                                ", " + measure_name(want.measure) + ")";
        expect(level_ordinal(got.level) == want.level && got.measure == want.measure, tag + ": wrong slot");
        expect(got.most_code == want.most_code,
               tag + ": most " + got.most_code + ", want " + want.most_code);
        expect(got.most_value == parse_double(want.most_value, "expected"),
               tag + ": most value " + format_double(got.most_value) + ", want " + want.most_value);
        expect(got.least_code == want.least_code,
               tag + ": least " + got.least_code + ", want " + want.least_code);
        expect(got.least_value == parse_double(want.least_value, "expected"),
               tag + ": least value " + format_double(got.least_value) + ", want " + want.least_value);
        expect(got.candidate_count == want.n,
               tag + ": candidates " + std::to_string(got.candidate_count) + ", want " + std::to_string(want.n));
    }

    expect(out.chains.size() == 2, "chain count: got " + std::to_string(out.chains.size()));
    if (out.chains.size() != 2) return;
    const ConsistencyChain& mse_chain = out.chains[0];
    const ConsistencyChain& ssim_chain = out.chains[1];
    const std::vector<std::string> mse_codes = {"019", "419", "005", "NRU"};
    expect(mse_chain.measure == Measure::mse && mse_chain.sequence.size() == 4, "MSE chain shape");
    for (std::size_t i = 0; i < mse_chain.sequence.size() && i < 4; ++i)
        expect(mse_chain.sequence[i].region_code == mse_codes[i],
               "MSE chain entry " + std::to_string(i) + ": " + mse_chain.sequence[i].region_code);
    expect(mse_chain.longest_hierarchical_run == 3 && mse_chain.run_start == 0,
           "MSE chain run: got " + std::to_string(mse_chain.longest_hierarchical_run) + " at " +
               std::to_string(mse_chain.run_start) + ", want 3 at 0");
    expect(ssim_chain.measure == Measure::ssim && ssim_chain.longest_hierarchical_run == 1,
           "SSIM chain run: got " + std::to_string(ssim_chain.longest_hierarchical_run) + ", want 1");
}

void criterion_threshold() {
    const std::vector<double> sample{0.05, 0.06, 0.08, 0.12, 0.30};
    const std::optional<double> fence = tail_threshold(sample, Measure::ssim);
    expect(fence.has_value(), "a threshold must exist for the five-value sample");
    if (fence) expect_near(*fence, 0.21, 1e-12, "Tukey upper fence");
    expect(!tail_threshold(sample, Measure::mse).has_value(), "no threshold may be derived for MSE");
    expect(!tail_threshold({0.1, 0.11, 0.12, 0.13}, Measure::ssim).has_value(),
           "no threshold when nothing lies beyond the fence");

    testutil::TempDir tmp("acc-thresh");
    const AnalysisOutput out = replay_fixture(tmp);
    std::vector<DefaultReport> ssim_defaults;
    for (const auto& r : out.defaults)
        if (r.measure == Measure::ssim) ssim_defaults.push_back(r);
    const std::map<Level, bool> flags = apply_threshold(ssim_defaults, 0.21);
    expect(flags.size() == 4, "filter must cover all four levels");
    int standing = 0;
    for (const auto& [level, stands] : flags)
        if (stands) ++standing;
    expect(standing == 2, "exactly two defaults must stand at 0.21, got " + std::to_string(standing));
    expect(flags.count(Level::un_sub_region) && flags.at(Level::un_sub_region), "sub-region default must stand");
    expect(flags.count(Level::country) && flags.at(Level::country), "country default must stand");

    // Quantiles against an independently coded oracle on 1000 samples.
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> sorted(1000);
    for (auto& v : sorted) v = dist(rng);
    std::sort(sorted.begin(), sorted.end());
    const auto oracle = [&sorted](double p) {
        const double idx = p * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(idx);
        if (lo + 1 >= sorted.size()) return sorted.back();
        const double w = idx - static_cast<double>(lo);
        return (1.0 - w) * sorted[lo] + w * sorted[lo + 1];
    };
    std::vector<double> probes{0.0, 0.25, 0.5, 0.75, 1.0};
    for (int i = 0; i < 25; ++i) probes.push_back(dist(rng));
    for (const double p : probes)
        expect_near(detail::quantile_sorted(sorted, p), oracle(p), 1e-12,
                    "quantile at p=" + format_double(p));
}

void criterion_ground_truth() {
    testutil::TempDir tmp("acc-truth");
    const AnalysisOutput out = replay_fixture(tmp);
    expect(out.matches.size() == 8, "match count: got " + std::to_string(out.matches.size()));

    const std::map<int, std::string> most_forested{{1, "019"}, {2, "151"}, {3, "005"}, {4, "RUS"}};
    std::set<int> mse_matched, ssim_matched;
    for (const auto& m : out.matches) {
        const int level = level_ordinal(m.level);
        expect(m.most_forested_code == most_forested.at(level),
               "most forested at level " + std::to_string(level) + ": got " + m.most_forested_code);
        if (m.matched) (m.measure == Measure::mse ? mse_matched : ssim_matched).insert(level);
    }
    expect(mse_matched == std::set<int>{1, 3},
           "MSE defaults must match the most forested region at levels 1 and 3 only");
    expect(ssim_matched.empty(), "no SSIM default may match the most forested region");
}

void criterion_determinism() {
    const auto start = std::chrono::steady_clock::now();
    testutil::TempDir tmp("acc-determ");
    testutil::write_text(tmp.path() / "regions.csv", thirty_region_csv());

    const auto run_all = [&tmp](const std::string& tag) {
        RunConfig c;
        c.hierarchy_csv = tmp.path() / "regions.csv";
        c.output_dir = tmp.path() / tag / "out";
        c.store_dir = tmp.path() / tag / "store";
        c.seed = 11;
        c.image_size = 128;
        run_ingest(c);
        const GenerationStats stats = run_generate(c);
        expect(stats.generated == 30, tag + ": generated " + std::to_string(stats.generated) + ", want 30");
        const AnalysisOutput out = run_analyze(c);
        expect(out.records.size() == 29, tag + ": records " + std::to_string(out.records.size()) + ", want 29");
        return c;
    };
    const RunConfig a = run_all("a");
    const RunConfig b = run_all("b");
    for (const char* name : {"hierarchy.json", "manifest.json", "records.csv", "defaults.csv",
                             "histogram_mse.csv", "histogram_ssim.csv", "report.md"})
        expect(read_file_text(a.output_dir / name) == read_file_text(b.output_dir / name),
               std::string(name) + " differs between identical runs");

    const GenerationStats rerun = run_generate(a);
    expect(rerun.provider_calls == 0,
           "rerun must make zero provider calls, made " + std::to_string(rerun.provider_calls));
    expect(rerun.cached == 30, "rerun must serve all 30 regions from cache");
    expect(seconds_since(start) < 60.0, "took longer than the 60s budget");
}

void criterion_full_scale() {
    const auto start = std::chrono::steady_clock::now();
    testutil::TempDir tmp("acc-scale");
    RunConfig c;
    c.hierarchy_csv = testutil::data_dir() / "iso3166_m49.csv";
    c.exclusions = {"ERI", "SSD", "SDN", "VGB", "VIR"};
    c.output_dir = tmp.path() / "out";
    c.store_dir = tmp.path() / "store";
    c.seed = 42;
    c.image_size = 1024;
    c.threads = 1;
    run_ingest(c);
    const GenerationStats stats = run_generate(c);
    expect(stats.generated == 275, "generated " + std::to_string(stats.generated) + ", want 275");
    expect(stats.provider_calls == 275,
           "provider calls " + std::to_string(stats.provider_calls) + ", want 275");
    const AnalysisOutput serial = run_analyze(c);
    expect(serial.records.size() == 274, "records " + std::to_string(serial.records.size()) + ", want 274");
    const double elapsed = seconds_since(start);
    expect(elapsed < 300.0, "single-threaded run took " + format_double(elapsed) + "s, budget 300s");

    RunConfig par = c;
    par.output_dir = tmp.path() / "out_par";
    par.threads = 4;
    fs::create_directories(par.output_dir);
    fs::copy_file(c.hierarchy_artifact(), par.hierarchy_artifact());
    fs::copy_file(c.manifest_path(), par.manifest_path());
    run_analyze(par);
    for (const char* name : {"records.csv", "defaults.csv", "report.md"})
        expect(read_file_text(c.output_dir / name) == read_file_text(par.output_dir / name),
               std::string(name) + " differs between 1 and 4 worker threads");
}

} // namespace

int main() {
    criterion("SSIM equals a windowed reference implementation (|diff| <= 1e-9, 200 pairs)", criterion_ssim_oracle);
    criterion("similarity calibration: self-SSIM, constant-image extremes", criterion_calibration);
    criterion("hierarchy ingestion counts (280 regions, 275 after exclusions)", criterion_hierarchy_counts);
    criterion("regional defaults and consistency chains on the reference records", criterion_defaults_replay);
    criterion("SSIM tail threshold: Tukey fence, MSE exclusion, quantile oracle", criterion_threshold);
    criterion("forest-extent ground truth matches at the documented levels only", criterion_ground_truth);
    criterion("deterministic end-to-end rerun on a 30-region hierarchy", criterion_determinism);
    criterion("full-scale synthetic run (275 x 1024^2) within budget, thread-invariant", criterion_full_scale);

    std::printf("%d/8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
