#pragma once

// Orchestrates one image per region: walks the hierarchy in code order,
// skips regions with a terminal cached outcome, calls the provider with
// retry for the rest, and checkpoints the manifest after every outcome so
// an aborted run resumes where it stopped.

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>

#include "geodefault/error.hpp"
#include "geodefault/manifest.hpp"
#include "geodefault/png_codec.hpp"
#include "geodefault/provider.hpp"
#include "geodefault/region_hierarchy.hpp"
#include "geodefault/store.hpp"
#include "geodefault/util.hpp"

namespace geodefault {

struct GenerationSettings {
    int image_size = 1024;
    RetryPolicy retry;
    std::chrono::milliseconds spacing{0}; // minimum gap between provider calls
    std::function<std::string()> clock = iso8601_utc_now;
    std::function<void(const std::string&)> log; // optional progress sink
};

struct GenerationStats {
    int generated = 0; // manifest-wide totals after the run
    int rejected = 0;
    int failed = 0;
    int cached = 0;             // regions skipped via terminal cached outcomes
    long long provider_calls = 0; // individual attempts, retries included
};

/// Runs generation for every non-excluded region lacking a terminal outcome.
/// The manifest is saved to manifest_path after each new outcome; pass an
/// empty path to keep everything in memory (tests).
inline GenerationStats run_generation(const RegionHierarchy& h, ImageProvider& provider, ImageStore& store,
                                      Manifest& manifest, const std::filesystem::path& manifest_path,
                                      const GenerationSettings& settings) {
    if (settings.image_size <= 0) throw_config("image size must be positive");
    settings.retry.validate();
    if (manifest.provider_id.empty()) manifest.provider_id = provider.id();
    if (manifest.provider_id != provider.id())
        throw_config("manifest belongs to provider " + manifest.provider_id + ", not " + provider.id());

    GenerationStats stats;
    const auto checkpoint = [&] {
        if (!manifest_path.empty()) manifest.save(manifest_path);
    };
    const auto log = [&](const std::string& msg) {
        if (settings.log) settings.log(msg);
    };

    bool first_call = true;
    for (const auto& [code, node] : h.nodes) {
        if (h.exclusions.count(code)) continue;

        const auto cached = manifest.outcomes.find(code);
        if (cached != manifest.outcomes.end() && cached->second.terminal()) {
            ++stats.cached;
            continue;
        }

        if (!first_call && settings.spacing.count() > 0) settings.retry.sleep(settings.spacing);
        first_call = false;

        const std::string prompt = prompt_for(node);
        const ProviderResponse response =
            generate_with_retry(provider, prompt, settings.image_size, settings.retry, &stats.provider_calls);

        GenerationOutcome outcome;
        outcome.region_code = code;
        outcome.provider_id = provider.id();
        outcome.prompt = prompt;
        outcome.timestamp = settings.clock();

        switch (response.status) {
        case CallStatus::generated: {
            // The provider contract requires PNG bytes of the requested
            // size; anything else is recorded as a failure, not stored.
            try {
                const auto [w, head_h] = decode_png_header(response.png_bytes);
                if (w != settings.image_size || head_h != settings.image_size) {
                    outcome.status = OutcomeStatus::failed;
                    outcome.failure_detail = "provider returned " + std::to_string(w) + "x" +
                                             std::to_string(head_h) + ", expected " +
                                             std::to_string(settings.image_size) + "x" +
                                             std::to_string(settings.image_size);
                    break;
                }
            } catch (const PngDecodeError& e) {
                outcome.status = OutcomeStatus::failed;
                outcome.failure_detail = std::string("provider returned undecodable bytes: ") + e.what();
                break;
            }
            outcome.status = OutcomeStatus::generated;
            outcome.image_ref = store.put(response.png_bytes);
            break;
        }
        case CallStatus::rejected:
            outcome.status = OutcomeStatus::rejected;
            outcome.failure_detail = response.detail;
            break;
        case CallStatus::transient_failure:
            outcome.status = OutcomeStatus::failed;
            outcome.failure_detail = "transient failures exhausted retries: " + response.detail;
            break;
        }

        log(code + " (" + node.name + "): " + status_name(outcome.status) +
            (outcome.failure_detail.empty() ? "" : " — " + outcome.failure_detail));
        manifest.outcomes[code] = std::move(outcome);
        checkpoint();
    }

    checkpoint();
    const auto totals = manifest.tally();
    stats.generated = totals.at(OutcomeStatus::generated);
    stats.rejected = totals.at(OutcomeStatus::rejected);
    stats.failed = totals.at(OutcomeStatus::failed);
    return stats;
}

/// Regions barred from analysis: the configured exclusions plus everything
/// the provider rejected.
inline std::set<std::string> effective_exclusions(const RegionHierarchy& h, const Manifest& manifest) {
    std::set<std::string> out = h.exclusions;
    for (const auto& [code, o] : manifest.outcomes)
        if (o.status == OutcomeStatus::rejected) out.insert(code);
    return out;
}

} // namespace geodefault
