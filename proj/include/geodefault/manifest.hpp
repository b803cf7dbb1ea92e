#pragma once

// Persistent record of what the provider produced for each region. One
// outcome per region; Generated and Rejected are terminal (reruns skip them),
// Failed is retried on the next run. Serialization is canonical: sorted keys,
// stable field order, trailing newline.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "geodefault/error.hpp"
#include "geodefault/util.hpp"

namespace geodefault {

enum class OutcomeStatus { generated, rejected, failed };

inline const char* status_name(OutcomeStatus s) {
    switch (s) {
    case OutcomeStatus::generated: return "generated";
    case OutcomeStatus::rejected: return "rejected";
    case OutcomeStatus::failed: return "failed";
    }
    return "?";
}

inline OutcomeStatus status_from_name(const std::string& name) {
    if (name == "generated") return OutcomeStatus::generated;
    if (name == "rejected") return OutcomeStatus::rejected;
    if (name == "failed") return OutcomeStatus::failed;
    throw_input("unknown outcome status: " + name);
}

struct GenerationOutcome {
    std::string region_code;
    OutcomeStatus status = OutcomeStatus::failed;
    std::string image_ref; // content hash, present iff generated
    std::string provider_id;
    std::string prompt;
    std::string timestamp;
    std::string failure_detail; // present iff not generated

    bool terminal() const { return status != OutcomeStatus::failed; }
};

struct Manifest {
    std::string provider_id;
    std::optional<std::uint64_t> seed; // synthetic provider only
    std::map<std::string, GenerationOutcome> outcomes;

    std::map<OutcomeStatus, int> tally() const {
        std::map<OutcomeStatus, int> t{{OutcomeStatus::generated, 0},
                                       {OutcomeStatus::rejected, 0},
                                       {OutcomeStatus::failed, 0}};
        for (const auto& [code, o] : outcomes) ++t[o.status];
        return t;
    }

    nlohmann::json to_json() const {
        nlohmann::json out_map = nlohmann::json::object();
        for (const auto& [code, o] : outcomes) {
            nlohmann::json entry = {{"status", status_name(o.status)},
                                    {"provider_id", o.provider_id},
                                    {"prompt", o.prompt},
                                    {"timestamp", o.timestamp}};
            if (o.status == OutcomeStatus::generated)
                entry["image_ref"] = o.image_ref;
            else
                entry["failure_detail"] = o.failure_detail;
            out_map[code] = std::move(entry);
        }
        nlohmann::json j = {{"provider_id", provider_id}, {"outcomes", std::move(out_map)}};
        if (seed) j["seed"] = *seed;
        return j;
    }

    static Manifest from_json(const nlohmann::json& j) {
        Manifest m;
        try {
            m.provider_id = j.at("provider_id").get<std::string>();
            if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
            for (const auto& [code, entry] : j.at("outcomes").items()) {
                GenerationOutcome o;
                o.region_code = code;
                o.status = status_from_name(entry.at("status").get<std::string>());
                o.provider_id = entry.at("provider_id").get<std::string>();
                o.prompt = entry.at("prompt").get<std::string>();
                o.timestamp = entry.at("timestamp").get<std::string>();
                o.image_ref = entry.value("image_ref", std::string());
                o.failure_detail = entry.value("failure_detail", std::string());
                if ((o.status == OutcomeStatus::generated) != !o.image_ref.empty())
                    throw_input("manifest outcome " + code + ": image_ref must be present exactly when generated");
                m.outcomes[code] = std::move(o);
            }
        } catch (const nlohmann::json::exception& e) {
            throw_input(std::string("malformed manifest JSON: ") + e.what());
        }
        return m;
    }

    std::string to_canonical_json() const { return to_json().dump(2) + "\n"; }

    void save(const std::filesystem::path& path) const { atomic_write_file(path, to_canonical_json()); }

    static Manifest load(const std::filesystem::path& path) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file_text(path));
        } catch (const nlohmann::json::exception& e) {
            throw_input("cannot parse manifest " + path.string() + ": " + e.what());
        }
        return from_json(j);
    }
};

} // namespace geodefault
