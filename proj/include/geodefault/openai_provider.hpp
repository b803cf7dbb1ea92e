#pragma once

// Live text-to-image client for an OpenAI-style images endpoint. Each call
// is one independent POST (no session state). 400 responses are treated as
// safety rejections; 408/429/5xx and transport errors are transient. The API
// key is read from the environment and never written anywhere.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <string>

#include "geodefault/base64.hpp"
#include "geodefault/error.hpp"
#include "geodefault/provider.hpp"

namespace geodefault {

struct LiveProviderConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/images/generations";
    std::string model = "dall-e-3";
    std::string api_key;                   // filled from the environment when empty
    std::string api_key_env = "T2I_API_KEY";
    int timeout_seconds = 180;
};

class OpenAiImageProvider : public ImageProvider {
public:
    explicit OpenAiImageProvider(LiveProviderConfig config) : config_(std::move(config)) {
        if (config_.api_key.empty()) {
            const char* value = std::getenv(config_.api_key_env.c_str());
            if (!value || !*value)
                throw_config("environment variable " + config_.api_key_env +
                             " is not set; required for the live provider");
            config_.api_key = value;
        }
    }

    std::string id() const override { return "openai:" + config_.model; }

protected:
    ProviderResponse do_generate(const std::string& prompt, int size) override {
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_bearer_token_auth(config_.api_key);

        const nlohmann::json body = {{"model", config_.model},
                                     {"prompt", prompt},
                                     {"n", 1},
                                     {"size", std::to_string(size) + "x" + std::to_string(size)},
                                     {"response_format", "b64_json"}};
        const httplib::Result res = client.Post(config_.path, body.dump(), "application/json");

        if (!res)
            return ProviderResponse::transient("transport error: " + httplib::to_string(res.error()));
        if (res->status == 200) return parse_success(res->body);
        if (res->status == 400)
            return ProviderResponse::reject("HTTP 400: " + error_message(res->body));
        if (res->status == 401 || res->status == 403)
            throw_config("provider refused credentials (HTTP " + std::to_string(res->status) + "): " +
                         error_message(res->body));
        if (res->status == 408 || res->status == 429 || res->status >= 500)
            return ProviderResponse::transient("HTTP " + std::to_string(res->status) + ": " +
                                               error_message(res->body));
        return ProviderResponse::transient("unexpected HTTP " + std::to_string(res->status) + ": " +
                                           error_message(res->body));
    }

private:
    static ProviderResponse parse_success(const std::string& body) {
        try {
            const nlohmann::json j = nlohmann::json::parse(body);
            const auto& data = j.at("data");
            if (!data.is_array() || data.empty())
                return ProviderResponse::transient("response carries no image data");
            const auto& first = data.at(0);
            if (!first.contains("b64_json"))
                return ProviderResponse::transient("response lacks b64_json (URL delivery is not supported)");
            return ProviderResponse::ok(base64_decode(first.at("b64_json").get<std::string>()));
        } catch (const nlohmann::json::exception& e) {
            return ProviderResponse::transient(std::string("unparseable success response: ") + e.what());
        } catch (const Error& e) {
            return ProviderResponse::transient(std::string("invalid base64 payload: ") + e.what());
        }
    }

    /// Best-effort extraction of {"error": {"message": ...}}.
    static std::string error_message(const std::string& body) {
        try {
            const nlohmann::json j = nlohmann::json::parse(body);
            if (j.contains("error") && j.at("error").contains("message"))
                return j.at("error").at("message").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            // fall through to the raw body
        }
        return body.empty() ? std::string("(empty body)") : body.substr(0, 300);
    }

    LiveProviderConfig config_;
};

} // namespace geodefault
