#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>
#include <thread>

#include "geodefault/base64.hpp"
#include "geodefault/openai_provider.hpp"
#include "geodefault/png_codec.hpp"
#include "helpers.hpp"

using namespace geodefault;

namespace {

/// In-process HTTP server standing in for the images endpoint.
class TestServer {
public:
    TestServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~TestServer() {
        server_.stop();
        thread_.join();
    }

    httplib::Server& on() { return server_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

LiveProviderConfig config_for(const TestServer& server) {
    LiveProviderConfig c;
    c.base_url = server.url();
    c.api_key = "sk-test-123";
    c.timeout_seconds = 5;
    return c;
}

std::string as_b64(const std::vector<std::uint8_t>& bytes) {
    return base64_encode(bytes);
}

} // namespace

TEST_CASE("missing credentials fail at construction, not at call time") {
    const char* kVar = "GEODEFAULT_TEST_MISSING_KEY";
    ::unsetenv(kVar);
    LiveProviderConfig c;
    c.api_key_env = kVar;
    try {
        OpenAiImageProvider provider(c);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        CHECK(e.exit_code() == 3);
        CHECK(std::string(e.what()).find(kVar) != std::string::npos);
    }
}

TEST_CASE("the key is read from a configurable environment variable") {
    const char* kVar = "GEODEFAULT_TEST_KEY";
    ::setenv(kVar, "sk-from-env", 1);
    TestServer server;
    std::string seen_auth;
    server.on().Post("/v1/images/generations",
                     [&](const httplib::Request& req, httplib::Response& res) {
                         seen_auth = req.get_header_value("Authorization");
                         res.status = 500;
                         res.set_content("{}", "application/json");
                     });
    LiveProviderConfig c = config_for(server);
    c.api_key.clear();
    c.api_key_env = kVar;
    OpenAiImageProvider provider(c);
    provider.generate("forest", 16);
    CHECK(seen_auth == "Bearer sk-from-env");
    ::unsetenv(kVar);
}

TEST_CASE("a 200 with b64_json decodes into PNG bytes") {
    TestServer server;
    const std::vector<std::uint8_t> png = encode_png(RgbImage(16, 16));
    nlohmann::json seen_body;
    server.on().Post("/v1/images/generations",
                     [&](const httplib::Request& req, httplib::Response& res) {
                         seen_body = nlohmann::json::parse(req.body);
                         CHECK(req.get_header_value("Authorization") == "Bearer sk-test-123");
                         CHECK(req.get_header_value("Content-Type") == "application/json");
                         const nlohmann::json out = {{"data", {{{"b64_json", as_b64(png)}}}}};
                         res.set_content(out.dump(), "application/json");
                     });

    OpenAiImageProvider provider(config_for(server));
    CHECK(provider.id() == "openai:dall-e-3");
    const ProviderResponse r = provider.generate("forest in Uganda", 16);
    REQUIRE(r.status == CallStatus::generated);
    CHECK(r.png_bytes == png);

    CHECK(seen_body.at("model") == "dall-e-3");
    CHECK(seen_body.at("prompt") == "forest in Uganda");
    CHECK(seen_body.at("n") == 1);
    CHECK(seen_body.at("size") == "16x16");
    CHECK(seen_body.at("response_format") == "b64_json");
}

TEST_CASE("HTTP 400 maps to a terminal rejection with the server's message") {
    TestServer server;
    server.on().Post("/v1/images/generations", [](const httplib::Request&, httplib::Response& res) {
        res.status = 400;
        res.set_content(R"({"error":{"message":"Your request was rejected by the safety system"}})",
                        "application/json");
    });
    OpenAiImageProvider provider(config_for(server));
    const ProviderResponse r = provider.generate("forest", 16);
    CHECK(r.status == CallStatus::rejected);
    CHECK(r.detail.find("safety system") != std::string::npos);
    CHECK(r.detail.find("400") != std::string::npos);
}

TEST_CASE("throttling and server errors are transient") {
    for (const int status : {408, 429, 500, 503}) {
        TestServer server;
        server.on().Post("/v1/images/generations",
                         [status](const httplib::Request&, httplib::Response& res) {
                             res.status = status;
                             res.set_content(R"({"error":{"message":"later"}})", "application/json");
                         });
        OpenAiImageProvider provider(config_for(server));
        const ProviderResponse r = provider.generate("forest", 16);
        INFO("HTTP " << status);
        CHECK(r.status == CallStatus::transient_failure);
        CHECK(r.detail.find(std::to_string(status)) != std::string::npos);
    }
}

TEST_CASE("credential refusals abort instead of retrying") {
    for (const int status : {401, 403}) {
        TestServer server;
        server.on().Post("/v1/images/generations",
                         [status](const httplib::Request&, httplib::Response& res) {
                             res.status = status;
                             res.set_content(R"({"error":{"message":"bad key"}})", "application/json");
                         });
        OpenAiImageProvider provider(config_for(server));
        try {
            provider.generate("forest", 16);
            FAIL("expected throw for HTTP " << status);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::config);
            CHECK(std::string(e.what()).find("bad key") != std::string::npos);
        }
    }
}

TEST_CASE("malformed success bodies are transient, not fatal") {
    const char* bodies[] = {
        "not json at all",
        R"({"data":[]})",
        R"({"data":[{"url":"https://example.com/x.png"}]})",
        R"({"data":[{"b64_json":"@@@not-base64@@@"}]})",
    };
    for (const char* body : bodies) {
        TestServer server;
        server.on().Post("/v1/images/generations",
                         [body](const httplib::Request&, httplib::Response& res) {
                             res.set_content(body, "application/json");
                         });
        OpenAiImageProvider provider(config_for(server));
        const ProviderResponse r = provider.generate("forest", 16);
        INFO("body " << body);
        CHECK(r.status == CallStatus::transient_failure);
        CHECK(r.png_bytes.empty());
    }
}

TEST_CASE("transport failures surface as transient") {
    LiveProviderConfig c;
    c.base_url = "http://127.0.0.1:1"; // nothing listens here
    c.api_key = "sk-test";
    c.timeout_seconds = 2;
    OpenAiImageProvider provider(c);
    const ProviderResponse r = provider.generate("forest", 16);
    CHECK(r.status == CallStatus::transient_failure);
    CHECK(r.detail.find("transport error") != std::string::npos);
}

TEST_CASE("alternate model and path are used in the request") {
    TestServer server;
    std::string seen_path;
    nlohmann::json seen_body;
    server.on().Post("/custom/images", [&](const httplib::Request& req, httplib::Response& res) {
        seen_path = req.path;
        seen_body = nlohmann::json::parse(req.body);
        res.status = 400;
        res.set_content("{}", "application/json");
    });
    LiveProviderConfig c = config_for(server);
    c.path = "/custom/images";
    c.model = "gpt-image-1";
    OpenAiImageProvider provider(c);
    CHECK(provider.id() == "openai:gpt-image-1");
    provider.generate("forest", 32);
    CHECK(seen_path == "/custom/images");
    CHECK(seen_body.at("model") == "gpt-image-1");
    CHECK(seen_body.at("size") == "32x32");
}
