#pragma once

// Provider contract: one stateless call per prompt, no shared session state.
// A call either yields PNG bytes, a terminal rejection (safety systems), or a
// retryable transient failure.

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "geodefault/error.hpp"

namespace geodefault {

enum class CallStatus { generated, rejected, transient_failure };

struct ProviderResponse {
    CallStatus status = CallStatus::transient_failure;
    std::vector<std::uint8_t> png_bytes; // populated iff generated
    std::string detail;                  // reason when not generated

    static ProviderResponse ok(std::vector<std::uint8_t> bytes) {
        return {CallStatus::generated, std::move(bytes), ""};
    }
    static ProviderResponse reject(std::string why) {
        return {CallStatus::rejected, {}, std::move(why)};
    }
    static ProviderResponse transient(std::string why) {
        return {CallStatus::transient_failure, {}, std::move(why)};
    }
};

class ImageProvider {
public:
    virtual ~ImageProvider() = default;

    virtual std::string id() const = 0;

    /// Validates the request, then dispatches to the concrete provider.
    ProviderResponse generate(const std::string& prompt, int size) {
        if (prompt.empty()) throw_input("provider called with empty prompt");
        if (size <= 0) throw_input("provider called with non-positive size " + std::to_string(size));
        return do_generate(prompt, size);
    }

protected:
    virtual ProviderResponse do_generate(const std::string& prompt, int size) = 0;
};

/// Exponential backoff for transient failures. `sleep` is injectable so tests
/// can observe the schedule without waiting.
struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{1000};
    double factor = 2.0;
    std::function<void(std::chrono::milliseconds)> sleep =
        [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

    void validate() const {
        if (max_attempts < 1) throw_config("retry max_attempts must be >= 1");
        if (initial_backoff.count() < 0) throw_config("retry backoff must be >= 0");
        if (factor < 1.0) throw_config("retry factor must be >= 1");
    }
};

/// Calls the provider up to policy.max_attempts times, sleeping between
/// attempts after a transient failure. Generated and Rejected return
/// immediately; a transient result after the final attempt is returned as-is.
inline ProviderResponse generate_with_retry(ImageProvider& provider, const std::string& prompt, int size,
                                            const RetryPolicy& policy, long long* calls = nullptr) {
    policy.validate();
    std::chrono::milliseconds backoff = policy.initial_backoff;
    ProviderResponse last;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        if (calls) ++*calls;
        last = provider.generate(prompt, size);
        if (last.status != CallStatus::transient_failure) return last;
        if (attempt < policy.max_attempts) {
            policy.sleep(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long long>(static_cast<double>(backoff.count()) * policy.factor));
        }
    }
    return last;
}

} // namespace geodefault
