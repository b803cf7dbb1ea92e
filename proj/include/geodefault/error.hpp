#pragma once

#include <stdexcept>
#include <string>

namespace geodefault {

// Error categories map onto CLI exit codes: input 2, config 3, incomplete 4,
// internal 1.
enum class ErrorKind {
    input,
    config,
    incomplete,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
        case ErrorKind::input: return 2;
        case ErrorKind::config: return 3;
        case ErrorKind::incomplete: return 4;
        case ErrorKind::internal: return 1;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_input(std::string msg) { throw Error(ErrorKind::input, std::move(msg)); }
[[noreturn]] inline void throw_config(std::string msg) { throw Error(ErrorKind::config, std::move(msg)); }
[[noreturn]] inline void throw_incomplete(std::string msg) { throw Error(ErrorKind::incomplete, std::move(msg)); }
[[noreturn]] inline void throw_internal(std::string msg) { throw Error(ErrorKind::internal, std::move(msg)); }

} // namespace geodefault
