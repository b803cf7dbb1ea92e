#pragma once

// Append-only content-addressed image store: a flat directory of
// <sha256>.png files. Writes go to a temp name then rename, so readers never
// see partial files and concurrent writers of the same content are harmless.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "geodefault/error.hpp"
#include "geodefault/sha256.hpp"
#include "geodefault/util.hpp"

namespace geodefault {

class ImageStore {
public:
    explicit ImageStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw_config("cannot create store directory " + dir_.string() + ": " + ec.message());
    }

    const std::filesystem::path& dir() const { return dir_; }

    std::filesystem::path path_for(const std::string& ref) const {
        check_ref(ref);
        return dir_ / (ref + ".png");
    }

    bool contains(const std::string& ref) const {
        std::error_code ec;
        return std::filesystem::exists(path_for(ref), ec) && !ec;
    }

    /// Stores the bytes under their hash and returns the ref. Existing
    /// entries are left untouched (identical content by construction).
    std::string put(std::span<const std::uint8_t> bytes) {
        const std::string ref = sha256_hex(bytes);
        const std::filesystem::path target = dir_ / (ref + ".png");
        std::error_code ec;
        if (!std::filesystem::exists(target, ec)) atomic_write_file(target, bytes.data(), bytes.size());
        return ref;
    }

    std::vector<std::uint8_t> load(const std::string& ref) const {
        const std::filesystem::path p = path_for(ref);
        std::error_code ec;
        if (!std::filesystem::exists(p, ec))
            throw_incomplete("image " + ref + " missing from store " + dir_.string());
        return read_file_bytes(p);
    }

private:
    static void check_ref(const std::string& ref) {
        if (ref.size() != 64) throw_input("malformed image ref (expected 64 hex chars): " + ref);
        for (const char c : ref)
            if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
                throw_input("malformed image ref (expected lowercase hex): " + ref);
    }

    std::filesystem::path dir_;
};

} // namespace geodefault
