#pragma once

// Shared test scaffolding: repo-relative paths and self-cleaning temp dirs.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "geodefault/image.hpp"

namespace testutil {

inline std::filesystem::path source_dir() { return GEODEFAULT_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("geodefault-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline geodefault::GrayImage random_gray(std::mt19937_64& rng, int w, int h) {
    geodefault::GrayImage img(w, h);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& px : img.data) px = static_cast<std::uint8_t>(dist(rng));
    return img;
}

inline geodefault::RgbImage random_rgb(std::mt19937_64& rng, int w, int h) {
    geodefault::RgbImage img(w, h);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& px : img.data) px = static_cast<std::uint8_t>(dist(rng));
    return img;
}

inline geodefault::GrayImage random_gray(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_gray(rng, w, h);
}

inline geodefault::RgbImage random_rgb(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_rgb(rng, w, h);
}

} // namespace testutil
