#pragma once

// Deterministic offline stand-in for a text-to-image API. Every pixel is a
// pure function of (seed, prompt, x, y): two octaves of value noise on a
// counter-based hash, smoothed bilinearly, one independent field per channel.
// Identical inputs give identical bytes on any platform with IEEE-754 doubles.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "geodefault/image.hpp"
#include "geodefault/png_codec.hpp"
#include "geodefault/provider.hpp"

namespace geodefault {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Lattice value in [0,1) for integer lattice coordinates (i, j).
inline double lattice01(std::uint64_t key, std::uint64_t i, std::uint64_t j) {
    const std::uint64_t h = splitmix64(key ^ splitmix64((i << 32) ^ j));
    return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0); // 53-bit mantissa
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

} // namespace detail

/// Renders the procedural image for (seed, prompt) at size x size pixels.
inline RgbImage synthetic_image(std::uint64_t seed, const std::string& prompt, int size) {
    constexpr int kCells[2] = {160, 36};       // low-frequency structure + finer texture
    constexpr double kWeights[2] = {0.7, 0.3}; // sums to 1, so the field stays in [0,1)

    RgbImage img(size, size);
    const std::uint64_t key = detail::splitmix64(seed ^ detail::fnv1a64(prompt));

    // Per-column lookup tables shared by every row of an octave.
    std::vector<int> col_cell[2];
    std::vector<double> col_frac[2];
    for (int o = 0; o < 2; ++o) {
        col_cell[o].resize(static_cast<std::size_t>(size));
        col_frac[o].resize(static_cast<std::size_t>(size));
        for (int x = 0; x < size; ++x) {
            col_cell[o][static_cast<std::size_t>(x)] = x / kCells[o];
            col_frac[o][static_cast<std::size_t>(x)] =
                detail::smoothstep(static_cast<double>(x % kCells[o]) / kCells[o]);
        }
    }

    std::vector<double> row_val[2]; // lattice columns interpolated to the current row
    for (int c = 0; c < 3; ++c) {
        const std::uint64_t channel_key = detail::splitmix64(key + static_cast<std::uint64_t>(c) + 1);
        for (int y = 0; y < size; ++y) {
            for (int o = 0; o < 2; ++o) {
                const std::uint64_t octave_key = detail::splitmix64(channel_key + static_cast<std::uint64_t>(o));
                const int cols = size / kCells[o] + 2;
                auto& rv = row_val[o];
                rv.resize(static_cast<std::size_t>(cols));
                const std::uint64_t iy = static_cast<std::uint64_t>(y / kCells[o]);
                const double fy = detail::smoothstep(static_cast<double>(y % kCells[o]) / kCells[o]);
                for (int i = 0; i < cols; ++i) {
                    const double a = detail::lattice01(octave_key, static_cast<std::uint64_t>(i), iy);
                    const double b = detail::lattice01(octave_key, static_cast<std::uint64_t>(i), iy + 1);
                    rv[static_cast<std::size_t>(i)] = a + (b - a) * fy;
                }
            }
            const std::size_t row_base = (static_cast<std::size_t>(y) * static_cast<std::size_t>(size)) * 3;
            for (int x = 0; x < size; ++x) {
                double v = 0.0;
                for (int o = 0; o < 2; ++o) {
                    const std::size_t ix = static_cast<std::size_t>(col_cell[o][static_cast<std::size_t>(x)]);
                    const double fx = col_frac[o][static_cast<std::size_t>(x)];
                    const double left = row_val[o][ix];
                    v += kWeights[o] * (left + (row_val[o][ix + 1] - left) * fx);
                }
                int byte = static_cast<int>(v * 256.0);
                if (byte > 255) byte = 255;
                if (byte < 0) byte = 0;
                img.data[row_base + static_cast<std::size_t>(x) * 3 + static_cast<std::size_t>(c)] =
                    static_cast<std::uint8_t>(byte);
            }
        }
    }
    return img;
}

class SyntheticProvider : public ImageProvider {
public:
    explicit SyntheticProvider(std::uint64_t seed) : seed_(seed) {}

    std::string id() const override { return "synthetic-" + std::to_string(seed_); }

    std::uint64_t seed() const { return seed_; }

    /// Prompts on this list are rejected, mimicking a safety-system refusal.
    void reject_prompt(const std::string& prompt) { rejects_.insert(prompt); }

protected:
    ProviderResponse do_generate(const std::string& prompt, int size) override {
        if (rejects_.count(prompt))
            return ProviderResponse::reject("prompt on synthetic rejection list");
        return ProviderResponse::ok(encode_png(synthetic_image(seed_, prompt, size)));
    }

private:
    std::uint64_t seed_;
    std::set<std::string> rejects_;
};

} // namespace geodefault
