#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "geodefault/error.hpp"

namespace geodefault {

namespace detail {

/// Validates dimensions before any allocation can see them.
inline std::size_t checked_area(int w, int h, std::size_t channels) {
    if (w < 1 || h < 1) throw_input("image dimensions must be >= 1");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels;
}

} // namespace detail

/// 8-bit RGB raster, row-major, interleaved R,G,B.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // 3 * width * height

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(detail::checked_area(w, h, 3)) {}

    std::size_t pixel_index(int x, int y) const { return (static_cast<std::size_t>(y) * width + x) * 3; }

    void set_pixel(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        const std::size_t i = pixel_index(x, y);
        data[i] = r;
        data[i + 1] = g;
        data[i + 2] = b;
    }
};

/// 8-bit luminance raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // width * height

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(detail::checked_area(w, h, 1), fill) {}

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

    std::string shape() const { return std::to_string(width) + "x" + std::to_string(height); }
};

/// Luma weights for RGB -> gray. Defaults are the BT.601 triple; the
/// alternative 0.2125/0.7154/0.0721 set can be passed instead.
struct GrayWeights {
    double r = 0.299;
    double g = 0.587;
    double b = 0.114;
};

/// Per-pixel weighted sum, rounded half away from zero and clamped to
/// [0, 255]. Output pixel i depends only on input pixel i.
inline GrayImage to_grayscale(const RgbImage& img, const GrayWeights& w = {}) {
    GrayImage out(img.width, img.height);
    const std::size_t n = out.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i * 3;
        const double v = w.r * img.data[j] + w.g * img.data[j + 1] + w.b * img.data[j + 2];
        const long long rounded = std::llround(v);
        out.data[i] = static_cast<std::uint8_t>(rounded < 0 ? 0 : (rounded > 255 ? 255 : rounded));
    }
    return out;
}

} // namespace geodefault
