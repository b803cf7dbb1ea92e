#pragma once

// MSE and SSIM between two equally sized 8-bit grayscale images.
//
// SSIM uses a uniform (mean-filter) window over fully interior positions:
// a border of (window_size-1)/2 pixels is cropped before averaging per-window
// scores. Window statistics are derived from exact integer summed-area
// tables, so results are bit-identical regardless of evaluation order or
// thread count.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geodefault/error.hpp"
#include "geodefault/image.hpp"

namespace geodefault {

enum class Measure { mse, ssim };

inline const char* measure_name(Measure m) { return m == Measure::mse ? "MSE" : "SSIM"; }

inline Measure measure_from_name(const std::string& name) {
    if (name == "MSE" || name == "mse") return Measure::mse;
    if (name == "SSIM" || name == "ssim") return Measure::ssim;
    throw_input("unknown measure: " + name);
}

/// Lower MSE means more similar; higher SSIM means more similar.
struct SimilarityScore {
    Measure measure;
    double value;
};

struct SsimParams {
    int window_size = 7;
    double k1 = 0.01;
    double k2 = 0.03;
    double data_range = 255.0;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    bool sample_covariance = true; // N-1 normalization

    double c1() const { return (k1 * data_range) * (k1 * data_range); }
    double c2() const { return (k2 * data_range) * (k2 * data_range); }
    double c3() const { return c2() / 2.0; }

    bool default_exponents() const { return alpha == 1.0 && beta == 1.0 && gamma == 1.0; }

    void validate() const {
        if (window_size < 3 || window_size % 2 == 0)
            throw_input("SSIM window size must be odd and >= 3, got " + std::to_string(window_size));
        if (k1 <= 0 || k2 <= 0) throw_input("SSIM k1/k2 must be positive");
        if (data_range <= 0) throw_input("SSIM data range must be positive");
    }
};

/// Mean, variance, and covariance of one window pair.
struct LocalStats {
    double mu_x = 0;
    double mu_y = 0;
    double var_x = 0;
    double var_y = 0;
    double cov_xy = 0;
};

namespace detail {

inline void require_same_shape(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw_input("image dimensions differ: " + a.shape() + " vs " + b.shape());
}

// Summed-area tables of x, y, x^2, y^2 and x*y in 64-bit integers. All
// window sums derived from these are exact.
struct PairTables {
    int width, height;
    std::vector<std::int64_t> sx, sy, sxx, syy, sxy;

    PairTables(const GrayImage& a, const GrayImage& b)
        : width(a.width), height(a.height) {
        const std::size_t stride = static_cast<std::size_t>(width) + 1;
        const std::size_t n = stride * (height + 1);
        sx.assign(n, 0); sy.assign(n, 0); sxx.assign(n, 0); syy.assign(n, 0); sxy.assign(n, 0);
        for (int y = 0; y < height; ++y) {
            std::int64_t rx = 0, ry = 0, rxx = 0, ryy = 0, rxy = 0;
            const std::size_t row = (static_cast<std::size_t>(y) + 1) * stride;
            const std::size_t prev = static_cast<std::size_t>(y) * stride;
            for (int x = 0; x < width; ++x) {
                const std::int64_t xv = a.at(x, y);
                const std::int64_t yv = b.at(x, y);
                rx += xv; ry += yv; rxx += xv * xv; ryy += yv * yv; rxy += xv * yv;
                sx[row + x + 1] = sx[prev + x + 1] + rx;
                sy[row + x + 1] = sy[prev + x + 1] + ry;
                sxx[row + x + 1] = sxx[prev + x + 1] + rxx;
                syy[row + x + 1] = syy[prev + x + 1] + ryy;
                sxy[row + x + 1] = sxy[prev + x + 1] + rxy;
            }
        }
    }

    std::int64_t window(const std::vector<std::int64_t>& t, int x0, int y0, int win) const {
        const std::size_t stride = static_cast<std::size_t>(width) + 1;
        const std::size_t a0 = static_cast<std::size_t>(y0) * stride + x0;
        const std::size_t a1 = static_cast<std::size_t>(y0 + win) * stride + x0;
        return t[a1 + win] - t[a1] - t[a0 + win] + t[a0];
    }
};

inline LocalStats stats_from_sums(std::int64_t wx, std::int64_t wy, std::int64_t wxx,
                                  std::int64_t wyy, std::int64_t wxy, int n_pixels,
                                  bool sample_covariance) {
    LocalStats s;
    const double n = n_pixels;
    s.mu_x = double(wx) / n;
    s.mu_y = double(wy) / n;
    // n*sum(v^2) - sum(v)^2 is an exact non-negative integer for 8-bit data.
    const std::int64_t var_x_num = wxx * n_pixels - wx * wx;
    const std::int64_t var_y_num = wyy * n_pixels - wy * wy;
    const std::int64_t cov_num = wxy * n_pixels - wx * wy;
    const double denom = n * (sample_covariance ? n - 1.0 : n);
    s.var_x = double(var_x_num) / denom;
    s.var_y = double(var_y_num) / denom;
    s.cov_xy = double(cov_num) / denom;
    if (s.var_x < 0) s.var_x = 0;
    if (s.var_y < 0) s.var_y = 0;
    return s;
}

inline double window_score(const LocalStats& s, const SsimParams& p) {
    const double c1 = p.c1(), c2 = p.c2();
    if (p.default_exponents()) {
        // l*c*s collapses to the familiar two-factor form when c3 = c2/2.
        const double num = (2.0 * s.mu_x * s.mu_y + c1) * (2.0 * s.cov_xy + c2);
        const double den = (s.mu_x * s.mu_x + s.mu_y * s.mu_y + c1) * (s.var_x + s.var_y + c2);
        return num / den;
    }
    const double c3 = p.c3();
    const double sigma_x = std::sqrt(s.var_x);
    const double sigma_y = std::sqrt(s.var_y);
    const double l = (2.0 * s.mu_x * s.mu_y + c1) / (s.mu_x * s.mu_x + s.mu_y * s.mu_y + c1);
    const double c = (2.0 * sigma_x * sigma_y + c2) / (s.var_x + s.var_y + c2);
    const double st = (s.cov_xy + c3) / (sigma_x * sigma_y + c3);
    return std::pow(l, p.alpha) * std::pow(c, p.beta) * std::pow(st, p.gamma);
}

} // namespace detail

/// Statistics of the window pair whose top-left corner is (x0, y0).
inline LocalStats window_stats(const GrayImage& a, const GrayImage& b, const SsimParams& p,
                               int x0, int y0) {
    detail::require_same_shape(a, b);
    p.validate();
    const int win = p.window_size;
    if (x0 < 0 || y0 < 0 || x0 + win > a.width || y0 + win > a.height)
        throw_input("window position out of range");
    std::int64_t wx = 0, wy = 0, wxx = 0, wyy = 0, wxy = 0;
    for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x) {
            const std::int64_t xv = a.at(x, y);
            const std::int64_t yv = b.at(x, y);
            wx += xv; wy += yv; wxx += xv * xv; wyy += yv * yv; wxy += xv * yv;
        }
    return detail::stats_from_sums(wx, wy, wxx, wyy, wxy, win * win, p.sample_covariance);
}

/// Mean squared pixel difference. Accumulated in 64-bit integers, so the
/// result is exact for 8-bit inputs up to the final division.
inline double mse(const GrayImage& a, const GrayImage& b) {
    detail::require_same_shape(a, b);
    std::int64_t sum = 0;
    const std::size_t n = a.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t d = std::int64_t(a.data[i]) - std::int64_t(b.data[i]);
        sum += d * d;
    }
    return double(sum) / double(n);
}

/// Mean windowed structural similarity over all fully interior window
/// positions. Result is in [-1, 1].
inline double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p = {}) {
    detail::require_same_shape(a, b);
    p.validate();
    const int win = p.window_size;
    if (a.width < win || a.height < win)
        throw_input("image " + a.shape() + " smaller than SSIM window " + std::to_string(win));

    const detail::PairTables tables(a, b);
    const int nx = a.width - win + 1;
    const int ny = a.height - win + 1;
    const int n_pixels = win * win;
    double total = 0.0;
    for (int y0 = 0; y0 < ny; ++y0) {
        for (int x0 = 0; x0 < nx; ++x0) {
            const LocalStats s = detail::stats_from_sums(
                tables.window(tables.sx, x0, y0, win), tables.window(tables.sy, x0, y0, win),
                tables.window(tables.sxx, x0, y0, win), tables.window(tables.syy, x0, y0, win),
                tables.window(tables.sxy, x0, y0, win), n_pixels, p.sample_covariance);
            total += detail::window_score(s, p);
        }
    }
    return total / (double(nx) * double(ny));
}

/// Both measures for one image pair.
inline std::pair<SimilarityScore, SimilarityScore> compare(const GrayImage& a, const GrayImage& b,
                                                           const SsimParams& p = {}) {
    return {SimilarityScore{Measure::mse, mse(a, b)}, SimilarityScore{Measure::ssim, ssim(a, b, p)}};
}

} // namespace geodefault
