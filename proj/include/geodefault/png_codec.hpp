#pragma once

// PNG codec on top of zlib. The decoder accepts the full set of PNG color
// types (gray, RGB, palette, gray+alpha, RGBA) at all legal bit depths,
// including Adam7 interlacing, and normalizes everything to 8-bit RGB with
// alpha composited over white. The encoder emits 8-bit RGB, non-interlaced,
// Sub-filtered scanlines; output bytes are a pure function of the pixels and
// the compression level.

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "geodefault/error.hpp"
#include "geodefault/image.hpp"

namespace geodefault {

class PngDecodeError : public Error {
public:
    PngDecodeError(std::string message, long long offset = -1)
        : Error(ErrorKind::input,
                offset >= 0 ? message + " at byte " + std::to_string(offset) : message),
          offset_(offset) {}

    /// Byte offset into the stream where the problem was detected, or -1
    /// when the position is not known.
    long long offset() const noexcept { return offset_; }

private:
    long long offset_;
};

namespace png_detail {

constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

inline std::uint32_t read_u32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}

inline void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

struct Header {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int bit_depth = 0;
    int color_type = 0;
    int interlace = 0;

    int channels() const {
        switch (color_type) {
        case 0: return 1; // gray
        case 2: return 3; // rgb
        case 3: return 1; // palette index
        case 4: return 2; // gray + alpha
        case 6: return 4; // rgba
        }
        return 0;
    }
    int bits_per_pixel() const { return channels() * bit_depth; }
    int filter_step() const { return std::max(1, bits_per_pixel() / 8); }
};

struct Chunk {
    char type[5] = {};
    std::span<const std::uint8_t> data;
    std::size_t offset = 0; // offset of the length field in the stream
};

class ChunkReader {
public:
    explicit ChunkReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
        if (bytes_.size() < 8 || std::memcmp(bytes_.data(), kSignature, 8) != 0)
            throw PngDecodeError("not a PNG: bad signature", 0);
        pos_ = 8;
    }

    bool next(Chunk& out) {
        if (done_) return false;
        if (pos_ + 8 > bytes_.size())
            throw PngDecodeError("truncated PNG: incomplete chunk header", static_cast<long long>(pos_));
        const std::size_t start = pos_;
        const std::uint32_t len = read_u32(&bytes_[pos_]);
        if (len > 0x7fffffffu)
            throw PngDecodeError("chunk length out of range", static_cast<long long>(pos_));
        if (pos_ + 12 + len > bytes_.size())
            throw PngDecodeError("truncated PNG: chunk data runs past end of stream",
                                 static_cast<long long>(pos_));
        std::memcpy(out.type, &bytes_[pos_ + 4], 4);
        out.type[4] = '\0';
        out.data = bytes_.subspan(pos_ + 8, len);
        out.offset = start;
        const std::uint32_t stored_crc = read_u32(&bytes_[pos_ + 8 + len]);
        std::uint32_t crc = crc32(0L, Z_NULL, 0);
        crc = crc32(crc, &bytes_[pos_ + 4], len + 4);
        if (crc != stored_crc)
            throw PngDecodeError(std::string("CRC mismatch in ") + out.type + " chunk",
                                 static_cast<long long>(pos_ + 8 + len));
        pos_ += 12 + len;
        if (std::memcmp(out.type, "IEND", 4) == 0) done_ = true;
        return true;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    bool done_ = false;
};

inline Header parse_ihdr(const Chunk& chunk) {
    if (chunk.data.size() != 13)
        throw PngDecodeError("IHDR must be 13 bytes", static_cast<long long>(chunk.offset));
    Header h;
    h.width = read_u32(&chunk.data[0]);
    h.height = read_u32(&chunk.data[4]);
    h.bit_depth = chunk.data[8];
    h.color_type = chunk.data[9];
    const int compression = chunk.data[10];
    const int filter = chunk.data[11];
    h.interlace = chunk.data[12];
    if (h.width == 0 || h.height == 0)
        throw PngDecodeError("zero image dimension", static_cast<long long>(chunk.offset));
    if (static_cast<std::uint64_t>(h.width) * h.height > (1ull << 26))
        throw PngDecodeError("image too large", static_cast<long long>(chunk.offset));
    if (compression != 0 || filter != 0)
        throw PngDecodeError("unsupported compression/filter method", static_cast<long long>(chunk.offset));
    if (h.interlace != 0 && h.interlace != 1)
        throw PngDecodeError("unsupported interlace method", static_cast<long long>(chunk.offset));
    const bool depth_ok = [&] {
        switch (h.color_type) {
        case 0: return h.bit_depth == 1 || h.bit_depth == 2 || h.bit_depth == 4 || h.bit_depth == 8 || h.bit_depth == 16;
        case 3: return h.bit_depth == 1 || h.bit_depth == 2 || h.bit_depth == 4 || h.bit_depth == 8;
        case 2:
        case 4:
        case 6: return h.bit_depth == 8 || h.bit_depth == 16;
        default: return false;
        }
    }();
    if (!depth_ok)
        throw PngDecodeError("invalid color type / bit depth combination (" +
                                 std::to_string(h.color_type) + "/" + std::to_string(h.bit_depth) + ")",
                             static_cast<long long>(chunk.offset));
    return h;
}

inline std::vector<std::uint8_t> zlib_inflate(std::span<const std::uint8_t> in, std::size_t expected_size) {
    std::vector<std::uint8_t> out(expected_size);
    z_stream strm{};
    if (inflateInit(&strm) != Z_OK) throw_internal("inflateInit failed");
    strm.next_in = const_cast<Bytef*>(in.data());
    strm.avail_in = static_cast<uInt>(in.size());
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&strm, Z_FINISH);
    const std::size_t produced = out.size() - strm.avail_out;
    inflateEnd(&strm);
    if (rc != Z_STREAM_END || produced != expected_size)
        throw PngDecodeError("corrupt image data: inflate produced " + std::to_string(produced) +
                             " of " + std::to_string(expected_size) + " bytes");
    return out;
}

inline std::vector<std::uint8_t> zlib_deflate(std::span<const std::uint8_t> in, int level) {
    uLongf bound = compressBound(static_cast<uLong>(in.size()));
    std::vector<std::uint8_t> out(bound);
    if (compress2(out.data(), &bound, in.data(), static_cast<uLong>(in.size()), level) != Z_OK)
        throw_internal("zlib compress2 failed");
    out.resize(bound);
    return out;
}

inline std::uint8_t paeth(std::uint8_t a, std::uint8_t b, std::uint8_t c) {
    const int p = int(a) + int(b) - int(c);
    const int pa = std::abs(p - int(a));
    const int pb = std::abs(p - int(b));
    const int pc = std::abs(p - int(c));
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

// In-place reconstruction of one sub-image: `raw` holds height scanlines of
// (1 + row_bytes) filtered bytes; returns the defiltered pixel bytes.
inline std::vector<std::uint8_t> unfilter(const std::uint8_t* raw, std::size_t row_bytes,
                                          std::uint32_t height, int step) {
    std::vector<std::uint8_t> out(row_bytes * height);
    const std::uint8_t* prev = nullptr;
    for (std::uint32_t y = 0; y < height; ++y) {
        const int filter = raw[y * (row_bytes + 1)];
        const std::uint8_t* src = raw + y * (row_bytes + 1) + 1;
        std::uint8_t* dst = out.data() + y * row_bytes;
        switch (filter) {
        case 0:
            std::memcpy(dst, src, row_bytes);
            break;
        case 1:
            for (std::size_t i = 0; i < row_bytes; ++i) {
                const std::uint8_t left = i >= static_cast<std::size_t>(step) ? dst[i - step] : 0;
                dst[i] = static_cast<std::uint8_t>(src[i] + left);
            }
            break;
        case 2:
            for (std::size_t i = 0; i < row_bytes; ++i) {
                const std::uint8_t up = prev ? prev[i] : 0;
                dst[i] = static_cast<std::uint8_t>(src[i] + up);
            }
            break;
        case 3:
            for (std::size_t i = 0; i < row_bytes; ++i) {
                const std::uint8_t left = i >= static_cast<std::size_t>(step) ? dst[i - step] : 0;
                const std::uint8_t up = prev ? prev[i] : 0;
                dst[i] = static_cast<std::uint8_t>(src[i] + ((int(left) + int(up)) >> 1));
            }
            break;
        case 4:
            for (std::size_t i = 0; i < row_bytes; ++i) {
                const std::uint8_t left = i >= static_cast<std::size_t>(step) ? dst[i - step] : 0;
                const std::uint8_t up = prev ? prev[i] : 0;
                const std::uint8_t ul = (prev && i >= static_cast<std::size_t>(step)) ? prev[i - step] : 0;
                dst[i] = static_cast<std::uint8_t>(src[i] + paeth(left, up, ul));
            }
            break;
        default:
            throw PngDecodeError("invalid scanline filter type " + std::to_string(filter));
        }
        prev = dst;
    }
    return out;
}

// Raw sample value (pre-scaling) for pixel `px`, channel `ch` of a
// defiltered scanline.
inline std::uint32_t read_sample(const std::uint8_t* row, std::uint32_t px, int ch, const Header& h) {
    const int channels = h.channels();
    switch (h.bit_depth) {
    case 16: {
        const std::size_t i = (static_cast<std::size_t>(px) * channels + ch) * 2;
        return (std::uint32_t(row[i]) << 8) | row[i + 1];
    }
    case 8:
        return row[static_cast<std::size_t>(px) * channels + ch];
    default: {
        // Sub-byte depths only occur with one channel per pixel.
        const std::size_t bit = static_cast<std::size_t>(px) * h.bit_depth;
        const std::uint8_t byte = row[bit >> 3];
        const int shift = 8 - h.bit_depth - static_cast<int>(bit & 7);
        return (byte >> shift) & ((1u << h.bit_depth) - 1);
    }
    }
}

inline std::uint8_t scale_to_8bit(std::uint32_t v, int depth) {
    switch (depth) {
    case 1: return static_cast<std::uint8_t>(v * 255);
    case 2: return static_cast<std::uint8_t>(v * 85);
    case 4: return static_cast<std::uint8_t>(v * 17);
    case 8: return static_cast<std::uint8_t>(v);
    case 16: return static_cast<std::uint8_t>(v >> 8);
    }
    return 0;
}

struct Transparency {
    bool present = false;
    std::uint32_t gray_key = 0;            // color type 0
    std::uint32_t rgb_key[3] = {0, 0, 0};  // color type 2
    std::vector<std::uint8_t> palette_alpha; // color type 3
};

struct Adam7Pass {
    int x0, y0, dx, dy;
};

constexpr Adam7Pass kAdam7[7] = {
    {0, 0, 8, 8}, {4, 0, 8, 8}, {0, 4, 4, 8}, {2, 0, 4, 4},
    {0, 2, 2, 4}, {1, 0, 2, 2}, {0, 1, 1, 2},
};

} // namespace png_detail

/// Width/height from the IHDR chunk without decoding pixel data.
inline std::pair<int, int> decode_png_header(std::span<const std::uint8_t> bytes) {
    png_detail::ChunkReader reader(bytes);
    png_detail::Chunk chunk;
    if (!reader.next(chunk) || std::memcmp(chunk.type, "IHDR", 4) != 0)
        throw PngDecodeError("first chunk is not IHDR", 8);
    const auto h = png_detail::parse_ihdr(chunk);
    return {static_cast<int>(h.width), static_cast<int>(h.height)};
}

inline RgbImage decode_png(std::span<const std::uint8_t> bytes) {
    using namespace png_detail;

    ChunkReader reader(bytes);
    Chunk chunk;
    if (!reader.next(chunk) || std::memcmp(chunk.type, "IHDR", 4) != 0)
        throw PngDecodeError("first chunk is not IHDR", 8);
    const Header h = parse_ihdr(chunk);

    std::vector<std::uint8_t> palette; // rgb triples
    Transparency trns;
    std::vector<std::uint8_t> idat;
    bool saw_iend = false;
    while (reader.next(chunk)) {
        if (std::memcmp(chunk.type, "PLTE", 4) == 0) {
            if (chunk.data.size() % 3 != 0 || chunk.data.size() > 3 * 256)
                throw PngDecodeError("bad PLTE size", static_cast<long long>(chunk.offset));
            palette.assign(chunk.data.begin(), chunk.data.end());
        } else if (std::memcmp(chunk.type, "tRNS", 4) == 0) {
            trns.present = true;
            if (h.color_type == 0) {
                if (chunk.data.size() != 2)
                    throw PngDecodeError("bad tRNS size for grayscale", static_cast<long long>(chunk.offset));
                trns.gray_key = (std::uint32_t(chunk.data[0]) << 8) | chunk.data[1];
            } else if (h.color_type == 2) {
                if (chunk.data.size() != 6)
                    throw PngDecodeError("bad tRNS size for RGB", static_cast<long long>(chunk.offset));
                for (int c = 0; c < 3; ++c)
                    trns.rgb_key[c] = (std::uint32_t(chunk.data[2 * c]) << 8) | chunk.data[2 * c + 1];
            } else if (h.color_type == 3) {
                trns.palette_alpha.assign(chunk.data.begin(), chunk.data.end());
            } else {
                throw PngDecodeError("tRNS not allowed for color type " + std::to_string(h.color_type),
                                     static_cast<long long>(chunk.offset));
            }
        } else if (std::memcmp(chunk.type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), chunk.data.begin(), chunk.data.end());
        } else if (std::memcmp(chunk.type, "IEND", 4) == 0) {
            saw_iend = true;
        }
        // Ancillary chunks are skipped.
    }
    if (!saw_iend) throw PngDecodeError("missing IEND chunk");
    if (idat.empty()) throw PngDecodeError("missing IDAT data");
    if (h.color_type == 3 && palette.empty()) throw PngDecodeError("palette image without PLTE");

    const int bpp = h.bits_per_pixel();
    auto row_bytes_for = [&](std::uint32_t width) -> std::size_t {
        return (static_cast<std::size_t>(width) * bpp + 7) / 8;
    };

    // Expected raw stream size across all sub-images.
    std::size_t expected = 0;
    if (h.interlace == 0) {
        expected = (row_bytes_for(h.width) + 1) * h.height;
    } else {
        for (const auto& p : kAdam7) {
            const std::uint32_t pw = h.width > static_cast<std::uint32_t>(p.x0)
                                         ? (h.width - p.x0 + p.dx - 1) / p.dx : 0;
            const std::uint32_t ph = h.height > static_cast<std::uint32_t>(p.y0)
                                         ? (h.height - p.y0 + p.dy - 1) / p.dy : 0;
            if (pw && ph) expected += (row_bytes_for(pw) + 1) * ph;
        }
    }
    const std::vector<std::uint8_t> raw = zlib_inflate(idat, expected);

    RgbImage out(static_cast<int>(h.width), static_cast<int>(h.height));

    auto emit_pixel = [&](std::uint32_t x, std::uint32_t y, const std::uint8_t* row, std::uint32_t px) {
        std::uint8_t r = 0, g = 0, b = 0, a = 255;
        switch (h.color_type) {
        case 0: {
            const std::uint32_t v = read_sample(row, px, 0, h);
            r = g = b = scale_to_8bit(v, h.bit_depth);
            if (trns.present && v == trns.gray_key) a = 0;
            break;
        }
        case 2: {
            const std::uint32_t rv = read_sample(row, px, 0, h);
            const std::uint32_t gv = read_sample(row, px, 1, h);
            const std::uint32_t bv = read_sample(row, px, 2, h);
            r = scale_to_8bit(rv, h.bit_depth);
            g = scale_to_8bit(gv, h.bit_depth);
            b = scale_to_8bit(bv, h.bit_depth);
            if (trns.present && rv == trns.rgb_key[0] && gv == trns.rgb_key[1] && bv == trns.rgb_key[2]) a = 0;
            break;
        }
        case 3: {
            const std::uint32_t idx = read_sample(row, px, 0, h);
            if (idx * 3 + 2 >= palette.size())
                throw PngDecodeError("palette index " + std::to_string(idx) + " out of range");
            r = palette[idx * 3];
            g = palette[idx * 3 + 1];
            b = palette[idx * 3 + 2];
            a = idx < trns.palette_alpha.size() ? trns.palette_alpha[idx] : 255;
            break;
        }
        case 4: {
            r = g = b = scale_to_8bit(read_sample(row, px, 0, h), h.bit_depth);
            a = scale_to_8bit(read_sample(row, px, 1, h), h.bit_depth);
            break;
        }
        case 6: {
            r = scale_to_8bit(read_sample(row, px, 0, h), h.bit_depth);
            g = scale_to_8bit(read_sample(row, px, 1, h), h.bit_depth);
            b = scale_to_8bit(read_sample(row, px, 2, h), h.bit_depth);
            a = scale_to_8bit(read_sample(row, px, 3, h), h.bit_depth);
            break;
        }
        }
        if (a != 255) {
            // Composite over white.
            const int av = a;
            r = static_cast<std::uint8_t>((int(r) * av + 255 * (255 - av) + 127) / 255);
            g = static_cast<std::uint8_t>((int(g) * av + 255 * (255 - av) + 127) / 255);
            b = static_cast<std::uint8_t>((int(b) * av + 255 * (255 - av) + 127) / 255);
        }
        out.set_pixel(static_cast<int>(x), static_cast<int>(y), r, g, b);
    };

    if (h.interlace == 0) {
        const std::size_t row_bytes = row_bytes_for(h.width);
        const std::vector<std::uint8_t> pixels = unfilter(raw.data(), row_bytes, h.height, h.filter_step());
        for (std::uint32_t y = 0; y < h.height; ++y) {
            const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * row_bytes;
            for (std::uint32_t x = 0; x < h.width; ++x) emit_pixel(x, y, row, x);
        }
    } else {
        std::size_t offset = 0;
        for (const auto& p : kAdam7) {
            const std::uint32_t pw = h.width > static_cast<std::uint32_t>(p.x0)
                                         ? (h.width - p.x0 + p.dx - 1) / p.dx : 0;
            const std::uint32_t ph = h.height > static_cast<std::uint32_t>(p.y0)
                                         ? (h.height - p.y0 + p.dy - 1) / p.dy : 0;
            if (!pw || !ph) continue;
            const std::size_t row_bytes = row_bytes_for(pw);
            const std::vector<std::uint8_t> pixels = unfilter(raw.data() + offset, row_bytes, ph, h.filter_step());
            offset += (row_bytes + 1) * ph;
            for (std::uint32_t j = 0; j < ph; ++j) {
                const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(j) * row_bytes;
                for (std::uint32_t i = 0; i < pw; ++i)
                    emit_pixel(static_cast<std::uint32_t>(p.x0) + i * p.dx,
                               static_cast<std::uint32_t>(p.y0) + j * p.dy, row, i);
            }
        }
    }
    return out;
}

inline RgbImage decode_png(const std::vector<std::uint8_t>& bytes) {
    return decode_png(std::span<const std::uint8_t>(bytes));
}

/// Encodes 8-bit RGB, non-interlaced, every scanline Sub-filtered. The same
/// pixels and level always produce the same bytes.
inline std::vector<std::uint8_t> encode_png(const RgbImage& img, int compression_level = 6) {
    using namespace png_detail;
    const std::size_t row_bytes = static_cast<std::size_t>(img.width) * 3;
    std::vector<std::uint8_t> filtered((row_bytes + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        std::uint8_t* dst = filtered.data() + static_cast<std::size_t>(y) * (row_bytes + 1);
        const std::uint8_t* src = img.data.data() + static_cast<std::size_t>(y) * row_bytes;
        dst[0] = 1; // Sub
        for (std::size_t i = 0; i < row_bytes; ++i) {
            const std::uint8_t left = i >= 3 ? src[i - 3] : 0;
            dst[1 + i] = static_cast<std::uint8_t>(src[i] - left);
        }
    }
    const std::vector<std::uint8_t> compressed = zlib_deflate(filtered, compression_level);

    std::vector<std::uint8_t> out;
    out.reserve(compressed.size() + 64);
    out.insert(out.end(), kSignature, kSignature + 8);
    auto write_chunk = [&out](const char* type, std::span<const std::uint8_t> data) {
        write_u32(out, static_cast<std::uint32_t>(data.size()));
        const std::size_t type_pos = out.size();
        out.insert(out.end(), type, type + 4);
        out.insert(out.end(), data.begin(), data.end());
        std::uint32_t crc = crc32(0L, Z_NULL, 0);
        crc = crc32(crc, out.data() + type_pos, static_cast<uInt>(4 + data.size()));
        write_u32(out, crc);
    };

    std::vector<std::uint8_t> ihdr;
    write_u32(ihdr, static_cast<std::uint32_t>(img.width));
    write_u32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // color type: RGB
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter method
    ihdr.push_back(0); // no interlace
    write_chunk("IHDR", ihdr);
    write_chunk("IDAT", compressed);
    write_chunk("IEND", {});
    return out;
}

} // namespace geodefault
