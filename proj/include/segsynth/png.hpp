#pragma once

// Minimal lossless PNG codec for greyscale images, the only flavor this
// project stores: 8-bit masks and 16-bit MR slices. Samples are written
// big-endian per the PNG spec and round-trip bit-exactly. The DEFLATE layer
// is zlib; the container (signature, chunks, CRCs, scanline filters) is
// implemented here. Decoding handles all five filter types; encoding always
// emits filter 0. Interlaced, paletted and multi-channel images are rejected.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "segsynth/common.hpp"

namespace segsynth::png {

struct Gray {
    int width = 0;
    int height = 0;
    int bit_depth = 8;              // 8 or 16
    std::vector<std::uint16_t> pixels;  // row-major, one sample per pixel

    std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

namespace detail {

inline void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4], std::span<const std::uint8_t> data) {
    put_u32be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    // type and data are contiguous in out; hashing them together also avoids
    // zlib's crc32(crc, Z_NULL, 0) == 0 quirk for empty chunks
    std::uint32_t crc = static_cast<std::uint32_t>(
        ::crc32(0, out.data() + type_at, static_cast<uInt>(4 + data.size())));
    put_u32be(out, crc);
}

inline int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace detail

inline constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

inline std::vector<std::uint8_t> encode(const Gray& img) {
    if (img.width < 1 || img.height < 1) throw value_error("png: empty image");
    if (img.bit_depth != 8 && img.bit_depth != 16) throw value_error("png: bit depth must be 8 or 16");
    if (img.pixels.size() != img.size()) throw shape_error("png: pixel buffer does not match dimensions");
    const std::uint16_t max_value = img.bit_depth == 8 ? 0xff : 0xffff;
    for (std::uint16_t v : img.pixels)
        if (v > max_value)
            throw range_error("png: sample " + std::to_string(v) + " exceeds " +
                              std::to_string(img.bit_depth) + "-bit range");

    // raw scanlines: filter byte 0 followed by big-endian samples
    const int bpp = img.bit_depth / 8;
    const std::size_t stride = 1 + static_cast<std::size_t>(img.width) * static_cast<std::size_t>(bpp);
    std::vector<std::uint8_t> raw(stride * static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        std::uint8_t* row = raw.data() + stride * static_cast<std::size_t>(y);
        row[0] = 0;
        const std::uint16_t* src = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
        if (bpp == 1) {
            for (int x = 0; x < img.width; ++x) row[1 + x] = static_cast<std::uint8_t>(src[x]);
        } else {
            for (int x = 0; x < img.width; ++x) {
                row[1 + 2 * x] = static_cast<std::uint8_t>(src[x] >> 8);
                row[2 + 2 * x] = static_cast<std::uint8_t>(src[x] & 0xff);
            }
        }
    }

    uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> idat(bound);
    if (::compress2(idat.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw error("png: deflate failed");
    idat.resize(bound);

    std::vector<std::uint8_t> out(kSignature, kSignature + 8);
    std::uint8_t ihdr[13];
    ihdr[0] = static_cast<std::uint8_t>(static_cast<std::uint32_t>(img.width) >> 24);
    ihdr[1] = static_cast<std::uint8_t>(static_cast<std::uint32_t>(img.width) >> 16);
    ihdr[2] = static_cast<std::uint8_t>(static_cast<std::uint32_t>(img.width) >> 8);
    ihdr[3] = static_cast<std::uint8_t>(img.width);
    ihdr[4] = static_cast<std::uint8_t>(static_cast<std::uint32_t>(img.height) >> 24);
    ihdr[5] = static_cast<std::uint8_t>(static_cast<std::uint32_t>(img.height) >> 16);
    ihdr[6] = static_cast<std::uint8_t>(static_cast<std::uint32_t>(img.height) >> 8);
    ihdr[7] = static_cast<std::uint8_t>(img.height);
    ihdr[8] = static_cast<std::uint8_t>(img.bit_depth);
    ihdr[9] = 0;   // color type: greyscale
    ihdr[10] = 0;  // compression
    ihdr[11] = 0;  // filter method
    ihdr[12] = 0;  // no interlace
    detail::append_chunk(out, "IHDR", ihdr);
    detail::append_chunk(out, "IDAT", idat);
    detail::append_chunk(out, "IEND", {});
    return out;
}

inline Gray decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0)
        throw parse_error("png: bad signature at byte 0");

    Gray img;
    bool saw_ihdr = false, saw_iend = false;
    std::vector<std::uint8_t> idat;
    std::size_t off = 8;
    while (off < bytes.size()) {
        if (off + 8 > bytes.size())
            throw parse_error("png: truncated chunk header at byte " + std::to_string(off));
        const std::uint32_t len = detail::get_u32be(bytes.data() + off);
        const std::uint8_t* type = bytes.data() + off + 4;
        if (off + 12 + static_cast<std::size_t>(len) > bytes.size())
            throw parse_error("png: truncated chunk body at byte " + std::to_string(off));
        const std::uint8_t* data = bytes.data() + off + 8;
        const std::uint32_t want_crc = detail::get_u32be(data + len);
        const std::uint32_t have_crc =
            static_cast<std::uint32_t>(::crc32(0, type, static_cast<uInt>(4 + len)));
        if (want_crc != have_crc)
            throw parse_error("png: CRC mismatch in chunk at byte " + std::to_string(off));

        const std::string tag(reinterpret_cast<const char*>(type), 4);
        if (tag == "IHDR") {
            if (len != 13) throw parse_error("png: IHDR length != 13");
            img.width = static_cast<int>(detail::get_u32be(data));
            img.height = static_cast<int>(detail::get_u32be(data + 4));
            img.bit_depth = data[8];
            const int color_type = data[9];
            if (img.width < 1 || img.height < 1) throw parse_error("png: non-positive dimensions");
            if (color_type != 0) throw format_error("png: only greyscale (color type 0) supported");
            if (img.bit_depth != 8 && img.bit_depth != 16)
                throw format_error("png: only bit depths 8 and 16 supported");
            if (data[10] != 0 || data[11] != 0) throw format_error("png: unknown compression/filter method");
            if (data[12] != 0) throw format_error("png: interlaced images not supported");
            saw_ihdr = true;
        } else if (tag == "IDAT") {
            if (!saw_ihdr) throw parse_error("png: IDAT before IHDR");
            idat.insert(idat.end(), data, data + len);
        } else if (tag == "IEND") {
            saw_iend = true;
            break;
        }
        // ancillary chunks are skipped
        off += 12 + static_cast<std::size_t>(len);
    }
    if (!saw_ihdr) throw parse_error("png: missing IHDR");
    if (!saw_iend) throw parse_error("png: missing IEND");
    if (idat.empty()) throw parse_error("png: missing IDAT");

    const int bpp = img.bit_depth / 8;
    const std::size_t stride = 1 + static_cast<std::size_t>(img.width) * static_cast<std::size_t>(bpp);
    std::vector<std::uint8_t> raw(stride * static_cast<std::size_t>(img.height));
    uLongf raw_len = static_cast<uLongf>(raw.size());
    const int zrc = ::uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size()));
    if (zrc != Z_OK || raw_len != raw.size())
        throw parse_error("png: inflate failed or produced wrong length");

    // undo per-row filters in place
    for (int y = 0; y < img.height; ++y) {
        std::uint8_t* row = raw.data() + stride * static_cast<std::size_t>(y);
        const std::uint8_t* prev = y > 0 ? row - stride : nullptr;
        const int filter = row[0];
        const std::size_t n = stride - 1;
        auto a = [&](std::size_t i) -> int { return i >= static_cast<std::size_t>(bpp) ? row[1 + i - bpp] : 0; };
        auto b = [&](std::size_t i) -> int { return prev ? prev[1 + i] : 0; };
        auto c = [&](std::size_t i) -> int {
            return (prev && i >= static_cast<std::size_t>(bpp)) ? prev[1 + i - bpp] : 0;
        };
        switch (filter) {
            case 0: break;
            case 1:
                for (std::size_t i = 0; i < n; ++i) row[1 + i] = static_cast<std::uint8_t>(row[1 + i] + a(i));
                break;
            case 2:
                for (std::size_t i = 0; i < n; ++i) row[1 + i] = static_cast<std::uint8_t>(row[1 + i] + b(i));
                break;
            case 3:
                for (std::size_t i = 0; i < n; ++i)
                    row[1 + i] = static_cast<std::uint8_t>(row[1 + i] + (a(i) + b(i)) / 2);
                break;
            case 4:
                for (std::size_t i = 0; i < n; ++i)
                    row[1 + i] = static_cast<std::uint8_t>(row[1 + i] + detail::paeth(a(i), b(i), c(i)));
                break;
            default:
                throw parse_error("png: unknown filter type " + std::to_string(filter) + " in row " +
                                  std::to_string(y));
        }
    }

    img.pixels.resize(img.size());
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t* row = raw.data() + stride * static_cast<std::size_t>(y) + 1;
        std::uint16_t* dst = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
        if (bpp == 1) {
            for (int x = 0; x < img.width; ++x) dst[x] = row[x];
        } else {
            for (int x = 0; x < img.width; ++x)
                dst[x] = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
        }
    }
    return img;
}

inline void write_file(const std::filesystem::path& path, const Gray& img) {
    const auto bytes = encode(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("png: cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("png: write failed: " + path.string());
}

inline Gray read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("png: cannot open: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode(bytes);
}

}  // namespace segsynth::png
