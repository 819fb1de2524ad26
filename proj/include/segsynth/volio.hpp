#pragma once

// 2D slice types and the operations between volumes and image files:
// axial slicing, power-of-two zero padding (with exact crop inverse) and
// lossless PNG round trips. MR slices are unsigned 16-bit, masks unsigned
// 8-bit, matching the on-disk formats.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "segsynth/common.hpp"
#include "segsynth/nifti.hpp"
#include "segsynth/png.hpp"

namespace segsynth {

enum class PixelKind { Mr16, Mask8 };

struct Slice2D {
    PixelKind kind = PixelKind::Mr16;
    int height = 0;
    int width = 0;
    std::vector<std::uint16_t> pixels;  // row-major
    std::string source_id;
    int axial_index = 0;

    std::uint16_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }

    bool operator==(const Slice2D& o) const {
        return kind == o.kind && height == o.height && width == o.width && pixels == o.pixels;
    }
};

// Integer class map, values in {0..C-1}.
struct LabelMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> v;

    LabelMask() = default;
    LabelMask(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), v(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

    std::uint8_t at(int y, int x) const { return v[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int y, int x) { return v[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }

    bool operator==(const LabelMask& o) const { return height == o.height && width == o.width && v == o.v; }
};

inline std::uint16_t max_value_for(PixelKind kind) { return kind == PixelKind::Mr16 ? 0xffff : 0xff; }

inline void validate_range(const Slice2D& s) {
    const std::uint16_t hi = max_value_for(s.kind);
    for (std::uint16_t v : s.pixels)
        if (v > hi)
            throw range_error("slice value " + std::to_string(v) + " exceeds " +
                              (s.kind == PixelKind::Mask8 ? std::string("8") : std::string("16")) + "-bit range");
}

// ---------------------------------------------------------------------------
// Slicing
// ---------------------------------------------------------------------------

// Axial plane k of the volume; slice row y / column x maps to voxel (x, y, k).
inline std::vector<Slice2D> slice_axial(const Volume& vol, PixelKind kind) {
    if (vol.nx < 1 || vol.ny < 1 || vol.nz < 1) throw value_error("slice_axial: empty volume");
    const std::uint16_t hi = max_value_for(kind);
    std::vector<Slice2D> slices(static_cast<std::size_t>(vol.nz));
    for (int k = 0; k < vol.nz; ++k) {
        Slice2D& s = slices[static_cast<std::size_t>(k)];
        s.kind = kind;
        s.height = vol.ny;
        s.width = vol.nx;
        s.source_id = vol.source_id;
        s.axial_index = k;
        s.pixels.resize(s.size());
        for (int y = 0; y < vol.ny; ++y)
            for (int x = 0; x < vol.nx; ++x) {
                const std::uint16_t v = vol.at(x, y, k);
                if (v > hi)
                    throw range_error("slice_axial: voxel value " + std::to_string(v) +
                                      " out of range for mask slice in " + vol.source_id);
                s.at(y, x) = v;
            }
    }
    return slices;
}

// ---------------------------------------------------------------------------
// Padding
// ---------------------------------------------------------------------------

// Zero-pads to the next power of two per axis, input centered. Odd remainders
// put the extra row at the bottom and the extra column at the right.
inline Slice2D pad_to_pow2(const Slice2D& s) {
    if (s.height < 1 || s.width < 1) throw value_error("pad_to_pow2: empty slice");
    const int H = next_pow2(s.height);
    const int W = next_pow2(s.width);
    const int top = (H - s.height) / 2;
    const int left = (W - s.width) / 2;

    Slice2D out;
    out.kind = s.kind;
    out.height = H;
    out.width = W;
    out.source_id = s.source_id;
    out.axial_index = s.axial_index;
    out.pixels.assign(out.size(), 0);
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) out.at(top + y, left + x) = s.at(y, x);
    return out;
}

// Inverse of pad_to_pow2 given the original dimensions.
inline Slice2D crop_centered(const Slice2D& s, int orig_height, int orig_width) {
    if (orig_height < 1 || orig_width < 1 || orig_height > s.height || orig_width > s.width)
        throw shape_error("crop_centered: target dimensions do not fit inside the slice");
    const int top = (s.height - orig_height) / 2;
    const int left = (s.width - orig_width) / 2;

    Slice2D out;
    out.kind = s.kind;
    out.height = orig_height;
    out.width = orig_width;
    out.source_id = s.source_id;
    out.axial_index = s.axial_index;
    out.pixels.resize(out.size());
    for (int y = 0; y < orig_height; ++y)
        for (int x = 0; x < orig_width; ++x) out.at(y, x) = s.at(top + y, left + x);
    return out;
}

// ---------------------------------------------------------------------------
// PNG round trip
// ---------------------------------------------------------------------------

inline void write_png(const Slice2D& s, const std::filesystem::path& path) {
    validate_range(s);
    png::Gray img;
    img.width = s.width;
    img.height = s.height;
    img.bit_depth = s.kind == PixelKind::Mr16 ? 16 : 8;
    img.pixels = s.pixels;
    png::write_file(path, img);
}

// Parses "<source>_slice<k>" out of the stem when present so round-tripped
// slices keep their origin.
inline Slice2D read_png(const std::filesystem::path& path) {
    const png::Gray img = png::read_file(path);
    Slice2D s;
    s.kind = img.bit_depth == 16 ? PixelKind::Mr16 : PixelKind::Mask8;
    s.height = img.height;
    s.width = img.width;
    s.pixels = img.pixels;

    const std::string stem = path.stem().string();
    const std::size_t tag = stem.rfind("_slice");
    if (tag != std::string::npos && tag + 6 < stem.size() &&
        stem.find_first_not_of("0123456789", tag + 6) == std::string::npos) {
        s.source_id = stem.substr(0, tag);
        s.axial_index = std::stoi(stem.substr(tag + 6));
    } else {
        s.source_id = stem;
        s.axial_index = 0;
    }
    return s;
}

inline std::string slice_filename(const std::string& source_id, int axial_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_slice%04d.png", axial_index);
    return source_id + buf;
}

// ---------------------------------------------------------------------------
// Slice <-> mask conversions
// ---------------------------------------------------------------------------

inline LabelMask to_label_mask(const Slice2D& s) {
    if (s.kind != PixelKind::Mask8) throw value_error("to_label_mask: slice is not an 8-bit mask");
    LabelMask m(s.height, s.width);
    for (std::size_t i = 0; i < s.pixels.size(); ++i) {
        if (s.pixels[i] > 0xff)
            throw range_error("to_label_mask: value " + std::to_string(s.pixels[i]) + " exceeds 8-bit range");
        m.v[i] = static_cast<std::uint8_t>(s.pixels[i]);
    }
    return m;
}

inline Slice2D to_slice(const LabelMask& m, const std::string& source_id = {}, int axial_index = 0) {
    Slice2D s;
    s.kind = PixelKind::Mask8;
    s.height = m.height;
    s.width = m.width;
    s.source_id = source_id;
    s.axial_index = axial_index;
    s.pixels.assign(m.v.begin(), m.v.end());
    return s;
}

}  // namespace segsynth
