#pragma once

// NIFTI-1 reader for the subset this pipeline consumes: single-file .nii,
// 3D, datatypes uint8 / int16 / uint16 / float32, trivial scaling. Anything
// else is refused loudly rather than decoded approximately. Both byte orders
// are handled (the format carries no endian flag; sizeof_hdr == 348 is the
// customary probe).

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "segsynth/common.hpp"

namespace segsynth {

struct Volume {
    std::vector<std::uint16_t> data;  // x fastest, then y, then z
    int nx = 0, ny = 0, nz = 0;
    double dx = 1.0, dy = 1.0, dz = 1.0;  // voxel size in mm
    std::string source_id;

    std::uint16_t at(int x, int y, int z) const {
        return data[static_cast<std::size_t>(x) +
                    static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) +
                                                    static_cast<std::size_t>(ny) * static_cast<std::size_t>(z))];
    }
    std::uint16_t& at(int x, int y, int z) {
        return data[static_cast<std::size_t>(x) +
                    static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) +
                                                    static_cast<std::size_t>(ny) * static_cast<std::size_t>(z))];
    }
    std::size_t voxels() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
};

namespace nifti_detail {

// field offsets within the 348-byte NIFTI-1 header
inline constexpr std::size_t kHeaderSize = 348;
inline constexpr std::size_t kOffDim = 40;        // short dim[8]
inline constexpr std::size_t kOffDatatype = 70;   // short
inline constexpr std::size_t kOffBitpix = 72;     // short
inline constexpr std::size_t kOffPixdim = 76;     // float pixdim[8]
inline constexpr std::size_t kOffVoxOffset = 108; // float
inline constexpr std::size_t kOffSclSlope = 112;  // float
inline constexpr std::size_t kOffSclInter = 116;  // float
inline constexpr std::size_t kOffMagic = 344;     // char[4]

enum Datatype : std::int16_t {
    DT_UINT8 = 2,
    DT_INT16 = 4,
    DT_FLOAT32 = 16,
    DT_UINT16 = 512,
};

template <class T>
T load(const std::uint8_t* p, bool swap) {
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, p, sizeof(T));
    if (swap) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace nifti_detail

inline Volume read_nifti(const std::filesystem::path& path) {
    namespace nd = nifti_detail;

    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("nifti: cannot open: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < nd::kHeaderSize)
        throw parse_error("nifti: file shorter than the 348-byte header (" + std::to_string(bytes.size()) +
                          " bytes): " + path.string());

    bool swap = false;
    std::int32_t sizeof_hdr = nd::load<std::int32_t>(bytes.data(), false);
    if (sizeof_hdr != 348) {
        swap = true;
        sizeof_hdr = nd::load<std::int32_t>(bytes.data(), true);
        if (sizeof_hdr != 348)
            throw parse_error("nifti: bad sizeof_hdr at byte 0 (not 348 in either byte order)");
    }

    const char* magic = reinterpret_cast<const char*>(bytes.data() + nd::kOffMagic);
    if (std::memcmp(magic, "n+1", 4) != 0) {
        if (std::memcmp(magic, "ni1", 4) == 0)
            throw format_error("nifti: two-file .hdr/.img pairs not supported: " + path.string());
        throw parse_error("nifti: bad magic at byte 344");
    }

    std::int16_t dim[8];
    for (int i = 0; i < 8; ++i)
        dim[i] = nd::load<std::int16_t>(bytes.data() + nd::kOffDim + 2 * static_cast<std::size_t>(i), swap);
    if (dim[0] < 1 || dim[0] > 7)
        throw parse_error("nifti: dim[0] out of range at byte 40: " + std::to_string(dim[0]));
    for (int i = 4; i <= dim[0]; ++i)
        if (dim[i] > 1)
            throw format_error("nifti: only 3D volumes supported, dim[" + std::to_string(i) + "] = " +
                               std::to_string(dim[i]));
    const int nx = dim[1];
    const int ny = dim[0] >= 2 ? dim[2] : 1;
    const int nz = dim[0] >= 3 ? dim[3] : 1;
    if (nx < 1 || ny < 1 || nz < 1) throw parse_error("nifti: non-positive dimensions at byte 40");

    const std::int16_t datatype = nd::load<std::int16_t>(bytes.data() + nd::kOffDatatype, swap);
    const std::int16_t bitpix = nd::load<std::int16_t>(bytes.data() + nd::kOffBitpix, swap);

    const float slope = nd::load<float>(bytes.data() + nd::kOffSclSlope, swap);
    const float inter = nd::load<float>(bytes.data() + nd::kOffSclInter, swap);
    const bool trivial_scale = (slope == 0.0f || slope == 1.0f) && inter == 0.0f;
    if (!(trivial_scale || (std::isnan(slope) && std::isnan(inter))))
        throw format_error("nifti: non-trivial scl_slope/scl_inter (" + std::to_string(slope) + ", " +
                           std::to_string(inter) + ") not supported");

    const float vox_offset_f = nd::load<float>(bytes.data() + nd::kOffVoxOffset, swap);
    if (!(vox_offset_f >= 348.0f) || vox_offset_f != std::floor(vox_offset_f))
        throw parse_error("nifti: bad vox_offset at byte 108");
    const std::size_t data_at = static_cast<std::size_t>(vox_offset_f);

    Volume vol;
    vol.nx = nx;
    vol.ny = ny;
    vol.nz = nz;
    vol.dx = nd::load<float>(bytes.data() + nd::kOffPixdim + 4, swap);
    vol.dy = nd::load<float>(bytes.data() + nd::kOffPixdim + 8, swap);
    vol.dz = nd::load<float>(bytes.data() + nd::kOffPixdim + 12, swap);
    vol.source_id = path.stem().string();

    const std::size_t n = vol.voxels();
    std::size_t elem_size = 0;
    switch (datatype) {
        case nd::DT_UINT8: elem_size = 1; break;
        case nd::DT_INT16: elem_size = 2; break;
        case nd::DT_UINT16: elem_size = 2; break;
        case nd::DT_FLOAT32: elem_size = 4; break;
        default:
            throw format_error("nifti: unsupported datatype code " + std::to_string(datatype));
    }
    if (bitpix != static_cast<std::int16_t>(elem_size * 8))
        throw parse_error("nifti: bitpix " + std::to_string(bitpix) + " inconsistent with datatype " +
                          std::to_string(datatype));
    if (data_at + n * elem_size > bytes.size())
        throw parse_error("nifti: data truncated, need " + std::to_string(n * elem_size) + " bytes at offset " +
                          std::to_string(data_at));

    vol.data.resize(n);
    const std::uint8_t* src = bytes.data() + data_at;
    switch (datatype) {
        case nd::DT_UINT8:
            for (std::size_t i = 0; i < n; ++i) vol.data[i] = src[i];
            break;
        case nd::DT_UINT16:
            for (std::size_t i = 0; i < n; ++i) vol.data[i] = nd::load<std::uint16_t>(src + 2 * i, swap);
            break;
        case nd::DT_INT16:
            for (std::size_t i = 0; i < n; ++i) {
                const std::int16_t v = nd::load<std::int16_t>(src + 2 * i, swap);
                if (v < 0)
                    throw range_error("nifti: negative voxel value " + std::to_string(v) +
                                      " cannot be represented losslessly in " + path.string());
                vol.data[i] = static_cast<std::uint16_t>(v);
            }
            break;
        case nd::DT_FLOAT32:
            for (std::size_t i = 0; i < n; ++i) {
                const float v = nd::load<float>(src + 4 * i, swap);
                if (!(v >= 0.0f && v <= 65535.0f) || v != std::floor(v))
                    throw range_error("nifti: float voxel " + std::to_string(v) +
                                      " is not an exact unsigned 16-bit integer; refusing lossy decode of " +
                                      path.string());
                vol.data[i] = static_cast<std::uint16_t>(v);
            }
            break;
        default: break;  // unreachable
    }
    return vol;
}

}  // namespace segsynth
