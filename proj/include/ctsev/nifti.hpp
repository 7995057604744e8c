#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <variant>

#include "ctsev/volume.hpp"

namespace ctsev {

/// qform/sform fields of a NIfTI-1 header. Carried through a read/write cycle
/// untouched; axis order is always taken as stored.
struct NiftiOrientation {
    std::int16_t qform_code = 0;
    std::int16_t sform_code = 0;
    float qfac = 1.0f;
    float quatern_b = 0.0f;
    float quatern_c = 0.0f;
    float quatern_d = 0.0f;
    float qoffset_x = 0.0f;
    float qoffset_y = 0.0f;
    float qoffset_z = 0.0f;
    std::array<float, 4> srow_x{};
    std::array<float, 4> srow_y{};
    std::array<float, 4> srow_z{};

    bool operator==(const NiftiOrientation&) const = default;
};

/// int16 and float32 payloads decode to a Volume (HU unless the description
/// field names another unit); uint8 payloads decode to a LabelMask.
struct NiftiImage {
    std::variant<Volume, LabelMask> image;
    NiftiOrientation orientation;
};

/// Reads a single-file NIfTI-1 image (".nii" or gzip-compressed ".nii.gz").
/// Throws FormatError (path + byte offset) on bad magic, unsupported datatype
/// or a truncated payload; IoError if the file cannot be opened.
NiftiImage read_nifti(const std::filesystem::path& path);

Volume read_nifti_volume(const std::filesystem::path& path);
LabelMask read_nifti_mask(const std::filesystem::path& path);

/// Volumes are written as float32, masks as uint8. A ".gz" suffix selects
/// gzip compression.
void write_nifti(const Volume& v, const std::filesystem::path& path, const NiftiOrientation& orientation = {});
void write_nifti(const LabelMask& m, const std::filesystem::path& path, const NiftiOrientation& orientation = {});

} // namespace ctsev
