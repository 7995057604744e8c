#include "ctsev/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctsev/errors.hpp"

namespace ctsev {

void validate(const Spacing& s) {
    for (double c : {s.dx, s.dy, s.dz}) {
        if (!std::isfinite(c) || c <= 0.0)
            throw InvalidArgument("spacing components must be finite and positive");
    }
}

void validate(const Shape& s) {
    if (s.nz < 1 || s.ny < 1 || s.nx < 1)
        throw InvalidArgument("shape components must be >= 1, got (" + std::to_string(s.nz) + "," +
                              std::to_string(s.ny) + "," + std::to_string(s.nx) + ")");
}

std::string_view to_string(Unit u) {
    switch (u) {
    case Unit::HU: return "HU";
    case Unit::Grayscale: return "grayscale";
    case Unit::ZScored: return "zscored";
    }
    return "HU";
}

Unit unit_from_string(std::string_view name) {
    if (name == "HU") return Unit::HU;
    if (name == "grayscale") return Unit::Grayscale;
    if (name == "zscored") return Unit::ZScored;
    throw InvalidArgument("unknown unit tag '" + std::string(name) + "'");
}

Volume::Volume(Shape shape, Spacing spacing, Unit unit, std::vector<float> data)
    : shape_(shape), spacing_(spacing), unit_(unit), data_(std::move(data)) {
    validate(shape_);
    validate(spacing_);
    if (data_.size() != shape_.voxels())
        throw InvalidArgument("volume data length " + std::to_string(data_.size()) + " does not match shape (" +
                              std::to_string(shape_.voxels()) + " voxels)");
    for (float v : data_) {
        if (!std::isfinite(v)) throw InvalidArgument("volume contains non-finite values");
    }
    if (unit_ == Unit::Grayscale) {
        auto [lo, hi] = std::minmax_element(data_.begin(), data_.end());
        if (*lo < 0.0f || *hi > 1.0f) throw InvalidArgument("grayscale volume values must lie in [0, 1]");
    }
}

Volume new_volume(Shape shape, Spacing spacing, float fill) {
    validate(shape);
    return Volume(shape, spacing, Unit::HU, std::vector<float>(shape.voxels(), fill));
}

LabelMask::LabelMask(Shape shape, Spacing spacing, std::vector<std::uint8_t> labels)
    : shape_(shape), spacing_(spacing), data_(std::move(labels)) {
    validate(shape_);
    validate(spacing_);
    if (data_.size() != shape_.voxels())
        throw InvalidArgument("mask data length " + std::to_string(data_.size()) + " does not match shape");
    for (auto l : data_) {
        if (l > 2) throw InvalidArgument("mask label " + std::to_string(l) + " outside {0,1,2}");
    }
}

LabelCounts count_labels(const LabelMask& mask) {
    std::size_t hist[3] = {0, 0, 0};
    for (auto l : mask.data()) ++hist[l];
    return {hist[0], hist[1], hist[2]};
}

std::optional<BoundingBox> label_bounding_box(const LabelMask& mask, std::initializer_list<Label> labels) {
    bool wanted[3] = {false, false, false};
    for (Label l : labels) wanted[static_cast<std::uint8_t>(l)] = true;

    const Shape& s = mask.shape();
    Index3 lo{s.nz, s.ny, s.nx};
    Index3 hi{-1, -1, -1};
    auto data = mask.data();
    std::size_t i = 0;
    for (int z = 0; z < s.nz; ++z) {
        for (int y = 0; y < s.ny; ++y) {
            for (int x = 0; x < s.nx; ++x, ++i) {
                if (!wanted[data[i]]) continue;
                lo = {std::min(lo.z, z), std::min(lo.y, y), std::min(lo.x, x)};
                hi = {std::max(hi.z, z), std::max(hi.y, y), std::max(hi.x, x)};
            }
        }
    }
    if (hi.z < 0) return std::nullopt;
    return BoundingBox{lo, hi};
}

namespace {

template <typename T>
std::vector<T> crop_data(std::span<const T> src, const Shape& s, const BoundingBox& box) {
    if (box.lo.z < 0 || box.lo.y < 0 || box.lo.x < 0 || box.hi.z >= s.nz || box.hi.y >= s.ny || box.hi.x >= s.nx ||
        box.lo.z > box.hi.z || box.lo.y > box.hi.y || box.lo.x > box.hi.x)
        throw InvalidArgument("crop box outside volume");
    Shape out = box.shape();
    std::vector<T> dst;
    dst.reserve(out.voxels());
    for (int z = box.lo.z; z <= box.hi.z; ++z) {
        for (int y = box.lo.y; y <= box.hi.y; ++y) {
            auto row = src.begin() + static_cast<std::ptrdiff_t>(s.index(z, y, box.lo.x));
            dst.insert(dst.end(), row, row + out.nx);
        }
    }
    return dst;
}

} // namespace

Volume crop(const Volume& v, const BoundingBox& box) {
    return Volume(box.shape(), v.spacing(), v.unit(), crop_data(v.data(), v.shape(), box));
}

LabelMask crop(const LabelMask& m, const BoundingBox& box) {
    return LabelMask(box.shape(), m.spacing(), crop_data(m.data(), m.shape(), box));
}

} // namespace ctsev
