#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ctsev {

/// Millimeters per voxel along x, y, z.
struct Spacing {
    double dx = 1.0;
    double dy = 1.0;
    double dz = 1.0;

    bool operator==(const Spacing&) const = default;
};

/// Throws InvalidArgument unless every component is finite and > 0.
void validate(const Spacing& s);

/// Grid extent, stored z-major: index = (z * ny + y) * nx + x.
struct Shape {
    int nz = 1;
    int ny = 1;
    int nx = 1;

    std::size_t voxels() const {
        return static_cast<std::size_t>(nz) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nx);
    }
    std::size_t index(int z, int y, int x) const {
        return (static_cast<std::size_t>(z) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)) *
                   static_cast<std::size_t>(nx) +
               static_cast<std::size_t>(x);
    }
    bool operator==(const Shape&) const = default;
};

void validate(const Shape& s);

struct Index3 {
    int z = 0;
    int y = 0;
    int x = 0;
    bool operator==(const Index3&) const = default;
};

enum class Unit : std::uint8_t { HU, Grayscale, ZScored };

std::string_view to_string(Unit u);
/// Inverse of to_string; throws InvalidArgument on unknown names.
Unit unit_from_string(std::string_view name);

/// Dense scalar volume. Values are float32; reductions over it use double.
class Volume {
  public:
    /// Validates shape/spacing, data length, finiteness and (for grayscale)
    /// the [0, 1] range.
    Volume(Shape shape, Spacing spacing, Unit unit, std::vector<float> data);

    const Shape& shape() const { return shape_; }
    const Spacing& spacing() const { return spacing_; }
    Unit unit() const { return unit_; }
    std::span<const float> data() const { return data_; }
    std::size_t size() const { return data_.size(); }

    float at(int z, int y, int x) const { return data_[shape_.index(z, y, x)]; }
    float operator[](std::size_t i) const { return data_[i]; }

    bool operator==(const Volume&) const = default;

  private:
    Shape shape_;
    Spacing spacing_;
    Unit unit_;
    std::vector<float> data_;
};

/// Constant volume tagged HU.
Volume new_volume(Shape shape, Spacing spacing, float fill);

enum class Label : std::uint8_t { Background = 0, Lung = 1, Infection = 2 };

/// 0 = background, 1 = healthy lung, 2 = infection. Infection voxels are not
/// also counted as lung.
class LabelMask {
  public:
    LabelMask(Shape shape, Spacing spacing, std::vector<std::uint8_t> labels);

    const Shape& shape() const { return shape_; }
    const Spacing& spacing() const { return spacing_; }
    std::span<const std::uint8_t> data() const { return data_; }
    std::size_t size() const { return data_.size(); }
    std::uint8_t at(int z, int y, int x) const { return data_[shape_.index(z, y, x)]; }

    bool operator==(const LabelMask&) const = default;

  private:
    Shape shape_;
    Spacing spacing_;
    std::vector<std::uint8_t> data_;
};

struct LabelCounts {
    std::size_t background = 0;
    std::size_t lung = 0;
    std::size_t infection = 0;

    std::size_t total() const { return background + lung + infection; }
    bool operator==(const LabelCounts&) const = default;
};

LabelCounts count_labels(const LabelMask& mask);

/// Inclusive voxel box, lo <= hi componentwise.
struct BoundingBox {
    Index3 lo;
    Index3 hi;

    Shape shape() const { return {hi.z - lo.z + 1, hi.y - lo.y + 1, hi.x - lo.x + 1}; }
    bool contains(const Index3& p) const {
        return p.z >= lo.z && p.z <= hi.z && p.y >= lo.y && p.y <= hi.y && p.x >= lo.x && p.x <= hi.x;
    }
    bool operator==(const BoundingBox&) const = default;
};

/// Tightest box around voxels whose label is in `labels`; nullopt when none match.
std::optional<BoundingBox> label_bounding_box(const LabelMask& mask, std::initializer_list<Label> labels);

/// Sub-volume copy. The box must lie inside the shape.
Volume crop(const Volume& v, const BoundingBox& box);
LabelMask crop(const LabelMask& m, const BoundingBox& box);

} // namespace ctsev
