#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "ctsev/augment.hpp"
#include "ctsev/canonical_json.hpp"
#include "ctsev/volume.hpp"

namespace ctsev {

/// Target grid after resampling, in mm.
inline constexpr Spacing kTargetSpacing{1.48, 1.48, 2.10};
/// Network input size as (nz, ny, nx).
inline constexpr Shape kTargetShape{148, 224, 224};
inline constexpr float kAirHU = -1024.0f;

struct PrepConfig {
    Spacing target_spacing = kTargetSpacing;
    double hu_lo = -1024.0;
    double hu_hi = 100.0;
    Shape target_shape = kTargetShape;
    /// Single-channel reduction of the ImageNet per-channel statistics.
    double zscore_mean = 0.449;
    double zscore_std = 0.226;
    /// Lung mask + minimal crop before resampling (presence classifier).
    bool lung_masking = false;
};

void validate(const PrepConfig& cfg);
Json to_json(const PrepConfig& cfg);
PrepConfig prep_config_from_json(const Json& j);

/// Output extent per axis is max(1, round(n * s / t)). Voxel centers sit at
/// (i + 0.5) * spacing; positions outside the source clamp to the edge.
Volume resample_trilinear(const Volume& v, const Spacing& target, int jobs = 1);

/// Nearest-neighbor counterpart for label masks, on the same output grid.
LabelMask resample_nearest(const LabelMask& m, const Spacing& target);

Volume clip_hu(const Volume& v, double lo, double hi);

/// (x - lo) / (hi - lo); requires values already in [lo, hi].
Volume standardize_grayscale(const Volume& v, double lo, double hi);

Volume zscore(const Volume& v, double mean, double std);

/// Background voxels become `fill`; both outputs are cropped to the box
/// around labels {lung, infection}. Throws NoLungError when there is none.
std::pair<Volume, LabelMask> apply_lung_mask_and_crop(const Volume& v, const LabelMask& m, float fill = kAirHU);

/// Oversized axes drop floor((n-t)/2) leading voxels, undersized axes get
/// floor((t-n)/2) leading fill voxels; remainders go to the trailing side.
Volume crop_or_pad_center(const Volume& v, const Shape& target, float fill);

/// Like crop_or_pad_center, but each oversized axis draws its leading offset
/// uniformly from [0, n-t] (order z, y, x) from the "crop" stream of `seed`.
Volume random_crop(const Volume& v, const Shape& target, std::uint64_t seed, float fill = 0.0f);

/// Leading offsets random_crop would use for this input and seed; negative
/// values denote leading padding.
Index3 random_crop_offsets(const Shape& input, const Shape& target, std::uint64_t seed);

struct PrepMode {
    bool train = false;
    std::uint64_t seed = 0;
    std::optional<AugmentConfig> augment;

    static PrepMode inference() { return {}; }
    static PrepMode training(std::uint64_t seed, std::optional<AugmentConfig> augment = std::nullopt) {
        return {true, seed, std::move(augment)};
    }
};

/// Full chain: [lung mask + crop] -> resample -> clip -> standardize ->
/// crop/pad (random when training, centered otherwise) -> [augment, training
/// only] -> zscore. The mask is only read when cfg.lung_masking is set.
Volume preprocess(const Volume& v, const LabelMask* mask, const PrepConfig& cfg, const PrepMode& mode, int jobs = 1);

} // namespace ctsev
