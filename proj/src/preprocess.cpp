#include "ctsev/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctsev/errors.hpp"
#include "ctsev/rng.hpp"

namespace ctsev {

void validate(const PrepConfig& cfg) {
    validate(cfg.target_spacing);
    validate(cfg.target_shape);
    if (!(cfg.hu_lo < cfg.hu_hi)) throw InvalidArgument("hu_lo must be below hu_hi");
    if (!(cfg.zscore_std > 0.0) || !std::isfinite(cfg.zscore_mean))
        throw InvalidArgument("zscore_std must be positive and zscore_mean finite");
}

Json to_json(const PrepConfig& cfg) {
    return Json{{"target_spacing", {cfg.target_spacing.dx, cfg.target_spacing.dy, cfg.target_spacing.dz}},
                {"hu_lo", cfg.hu_lo},
                {"hu_hi", cfg.hu_hi},
                {"target_shape", {cfg.target_shape.nz, cfg.target_shape.ny, cfg.target_shape.nx}},
                {"zscore_mean", cfg.zscore_mean},
                {"zscore_std", cfg.zscore_std},
                {"lung_masking", cfg.lung_masking}};
}

PrepConfig prep_config_from_json(const Json& j) {
    PrepConfig cfg;
    require_known_keys(j,
                       {"target_spacing", "hu_lo", "hu_hi", "target_shape", "zscore_mean", "zscore_std", "lung_masking"},
                       "preprocessing config");
    try {
        if (j.contains("target_spacing")) {
            auto s = j.at("target_spacing").get<std::vector<double>>();
            if (s.size() != 3) throw InvalidArgument("target_spacing needs 3 components (dx, dy, dz)");
            cfg.target_spacing = {s[0], s[1], s[2]};
        }
        if (j.contains("target_shape")) {
            auto s = j.at("target_shape").get<std::vector<int>>();
            if (s.size() != 3) throw InvalidArgument("target_shape needs 3 components (nz, ny, nx)");
            cfg.target_shape = {s[0], s[1], s[2]};
        }
        cfg.hu_lo = j.value("hu_lo", cfg.hu_lo);
        cfg.hu_hi = j.value("hu_hi", cfg.hu_hi);
        cfg.zscore_mean = j.value("zscore_mean", cfg.zscore_mean);
        cfg.zscore_std = j.value("zscore_std", cfg.zscore_std);
        cfg.lung_masking = j.value("lung_masking", cfg.lung_masking);
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("bad preprocessing config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

namespace {

template <typename Fn>
Volume map_values(const Volume& v, Unit unit, Fn&& fn) {
    std::vector<float> out(v.size());
    auto in = v.data();
    std::transform(in.begin(), in.end(), out.begin(), fn);
    return Volume(v.shape(), v.spacing(), unit, std::move(out));
}

void require_unit(const Volume& v, Unit expected, const char* op) {
    if (v.unit() != expected)
        throw ContractError(std::string(op) + " expects a " + std::string(to_string(expected)) + " volume, got " +
                            std::string(to_string(v.unit())));
}

/// Copies v into `target` with per-axis leading offsets (negative = padding).
Volume shift_window(const Volume& v, const Shape& target, const Index3& offset, float fill) {
    validate(target);
    const Shape& in = v.shape();
    std::vector<float> out(target.voxels(), fill);
    auto src = v.data();
    for (int z = 0; z < target.nz; ++z) {
        int sz = z + offset.z;
        if (sz < 0 || sz >= in.nz) continue;
        for (int y = 0; y < target.ny; ++y) {
            int sy = y + offset.y;
            if (sy < 0 || sy >= in.ny) continue;
            int x_begin = std::max(0, -offset.x);
            int x_end = std::min(target.nx, in.nx - offset.x);
            if (x_begin >= x_end) continue;
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(in.index(sz, sy, x_begin + offset.x)), x_end - x_begin,
                        out.begin() + static_cast<std::ptrdiff_t>(target.index(z, y, x_begin)));
        }
    }
    return Volume(target, v.spacing(), v.unit(), std::move(out));
}

int center_offset(int n, int t) { return n >= t ? (n - t) / 2 : -((t - n) / 2); }

} // namespace

Volume clip_hu(const Volume& v, double lo, double hi) {
    require_unit(v, Unit::HU, "clip_hu");
    if (!(lo < hi)) throw InvalidArgument("clip bounds must satisfy lo < hi");
    const auto flo = static_cast<float>(lo), fhi = static_cast<float>(hi);
    return map_values(v, Unit::HU, [=](float x) { return std::clamp(x, flo, fhi); });
}

Volume standardize_grayscale(const Volume& v, double lo, double hi) {
    require_unit(v, Unit::HU, "standardize_grayscale");
    if (!(lo < hi)) throw InvalidArgument("standardization bounds must satisfy lo < hi");
    auto [mn, mx] = std::minmax_element(v.data().begin(), v.data().end());
    if (*mn < lo || *mx > hi) throw ContractError("standardize_grayscale: values outside [lo, hi]; clip first");
    const double range = hi - lo;
    return map_values(v, Unit::Grayscale, [=](float x) {
        return std::clamp(static_cast<float>((static_cast<double>(x) - lo) / range), 0.0f, 1.0f);
    });
}

Volume zscore(const Volume& v, double mean, double std) {
    if (!(std > 0.0)) throw InvalidArgument("zscore std must be positive");
    require_unit(v, Unit::Grayscale, "zscore");
    return map_values(v, Unit::ZScored,
                      [=](float x) { return static_cast<float>((static_cast<double>(x) - mean) / std); });
}

std::pair<Volume, LabelMask> apply_lung_mask_and_crop(const Volume& v, const LabelMask& m, float fill) {
    if (v.shape() != m.shape()) throw InvalidArgument("volume and mask shapes differ");
    auto box = label_bounding_box(m, {Label::Lung, Label::Infection});
    if (!box) throw NoLungError("mask contains no lung voxels");
    std::vector<float> masked(v.data().begin(), v.data().end());
    auto labels = m.data();
    for (std::size_t i = 0; i < masked.size(); ++i)
        if (labels[i] == 0) masked[i] = fill;
    Volume out(v.shape(), v.spacing(), v.unit(), std::move(masked));
    return {crop(out, *box), crop(m, *box)};
}

Volume crop_or_pad_center(const Volume& v, const Shape& target, float fill) {
    const Shape& s = v.shape();
    return shift_window(v, target,
                        {center_offset(s.nz, target.nz), center_offset(s.ny, target.ny), center_offset(s.nx, target.nx)},
                        fill);
}

Index3 random_crop_offsets(const Shape& input, const Shape& target, std::uint64_t seed) {
    RngStream stream = Rng(seed).stream("crop");
    auto pick = [&](int n, int t) {
        if (n > t) return static_cast<int>(stream.uniform_int(0, n - t));
        return center_offset(n, t);
    };
    Index3 off;
    off.z = pick(input.nz, target.nz);
    off.y = pick(input.ny, target.ny);
    off.x = pick(input.nx, target.nx);
    return off;
}

Volume random_crop(const Volume& v, const Shape& target, std::uint64_t seed, float fill) {
    return shift_window(v, target, random_crop_offsets(v.shape(), target, seed), fill);
}

Volume preprocess(const Volume& v, const LabelMask* mask, const PrepConfig& cfg, const PrepMode& mode, int jobs) {
    validate(cfg);
    require_unit(v, Unit::HU, "preprocess");
    const Volume* current = &v;
    std::optional<Volume> cropped;
    if (cfg.lung_masking) {
        if (mask == nullptr) throw ContractError("preprocess: lung masking is enabled but no mask was given");
        cropped = apply_lung_mask_and_crop(v, *mask, kAirHU).first;
        current = &*cropped;
    }
    Volume work = resample_trilinear(*current, cfg.target_spacing, jobs);
    work = clip_hu(work, cfg.hu_lo, cfg.hu_hi);
    work = standardize_grayscale(work, cfg.hu_lo, cfg.hu_hi);
    if (mode.train) {
        work = random_crop(work, cfg.target_shape, mode.seed, 0.0f);
        if (mode.augment) work = augment_sample(work, *mode.augment, Rng(mode.seed).derive("augment"), jobs);
    } else {
        work = crop_or_pad_center(work, cfg.target_shape, 0.0f);
    }
    return zscore(work, cfg.zscore_mean, cfg.zscore_std);
}

} // namespace ctsev
