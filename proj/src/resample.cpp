#include <cmath>
#include <vector>

#include "ctsev/parallel.hpp"
#include "ctsev/preprocess.hpp"
#include "sampling.hpp"

namespace ctsev {

namespace {

int resampled_extent(int n, double source, double target) {
    // std::lround rounds halves away from zero.
    return std::max(1, static_cast<int>(std::lround(static_cast<double>(n) * source / target)));
}

Shape resampled_shape(const Shape& s, const Spacing& from, const Spacing& to) {
    return {resampled_extent(s.nz, from.dz, to.dz), resampled_extent(s.ny, from.dy, to.dy),
            resampled_extent(s.nx, from.dx, to.dx)};
}

/// Source continuous index for each output voxel center along one axis.
std::vector<detail::Tap> axis_taps(int n_out, int n_in, double source, double target) {
    const double ratio = target / source;
    std::vector<detail::Tap> taps(static_cast<std::size_t>(n_out));
    for (int i = 0; i < n_out; ++i) taps[static_cast<std::size_t>(i)] = detail::clamped_tap((i + 0.5) * ratio - 0.5, n_in);
    return taps;
}

} // namespace

Volume resample_trilinear(const Volume& v, const Spacing& target, int jobs) {
    validate(target);
    const Shape& in = v.shape();
    const Spacing& src = v.spacing();
    const Shape out = resampled_shape(in, src, target);

    const auto tz = axis_taps(out.nz, in.nz, src.dz, target.dz);
    const auto ty = axis_taps(out.ny, in.ny, src.dy, target.dy);
    const auto tx = axis_taps(out.nx, in.nx, src.dx, target.dx);

    std::vector<float> data(out.voxels());
    auto src_data = v.data();
    parallel_for(static_cast<std::size_t>(out.nz), jobs, [&](std::size_t z0, std::size_t z1) {
        for (std::size_t z = z0; z < z1; ++z) {
            for (int y = 0; y < out.ny; ++y) {
                float* row = data.data() + out.index(static_cast<int>(z), y, 0);
                for (int x = 0; x < out.nx; ++x)
                    row[x] = detail::interpolate(src_data, in, tz[z], ty[static_cast<std::size_t>(y)],
                                                 tx[static_cast<std::size_t>(x)]);
            }
        }
    });
    return Volume(out, target, v.unit(), std::move(data));
}

LabelMask resample_nearest(const LabelMask& m, const Spacing& target) {
    validate(target);
    const Shape& in = m.shape();
    const Spacing& src = m.spacing();
    const Shape out = resampled_shape(in, src, target);

    auto nearest = [](int n_out, int n_in, double source, double tgt) {
        std::vector<int> idx(static_cast<std::size_t>(n_out));
        const double ratio = tgt / source;
        for (int i = 0; i < n_out; ++i) {
            double u = std::clamp((i + 0.5) * ratio - 0.5, 0.0, static_cast<double>(n_in - 1));
            idx[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(u));
        }
        return idx;
    };
    const auto iz = nearest(out.nz, in.nz, src.dz, target.dz);
    const auto iy = nearest(out.ny, in.ny, src.dy, target.dy);
    const auto ix = nearest(out.nx, in.nx, src.dx, target.dx);

    std::vector<std::uint8_t> labels(out.voxels());
    auto src_data = m.data();
    std::size_t i = 0;
    for (int z = 0; z < out.nz; ++z)
        for (int y = 0; y < out.ny; ++y)
            for (int x = 0; x < out.nx; ++x, ++i)
                labels[i] = src_data[in.index(iz[static_cast<std::size_t>(z)], iy[static_cast<std::size_t>(y)],
                                              ix[static_cast<std::size_t>(x)])];
    return LabelMask(out, target, std::move(labels));
}

} // namespace ctsev
