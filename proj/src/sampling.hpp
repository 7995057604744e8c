#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "ctsev/volume.hpp"

namespace ctsev::detail {

/// Two-tap linear interpolation stencil along one axis.
struct Tap {
    int i0 = 0;
    int i1 = 0;
    double w1 = 0.0; // weight of i1; i0 gets 1 - w1
};

/// Stencil for continuous index u clamped into [0, n-1].
inline Tap clamped_tap(double u, int n) {
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    double r = std::round(u);
    if (std::abs(u - r) < 1e-9) u = r;
    Tap t;
    t.i0 = static_cast<int>(std::floor(u));
    t.i1 = std::min(t.i0 + 1, n - 1);
    t.w1 = u - t.i0;
    if (t.i1 == t.i0) t.w1 = 0.0;
    return t;
}

/// Trilinear interpolation over clamped stencils. The result is clamped to
/// the range of the contributing corners, so it never leaves [min, max] of
/// the input.
inline float interpolate(std::span<const float> data, const Shape& s, const Tap& tz, const Tap& ty, const Tap& tx) {
    const int zs[2] = {tz.i0, tz.i1};
    const int ys[2] = {ty.i0, ty.i1};
    const int xs[2] = {tx.i0, tx.i1};
    const double wz[2] = {1.0 - tz.w1, tz.w1};
    const double wy[2] = {1.0 - ty.w1, ty.w1};
    const double wx[2] = {1.0 - tx.w1, tx.w1};
    double acc = 0.0;
    float lo = 0.0f, hi = 0.0f;
    bool any = false;
    for (int a = 0; a < 2; ++a) {
        if (wz[a] == 0.0) continue;
        for (int b = 0; b < 2; ++b) {
            if (wy[b] == 0.0) continue;
            for (int c = 0; c < 2; ++c) {
                if (wx[c] == 0.0) continue;
                float v = data[s.index(zs[a], ys[b], xs[c])];
                acc += wz[a] * wy[b] * wx[c] * static_cast<double>(v);
                if (!any) {
                    lo = hi = v;
                    any = true;
                } else {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
    }
    return std::clamp(static_cast<float>(acc), lo, hi);
}

/// Trilinear sample at continuous index (uz, uy, ux); corners outside the
/// grid read `fill`.
inline float sample_with_fill(std::span<const float> data, const Shape& s, double uz, double uy, double ux, float fill) {
    auto snap = [](double u) {
        double r = std::round(u);
        return std::abs(u - r) < 1e-9 ? r : u;
    };
    uz = snap(uz);
    uy = snap(uy);
    ux = snap(ux);
    const double fz = std::floor(uz), fy = std::floor(uy), fx = std::floor(ux);
    const int z0 = static_cast<int>(fz), y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
    const double wz[2] = {1.0 - (uz - fz), uz - fz};
    const double wy[2] = {1.0 - (uy - fy), uy - fy};
    const double wx[2] = {1.0 - (ux - fx), ux - fx};
    double acc = 0.0;
    float lo = 0.0f, hi = 0.0f;
    bool any = false;
    for (int a = 0; a < 2; ++a) {
        if (wz[a] == 0.0) continue;
        const int z = z0 + a;
        for (int b = 0; b < 2; ++b) {
            if (wy[b] == 0.0) continue;
            const int y = y0 + b;
            for (int c = 0; c < 2; ++c) {
                if (wx[c] == 0.0) continue;
                const int x = x0 + c;
                bool inside = z >= 0 && z < s.nz && y >= 0 && y < s.ny && x >= 0 && x < s.nx;
                float v = inside ? data[s.index(z, y, x)] : fill;
                acc += wz[a] * wy[b] * wx[c] * static_cast<double>(v);
                if (!any) {
                    lo = hi = v;
                    any = true;
                } else {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
    }
    return std::clamp(static_cast<float>(acc), lo, hi);
}

} // namespace ctsev::detail
