#include "ctsev/augment.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ctsev/errors.hpp"
#include "ctsev/parallel.hpp"
#include "sampling.hpp"

namespace ctsev {

void validate(const AugmentConfig& cfg) {
    for (double p : {cfg.p_flip, cfg.p_rotate, cfg.p_scale, cfg.p_elastic, cfg.p_gamma}) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("augmentation probabilities must lie in [0, 1]");
    }
    if (!(cfg.rotation_max_deg >= 0.0)) throw InvalidArgument("rotation_max_deg must be >= 0");
    if (!(cfg.scale_lo > 0.0 && cfg.scale_lo <= cfg.scale_hi)) throw InvalidArgument("scale range must be 0 < lo <= hi");
    if (!(cfg.gamma_lo > 0.0 && cfg.gamma_lo <= cfg.gamma_hi)) throw InvalidArgument("gamma range must be 0 < lo <= hi");
    if (cfg.elastic.grid < 2) throw InvalidArgument("elastic grid must have >= 2 control points per axis");
    if (!(cfg.elastic.sigma_mm >= 0.0)) throw InvalidArgument("elastic sigma_mm must be >= 0");
}

namespace {

std::string axis_name(Axis a) { return a == Axis::X ? "x" : a == Axis::Y ? "y" : "z"; }

Axis axis_from_name(const std::string& s) {
    if (s == "x") return Axis::X;
    if (s == "y") return Axis::Y;
    if (s == "z") return Axis::Z;
    throw InvalidArgument("unknown axis '" + s + "'");
}

} // namespace

Json to_json(const AugmentConfig& cfg) {
    Json axes = Json::array();
    for (Axis a : cfg.flip_axes) axes.push_back(axis_name(a));
    return Json{{"p_flip", cfg.p_flip},
                {"p_rotate", cfg.p_rotate},
                {"p_scale", cfg.p_scale},
                {"p_elastic", cfg.p_elastic},
                {"p_gamma", cfg.p_gamma},
                {"rotation_max_deg", cfg.rotation_max_deg},
                {"scale_range", {cfg.scale_lo, cfg.scale_hi}},
                {"gamma_range", {cfg.gamma_lo, cfg.gamma_hi}},
                {"flip_axes", axes},
                {"elastic", {{"grid", cfg.elastic.grid}, {"sigma_mm", cfg.elastic.sigma_mm}}}};
}

AugmentConfig augment_config_from_json(const Json& j) {
    AugmentConfig cfg;
    require_known_keys(j,
                       {"p_flip", "p_rotate", "p_scale", "p_elastic", "p_gamma", "rotation_max_deg", "scale_range",
                        "gamma_range", "flip_axes", "elastic"},
                       "augmentation config");
    if (j.contains("elastic")) require_known_keys(j.at("elastic"), {"grid", "sigma_mm"}, "elastic config");
    try {
        cfg.p_flip = j.value("p_flip", cfg.p_flip);
        cfg.p_rotate = j.value("p_rotate", cfg.p_rotate);
        cfg.p_scale = j.value("p_scale", cfg.p_scale);
        cfg.p_elastic = j.value("p_elastic", cfg.p_elastic);
        cfg.p_gamma = j.value("p_gamma", cfg.p_gamma);
        cfg.rotation_max_deg = j.value("rotation_max_deg", cfg.rotation_max_deg);
        if (j.contains("scale_range")) {
            auto r = j.at("scale_range").get<std::vector<double>>();
            if (r.size() != 2) throw InvalidArgument("scale_range needs two bounds");
            cfg.scale_lo = r[0];
            cfg.scale_hi = r[1];
        }
        if (j.contains("gamma_range")) {
            auto r = j.at("gamma_range").get<std::vector<double>>();
            if (r.size() != 2) throw InvalidArgument("gamma_range needs two bounds");
            cfg.gamma_lo = r[0];
            cfg.gamma_hi = r[1];
        }
        if (j.contains("flip_axes")) {
            cfg.flip_axes.clear();
            for (const auto& a : j.at("flip_axes")) cfg.flip_axes.push_back(axis_from_name(a.get<std::string>()));
        }
        if (j.contains("elastic")) {
            const auto& e = j.at("elastic");
            cfg.elastic.grid = e.value("grid", cfg.elastic.grid);
            cfg.elastic.sigma_mm = e.value("sigma_mm", cfg.elastic.sigma_mm);
        }
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("bad augmentation config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

namespace {

/// Output voxel (z, y, x) reads the input at map(z, y, x) in continuous
/// index coordinates.
template <typename Map>
Volume warp(const Volume& v, float fill, int jobs, Map&& map) {
    const Shape& s = v.shape();
    std::vector<float> out(s.voxels());
    auto src = v.data();
    parallel_for(static_cast<std::size_t>(s.nz), jobs, [&](std::size_t z0, std::size_t z1) {
        for (std::size_t zz = z0; zz < z1; ++zz) {
            const int z = static_cast<int>(zz);
            for (int y = 0; y < s.ny; ++y) {
                for (int x = 0; x < s.nx; ++x) {
                    auto [uz, uy, ux] = map(z, y, x);
                    out[s.index(z, y, x)] = detail::sample_with_fill(src, s, uz, uy, ux, fill);
                }
            }
        }
    });
    return Volume(s, v.spacing(), v.unit(), std::move(out));
}

} // namespace

Volume rotate_axial(const Volume& v, double angle_deg, float fill, int jobs) {
    if (angle_deg == 0.0) return v;
    const Shape& s = v.shape();
    const Spacing& sp = v.spacing();
    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta), sn = std::sin(theta);
    const double half_x = 0.5 * s.nx, half_y = 0.5 * s.ny;
    return warp(v, fill, jobs, [=](int z, int y, int x) {
        // Physical offset from the center, rotated by -theta to find the source.
        const double px = (x + 0.5 - half_x) * sp.dx;
        const double py = (y + 0.5 - half_y) * sp.dy;
        const double qx = c * px + sn * py;
        const double qy = -sn * px + c * py;
        return std::array<double, 3>{static_cast<double>(z), qy / sp.dy + half_y - 0.5, qx / sp.dx + half_x - 0.5};
    });
}

Volume flip(const Volume& v, Axis axis) {
    const Shape& s = v.shape();
    std::vector<float> out(s.voxels());
    auto src = v.data();
    for (int z = 0; z < s.nz; ++z) {
        for (int y = 0; y < s.ny; ++y) {
            for (int x = 0; x < s.nx; ++x) {
                int sz = axis == Axis::Z ? s.nz - 1 - z : z;
                int sy = axis == Axis::Y ? s.ny - 1 - y : y;
                int sx = axis == Axis::X ? s.nx - 1 - x : x;
                out[s.index(z, y, x)] = src[s.index(sz, sy, sx)];
            }
        }
    }
    return Volume(s, v.spacing(), v.unit(), std::move(out));
}

Volume scale(const Volume& v, double factor, float fill, int jobs) {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidArgument("scale factor must be positive");
    if (factor == 1.0) return v;
    const Shape& s = v.shape();
    const double hz = 0.5 * s.nz, hy = 0.5 * s.ny, hx = 0.5 * s.nx;
    const double inv = 1.0 / factor;
    return warp(v, fill, jobs, [=](int z, int y, int x) {
        return std::array<double, 3>{(z + 0.5 - hz) * inv + hz - 0.5, (y + 0.5 - hy) * inv + hy - 0.5,
                                     (x + 0.5 - hx) * inv + hx - 0.5};
    });
}

Volume gamma(const Volume& v, double g) {
    if (v.unit() != Unit::Grayscale) throw ContractError("gamma requires a grayscale volume");
    if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("gamma exponent must be positive");
    if (g == 1.0) return v;
    std::vector<float> out(v.size());
    auto src = v.data();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(static_cast<float>(std::pow(static_cast<double>(src[i]), g)), 0.0f, 1.0f);
    return Volume(v.shape(), v.spacing(), v.unit(), std::move(out));
}

DisplacementLattice::DisplacementLattice(int grid, double sigma_mm, RngStream& stream) : grid_(grid) {
    if (grid < 2) throw InvalidArgument("elastic grid must have >= 2 control points per axis");
    if (!(sigma_mm >= 0.0)) throw InvalidArgument("elastic sigma_mm must be >= 0");
    nodes_.resize(static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid));
    for (auto& node : nodes_)
        for (auto& c : node) c = stream.uniform(-sigma_mm, sigma_mm);
}

std::array<double, 3> DisplacementLattice::at(double gz, double gy, double gx) const {
    const Shape lattice{grid_, grid_, grid_};
    auto tz = detail::clamped_tap(gz, grid_);
    auto ty = detail::clamped_tap(gy, grid_);
    auto tx = detail::clamped_tap(gx, grid_);
    std::array<double, 3> d{0.0, 0.0, 0.0};
    const int zs[2] = {tz.i0, tz.i1}, ys[2] = {ty.i0, ty.i1}, xs[2] = {tx.i0, tx.i1};
    const double wz[2] = {1.0 - tz.w1, tz.w1}, wy[2] = {1.0 - ty.w1, ty.w1}, wx[2] = {1.0 - tx.w1, tx.w1};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                const double w = wz[a] * wy[b] * wx[c];
                if (w == 0.0) continue;
                const auto& node = nodes_[lattice.index(zs[a], ys[b], xs[c])];
                for (int k = 0; k < 3; ++k) d[static_cast<std::size_t>(k)] += w * node[static_cast<std::size_t>(k)];
            }
    return d;
}

std::array<double, 3> DisplacementLattice::voxel_displacement(const Shape& shape, const Spacing& spacing, int z, int y,
                                                              int x) const {
    auto lattice_coord = [this](int i, int n) { return n > 1 ? static_cast<double>(i) * (grid_ - 1) / (n - 1) : 0.0; };
    auto mm = at(lattice_coord(z, shape.nz), lattice_coord(y, shape.ny), lattice_coord(x, shape.nx));
    return {mm[0] / spacing.dz, mm[1] / spacing.dy, mm[2] / spacing.dx};
}

Volume elastic_deform(const Volume& v, const ElasticConfig& cfg, RngStream& stream, float fill, int jobs) {
    DisplacementLattice lattice(cfg.grid, cfg.sigma_mm, stream);
    if (cfg.sigma_mm == 0.0) return v;
    const Shape& s = v.shape();
    const Spacing& sp = v.spacing();
    return warp(v, fill, jobs, [&](int z, int y, int x) {
        auto d = lattice.voxel_displacement(s, sp, z, y, x);
        return std::array<double, 3>{z - d[0], y - d[1], x - d[2]};
    });
}

Volume augment_sample(const Volume& v, const AugmentConfig& cfg, const Rng& rng, int jobs) {
    validate(cfg);
    Volume out = v;

    RngStream flip_stream = rng.stream("flip");
    if (flip_stream.bernoulli(cfg.p_flip)) {
        for (Axis a : cfg.flip_axes) out = flip(out, a);
    }

    RngStream rotate_stream = rng.stream("rotate");
    if (rotate_stream.bernoulli(cfg.p_rotate)) {
        double angle = rotate_stream.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
        out = rotate_axial(out, angle, 0.0f, jobs);
    }

    RngStream scale_stream = rng.stream("scale");
    if (scale_stream.bernoulli(cfg.p_scale)) {
        double factor = scale_stream.uniform(cfg.scale_lo, cfg.scale_hi);
        out = scale(out, factor, 0.0f, jobs);
    }

    RngStream elastic_stream = rng.stream("elastic");
    if (elastic_stream.bernoulli(cfg.p_elastic)) out = elastic_deform(out, cfg.elastic, elastic_stream, 0.0f, jobs);

    RngStream gamma_stream = rng.stream("gamma");
    if (gamma_stream.bernoulli(cfg.p_gamma)) {
        double g = gamma_stream.uniform(cfg.gamma_lo, cfg.gamma_hi);
        out = gamma(out, g);
    }
    return out;
}

} // namespace ctsev
