#include "ctsev/synth.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "ctsev/ilr.hpp"
#include "ctsev/rng.hpp"

namespace ctsev {

namespace {

constexpr float kBodyHU = 40.0f;
constexpr float kOutsideHU = -1000.0f;
constexpr float kLungHU = -850.0f;
constexpr float kInfectionHU = -300.0f;

struct Ellipsoid {
    double cz, cy, cx; // mm
    double rz, ry, rx; // mm

    bool contains(double z, double y, double x) const {
        const double a = (z - cz) / rz, b = (y - cy) / ry, c = (x - cx) / rx;
        return a * a + b * b + c * c <= 1.0;
    }
};

} // namespace

std::string synth_patient_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%04d", index + 1);
    return buf;
}

SynthPatient synth_patient(int index, std::uint64_t seed, const SynthConfig& cfg) {
    validate(cfg.shape);
    validate(cfg.spacing);
    const std::string id = synth_patient_id(index);
    const Rng rng = Rng(seed).derive(id);
    RngStream anatomy = rng.stream("anatomy");
    RngStream noise = rng.stream("noise");
    RngStream infection = rng.stream("infection");
    RngStream demo = rng.stream("demographics");

    const Shape& s = cfg.shape;
    const Spacing& sp = cfg.spacing;
    const double ext_z = s.nz * sp.dz, ext_y = s.ny * sp.dy, ext_x = s.nx * sp.dx;
    auto jitter = [&](double v) { return v * anatomy.uniform(0.9, 1.1); };

    const double body_ry = jitter(0.42 * ext_y), body_rx = jitter(0.46 * ext_x);
    const double lung_offset = jitter(0.2 * ext_x);
    const Ellipsoid lungs[2] = {
        {0.5 * ext_z, 0.5 * ext_y, 0.5 * ext_x - lung_offset, jitter(0.38 * ext_z), jitter(0.28 * ext_y), jitter(0.15 * ext_x)},
        {0.5 * ext_z, 0.5 * ext_y, 0.5 * ext_x + lung_offset, jitter(0.38 * ext_z), jitter(0.28 * ext_y), jitter(0.15 * ext_x)},
    };

    std::vector<std::uint8_t> labels(s.voxels(), 0);
    std::vector<float> hu(s.voxels(), 0.0f);
    std::vector<std::size_t> lung_voxels;
    for (int z = 0; z < s.nz; ++z) {
        for (int y = 0; y < s.ny; ++y) {
            for (int x = 0; x < s.nx; ++x) {
                const double pz = (z + 0.5) * sp.dz, py = (y + 0.5) * sp.dy, px = (x + 0.5) * sp.dx;
                const std::size_t i = s.index(z, y, x);
                const double by = (py - 0.5 * ext_y) / body_ry, bx = (px - 0.5 * ext_x) / body_rx;
                if (lungs[0].contains(pz, py, px) || lungs[1].contains(pz, py, px)) {
                    labels[i] = 1;
                    lung_voxels.push_back(i);
                } else {
                    hu[i] = by * by + bx * bx <= 1.0 ? kBodyHU : kOutsideHU;
                }
            }
        }
    }

    SynthPatient p{PatientRecord{id, 0, Sex::Female}, new_volume({1, 1, 1}, {1, 1, 1}, 0.0f),
                   LabelMask({1, 1, 1}, {1, 1, 1}, {0}), 0.0, "Negative"};

    const bool infected = !lung_voxels.empty() && !infection.bernoulli(cfg.p_negative);
    if (infected) {
        const double target = infection.uniform(cfg.ilr_lo, cfg.ilr_hi);
        std::size_t infected_count = 0;
        const double lung_total = static_cast<double>(lung_voxels.size());
        while (static_cast<double>(infected_count) / lung_total < target) {
            const std::size_t center = lung_voxels[static_cast<std::size_t>(
                infection.uniform_int(0, static_cast<std::int64_t>(lung_voxels.size()) - 1))];
            const int cz = static_cast<int>(center / (static_cast<std::size_t>(s.ny) * s.nx));
            const int cy = static_cast<int>((center / s.nx) % s.ny);
            const int cx = static_cast<int>(center % s.nx);
            const double radius = infection.uniform(6.0, 14.0);
            const int rz = static_cast<int>(std::ceil(radius / sp.dz)), ry = static_cast<int>(std::ceil(radius / sp.dy)),
                      rx = static_cast<int>(std::ceil(radius / sp.dx));
            for (int z = std::max(0, cz - rz); z <= std::min(s.nz - 1, cz + rz); ++z)
                for (int y = std::max(0, cy - ry); y <= std::min(s.ny - 1, cy + ry); ++y)
                    for (int x = std::max(0, cx - rx); x <= std::min(s.nx - 1, cx + rx); ++x) {
                        const double dz = (z - cz) * sp.dz, dy = (y - cy) * sp.dy, dx = (x - cx) * sp.dx;
                        if (dz * dz + dy * dy + dx * dx > radius * radius) continue;
                        auto& l = labels[s.index(z, y, x)];
                        if (l == 1) {
                            l = 2;
                            ++infected_count;
                        }
                    }
        }
    }

    for (std::size_t i = 0; i < hu.size(); ++i) {
        if (labels[i] == 1) hu[i] = kLungHU;
        if (labels[i] == 2) hu[i] = kInfectionHU;
        hu[i] += static_cast<float>(noise.uniform(-cfg.noise_hu, cfg.noise_hu));
    }

    p.record.age_years = static_cast<int>(demo.uniform_int(25, 90));
    p.record.sex = demo.bernoulli(0.5) ? Sex::Male : Sex::Female;
    p.mask = LabelMask(s, sp, std::move(labels));
    p.volume = Volume(s, sp, Unit::HU, std::move(hu));
    const auto counts = count_labels(p.mask);
    p.ilr = counts.lung + counts.infection == 0 ? 0.0 : compute_ilr(counts);
    if (counts.infection > 0) p.label = p.ilr > cfg.severe_threshold ? "Severe" : "Positive";
    return p;
}

} // namespace ctsev
