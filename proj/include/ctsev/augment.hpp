#pragma once

#include <array>
#include <vector>

#include "ctsev/canonical_json.hpp"
#include "ctsev/rng.hpp"
#include "ctsev/volume.hpp"

namespace ctsev {

enum class Axis { X, Y, Z };

struct ElasticConfig {
    int grid = 4;           ///< control points per axis
    double sigma_mm = 10.0; ///< max displacement per component
};

/// Training-time augmentation parameters. Each transform has its own
/// application probability and named RNG sub-stream.
struct AugmentConfig {
    double p_flip = 0.5;
    double p_rotate = 0.5;
    double p_scale = 0.5;
    double p_elastic = 0.5;
    double p_gamma = 0.5;
    double rotation_max_deg = 15.0;
    double scale_lo = 0.85;
    double scale_hi = 1.15;
    double gamma_lo = 0.7;
    double gamma_hi = 1.5;
    std::vector<Axis> flip_axes{Axis::X};
    ElasticConfig elastic;
};

void validate(const AugmentConfig& cfg);
Json to_json(const AugmentConfig& cfg);
AugmentConfig augment_config_from_json(const Json& j);

/// Rotation about the volume center in the axial (x-y) plane, in physical
/// coordinates. Reads outside the volume see `fill`.
Volume rotate_axial(const Volume& v, double angle_deg, float fill = 0.0f, int jobs = 1);

/// Index reversal along one axis. Lossless.
Volume flip(const Volume& v, Axis axis);

/// Isotropic zoom about the center; output shape is unchanged.
Volume scale(const Volume& v, double factor, float fill = 0.0f, int jobs = 1);

/// x -> x^g. Requires a grayscale volume.
Volume gamma(const Volume& v, double g);

/// Coarse lattice of displacement vectors (mm), trilinearly upsampled to a
/// dense field over the volume grid.
class DisplacementLattice {
  public:
    DisplacementLattice(int grid, double sigma_mm, RngStream& stream);

    int grid() const { return grid_; }
    /// Displacement in mm at lattice coordinates (gz, gy, gx) in [0, grid-1].
    std::array<double, 3> at(double gz, double gy, double gx) const;
    /// Displacement in voxels (z, y, x components) at voxel (z, y, x).
    std::array<double, 3> voxel_displacement(const Shape& shape, const Spacing& spacing, int z, int y, int x) const;

  private:
    int grid_;
    std::vector<std::array<double, 3>> nodes_; // z-major, components (z, y, x)
};

/// Draws a lattice from `stream` and samples the input at position minus
/// displacement, with `fill` outside the volume.
Volume elastic_deform(const Volume& v, const ElasticConfig& cfg, RngStream& stream, float fill = 0.0f, int jobs = 1);

/// Applies flip, rotation, scaling, elastic, gamma in that order. Each
/// transform draws apply/skip and then its parameters from its own stream of
/// `rng`, so toggling one transform never perturbs another's draws.
Volume augment_sample(const Volume& v, const AugmentConfig& cfg, const Rng& rng, int jobs = 1);

} // namespace ctsev
