#pragma once

#include <cstdint>
#include <string>

#include "ctsev/cohort.hpp"
#include "ctsev/volume.hpp"

namespace ctsev {

/// Procedural thorax-like phantom: soft-tissue body, two ellipsoidal air-range
/// lungs, and (for infected patients) spherical ground-glass blobs grown until
/// a drawn target ratio is reached.
struct SynthConfig {
    Shape shape{40, 64, 64};
    Spacing spacing{2.2, 2.2, 3.0};
    double p_negative = 1.0 / 3.0;
    double ilr_lo = 0.03;
    double ilr_hi = 0.6;
    double severe_threshold = 0.25;
    double noise_hu = 20.0;
};

struct SynthPatient {
    PatientRecord record;
    Volume volume;
    LabelMask mask;
    double ilr = 0.0;
    /// Negative without infection, Severe when ilr > severe_threshold,
    /// Positive otherwise.
    std::string label;
};

/// "p0001", "p0002", ... for index 0, 1, ...
std::string synth_patient_id(int index);

/// Deterministic in (seed, index).
SynthPatient synth_patient(int index, std::uint64_t seed, const SynthConfig& cfg = {});

} // namespace ctsev
