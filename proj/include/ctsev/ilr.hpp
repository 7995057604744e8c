#pragma once

#include "ctsev/cohort.hpp"
#include "ctsev/volume.hpp"

namespace ctsev {

/// Infection-lung ratio |infection| / (|infection| + |healthy lung|), counted
/// in voxels at the mask's native resolution. Throws NoLungError when the
/// mask has neither label.
double compute_ilr(const LabelMask& mask);
double compute_ilr(const LabelCounts& counts);

struct PatientMeta {
    int age_years = 0;
    Sex sex = Sex::Female;
    double ilr = 0.0;
};

/// Metadata fused into the classification head: (age / 100, sex code with
/// female 0 and male 1, ilr).
struct MetaVector {
    double age_norm = 0.0;
    double sex_code = 0.0;
    double ilr = 0.0;

    bool operator==(const MetaVector&) const = default;
};

MetaVector assemble_metadata(const PatientRecord& rec, double ilr);
MetaVector assemble_metadata(const PatientMeta& meta);

} // namespace ctsev
