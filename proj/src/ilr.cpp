#include "ctsev/ilr.hpp"

#include <string>

#include "ctsev/errors.hpp"

namespace ctsev {

double compute_ilr(const LabelCounts& counts) {
    const std::size_t lung_total = counts.lung + counts.infection;
    if (lung_total == 0) throw NoLungError("infection-lung ratio undefined: mask has no lung or infection voxels");
    return static_cast<double>(counts.infection) / static_cast<double>(lung_total);
}

double compute_ilr(const LabelMask& mask) { return compute_ilr(count_labels(mask)); }

MetaVector assemble_metadata(const PatientMeta& meta) {
    if (!(meta.ilr >= 0.0 && meta.ilr <= 1.0)) throw InvalidArgument("ilr must lie in [0, 1]");
    if (meta.age_years < 0 || meta.age_years > 120)
        throw InvalidArgument("age " + std::to_string(meta.age_years) + " outside [0, 120]");
    return {meta.age_years / 100.0, meta.sex == Sex::Male ? 1.0 : 0.0, meta.ilr};
}

MetaVector assemble_metadata(const PatientRecord& rec, double ilr) {
    return assemble_metadata(PatientMeta{rec.age_years, rec.sex, ilr});
}

} // namespace ctsev
