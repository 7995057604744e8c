#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ctsev {

enum class Sex { Female, Male };

struct PatientRecord {
    std::string patient_id;
    int age_years = 0;
    Sex sex = Sex::Female;

    bool operator==(const PatientRecord&) const = default;
};

/// Reads `patient_id,age,sex` (sex code F or M). Records keep file order.
/// Errors are ParseError carrying the 1-based row (the header is row 1).
std::vector<PatientRecord> read_cohort_csv(const std::filesystem::path& path);
void write_cohort_csv(const std::vector<PatientRecord>& records, const std::filesystem::path& path);

/// `patient_id,label` where label is a presence class name
/// (Negative, Positive, Severe). Returned sorted by id.
std::map<std::string, std::string> read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::map<std::string, std::string>& labels, const std::filesystem::path& path);

/// `patient_id,ilr`, sorted by id.
std::map<std::string, double> read_ilr_csv(const std::filesystem::path& path);
void write_ilr_csv(const std::map<std::string, double>& ilr, const std::filesystem::path& path);

/// Splits one CSV line on commas after stripping a trailing CR. No quoting.
std::vector<std::string> split_csv_line(std::string line);

} // namespace ctsev
