#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ctsev {

enum class Task { Presence, Severity };

std::string_view to_string(Task t);
Task task_from_string(std::string_view name);

/// Fixed class order per task: presence = [Negative, Positive, Severe],
/// severity = [non-severe, severe].
const std::vector<std::string>& class_names(Task t);

/// Index of `name` in class_names(t); throws InvalidArgument when absent.
int class_index(Task t, std::string_view name);

/// Per-class probabilities for one sample.
struct Prediction {
    std::vector<std::string> classes;
    std::vector<double> probs;

    bool operator==(const Prediction&) const = default;
};

inline constexpr double kSimplexTolerance = 1e-6;

/// Throws InvalidArgument unless lengths match, every entry is in [0, 1] and
/// the vector sums to 1 within kSimplexTolerance.
void validate(const Prediction& p);

/// Serialized predictions for a cohort, keyed (and therefore sorted) by id.
struct PredictionFile {
    Task task = Task::Presence;
    std::map<std::string, std::vector<double>> items;

    bool operator==(const PredictionFile&) const = default;
};

/// JSON `{task, classes, items: [{id, probs}]}`. Severity items may also be
/// stored as a single severe-class probability, which reads back as
/// [1 - p, p]. Violations throw FormatError naming the offending id.
PredictionFile read_predictions(const std::filesystem::path& path);
void write_predictions(const PredictionFile& preds, const std::filesystem::path& path);
std::string render_predictions(const PredictionFile& preds);

} // namespace ctsev
